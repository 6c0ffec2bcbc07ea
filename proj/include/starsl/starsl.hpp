#ifndef STARSL_STARSL_HPP
#define STARSL_STARSL_HPP

#include "starsl/common.hpp"
#include "starsl/edge.hpp"
#include "starsl/fd.hpp"
#include "starsl/graph.hpp"
#include "starsl/inverse.hpp"
#include "starsl/io.hpp"
#include "starsl/kernels.hpp"
#include "starsl/potential.hpp"
#include "starsl/quadrature.hpp"
#include "starsl/spectrum.hpp"

#endif
