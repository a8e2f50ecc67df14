#pragma once

#include "gfe/cli.hpp"
#include "gfe/energy.hpp"
#include "gfe/error.hpp"
#include "gfe/euclidean.hpp"
#include "gfe/geodesic_interpolant.hpp"
#include "gfe/grid.hpp"
#include "gfe/interpolant.hpp"
#include "gfe/io.hpp"
#include "gfe/jacobi.hpp"
#include "gfe/manifold.hpp"
#include "gfe/projection_interpolant.hpp"
#include "gfe/quadrature.hpp"
#include "gfe/reference_element.hpp"
#include "gfe/rotation.hpp"
#include "gfe/sphere.hpp"
