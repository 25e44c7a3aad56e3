// SPDX-License-Identifier: Apache-2.0
/// @file errors.hpp
/// @brief Exception types raised by the numerical routines.
#pragma once

#include <stdexcept>
#include <string>

namespace vstate {

/// Base class of every numerical failure. The CLI maps it to exit code 1.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct domain_error : numerical_error {
  using numerical_error::numerical_error;
};

struct overflow_error : numerical_error {
  using numerical_error::numerical_error;
};

// refinement, Newton or series that did not settle
struct convergence_error : numerical_error {
  using numerical_error::numerical_error;
};

// boundary curves that self-intersect or leave the domain
struct geometry_error : numerical_error {
  using numerical_error::numerical_error;
};

struct not_found_error : numerical_error {
  using numerical_error::numerical_error;
};

/// Bad configuration or command line. The CLI maps it to exit code 2.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vstate
