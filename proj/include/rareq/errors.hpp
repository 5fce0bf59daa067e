#pragma once

#include <stdexcept>
#include <string>

namespace rareq {

/// Invalid parameters, malformed files, violated preconditions.
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite values, failed brackets, numerical breakdowns.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rareq
