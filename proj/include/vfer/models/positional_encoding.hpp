#pragma once

#include <cstddef>

#include "vfer/core/tensor.hpp"

namespace vfer::models {

// Fixed sinusoidal table of shape (length, dim):
//   PE[pos, 2i]   = sin(pos / 10000^(2i/dim))
//   PE[pos, 2i+1] = cos(pos / 10000^(2i/dim))
// Throws ConfigError for odd `dim` and InvalidInputError for zero length.
Tensor positional_encoding(std::size_t length, std::size_t dim);

}  // namespace vfer::models
