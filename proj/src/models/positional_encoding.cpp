#include "vfer/models/positional_encoding.hpp"

#include <cmath>

#include "vfer/core/errors.hpp"

namespace vfer::models {

Tensor positional_encoding(std::size_t length, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw ConfigError("positional encoding dimension must be even and positive");
  if (length == 0) throw InvalidInputError("positional encoding length must be positive");
  Tensor table({length, dim});
  for (std::size_t i = 0; i < dim / 2; ++i) {
    const double rate = std::pow(10000.0, -static_cast<double>(2 * i) / static_cast<double>(dim));
    for (std::size_t pos = 0; pos < length; ++pos) {
      const double angle = static_cast<double>(pos) * rate;
      table[pos * dim + 2 * i] = std::sin(angle);
      table[pos * dim + 2 * i + 1] = std::cos(angle);
    }
  }
  return table;
}

}  // namespace vfer::models
