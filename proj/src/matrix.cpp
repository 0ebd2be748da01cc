#include "voltwatch/matrix.hpp"

#include <cmath>
#include <cstring>

#include "voltwatch/kernels.hpp"

namespace voltwatch::numerics {

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Matrix::require_finite(const std::string& context) const {
  if (!all_finite())
    throw NumericError("non-finite value produced by " + context);
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) return false;
  if (a.size() == 0) return true;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void GradientStore::scale_all(double alpha) {
  const auto& k = kernels::active();
  for (auto& [name, m] : entries_) k.scale(m.data(), alpha, m.data(), m.size());
}

double GradientStore::global_norm() const {
  const auto& k = kernels::active();
  double total = 0.0;
  for (const auto& [name, m] : entries_) total += k.sum_sq(m.data(), m.size());
  return std::sqrt(total);
}

}  // namespace voltwatch::numerics
