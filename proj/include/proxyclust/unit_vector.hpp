#pragma once

#include <cmath>
#include <string>

#include "proxyclust/errors.hpp"
#include "proxyclust/types.hpp"

namespace proxyclust {

// An embedding on the unit sphere. Only constructible through normalize().
template <typename Scalar>
class BasicUnitVector {
 public:
  using VectorType = VectorX<Scalar>;

  const VectorType& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  Scalar operator[](Index i) const { return values_[i]; }

  template <typename Derived>
  friend BasicUnitVector<typename Derived::Scalar> normalize(const Eigen::MatrixBase<Derived>& v);

 private:
  explicit BasicUnitVector(VectorType v) : values_(std::move(v)) {}
  VectorType values_;
};

using UnitVector = BasicUnitVector<double>;

template <typename Derived>
BasicUnitVector<typename Derived::Scalar> normalize(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  static_assert(Derived::ColsAtCompileTime == 1 || Derived::RowsAtCompileTime == 1,
                "normalize expects a vector expression");
  const Scalar norm = v.norm();
  if (!(norm > Scalar(0)) || !std::isfinite(static_cast<double>(norm))) {
    throw NormalizationError("cannot normalize a vector with norm " + std::to_string(static_cast<double>(norm)));
  }
  VectorX<Scalar> out = v / norm;
  return BasicUnitVector<Scalar>(std::move(out));
}

template <typename Scalar>
Scalar dot(const BasicUnitVector<Scalar>& a, const BasicUnitVector<Scalar>& b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: dimension mismatch " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  return a.values().dot(b.values());
}

}  // namespace proxyclust
