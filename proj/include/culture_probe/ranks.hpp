#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "culture_probe/error.hpp"

namespace cprobe {

/// 1-based fractional ranks: tied values share the mean of the positions
/// they occupy.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> fractionalRanks(
    const Eigen::MatrixBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && values(order[static_cast<std::size_t>(j + 1)]) == values(order[static_cast<std::size_t>(i)]))
      ++j;
    const Scalar shared = Scalar(i + j + 2) / Scalar(2);
    for (Eigen::Index k = i; k <= j; ++k) ranks(order[static_cast<std::size_t>(k)]) = shared;
    i = j + 1;
  }
  return ranks;
}

/// Pearson correlation; nullopt when either side is constant or n < 2.
template <typename DerivedA, typename DerivedB>
std::optional<typename DerivedA::Scalar> pearson(const Eigen::MatrixBase<DerivedA>& a,
                                                 const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) throw ValidationError("correlation inputs differ in length");
  if (a.size() < 2) return std::nullopt;
  const auto da = (a.derived().array() - a.mean()).matrix().eval();
  const auto db = (b.derived().array() - b.mean()).matrix().eval();
  const Scalar saa = da.squaredNorm();
  const Scalar sbb = db.squaredNorm();
  if (saa == Scalar(0) || sbb == Scalar(0)) return std::nullopt;
  const Scalar r = da.dot(db) / std::sqrt(saa * sbb);
  return std::clamp(r, Scalar(-1), Scalar(1));
}

/// Tie-corrected Spearman correlation (Pearson on fractional ranks).
/// Undefined for n < 2 or a constant input; throws on length mismatch.
template <typename DerivedA, typename DerivedB>
std::optional<typename DerivedA::Scalar> spearman(const Eigen::MatrixBase<DerivedA>& a,
                                                  const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) throw ValidationError("spearman inputs differ in length");
  if (a.size() < 2) return std::nullopt;
  return pearson(fractionalRanks(a), fractionalRanks(b));
}

inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("spearman inputs differ in length");
  using Map = Eigen::Map<const Eigen::VectorXd>;
  return spearman(Map(a.data(), static_cast<Eigen::Index>(a.size())),
                  Map(b.data(), static_cast<Eigen::Index>(b.size())));
}

}  // namespace cprobe
