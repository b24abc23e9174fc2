#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "eltd/error.hpp"

namespace eltd {

/// Number of non-constant monomials of degree 1..m in n variables:
/// C(n,1) + C(n+1,2) + ... + C(n+m-1,m).
std::size_t term_count(std::size_t n, std::size_t m);

/// Monomial = non-decreasing list of variable indices.
using Monomial = std::vector<std::uint16_t>;

/// Graded-lexicographic enumeration of all monomials up to degree m.
/// Position 0 is the constant term; positions 1..P follow degree 1, then 2, ...
class PolyTermIndex {
public:
  PolyTermIndex(std::size_t n, std::size_t m);

  [[nodiscard]] std::size_t variables() const noexcept { return n_; }
  [[nodiscard]] std::size_t degree() const noexcept { return m_; }
  /// P + 1, including the constant.
  [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
  [[nodiscard]] const Monomial& monomial(std::size_t pos) const { return terms_.at(pos); }
  /// Throws InvalidArgument for monomials outside the index.
  [[nodiscard]] std::size_t position(const Monomial& mono) const;

private:
  std::size_t n_;
  std::size_t m_;
  std::vector<Monomial> terms_;
  // each term's position is parent position (term without its last factor) extended by one index
  std::vector<std::size_t> parent_;
  std::vector<std::uint16_t> last_;
  std::map<Monomial, std::size_t> lookup_;

  friend void poly_expand_into(std::span<const double>, const PolyTermIndex&, std::span<double>);
};

/// [1, x_i1, ..., x_i1 * x_i2 * ... ] in PolyTermIndex order. Throws DimensionMismatch.
std::vector<double> poly_expand(std::span<const double> x, const PolyTermIndex& index);
void poly_expand_into(std::span<const double> x, const PolyTermIndex& index, std::span<double> out);

/// Column-wise z-scoring with the sample standard deviation of the fit set.
class Standardizer {
public:
  Standardizer() = default;
  Standardizer(std::vector<double> means, std::vector<double> sds);

  /// Throws ConstantColumn when any column has zero spread.
  static Standardizer fit(const Eigen::MatrixXd& rows);

  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
  void apply_inplace(std::span<double> row) const;
  [[nodiscard]] std::size_t size() const noexcept { return means_.size(); }
  [[nodiscard]] const std::vector<double>& means() const noexcept { return means_; }
  [[nodiscard]] const std::vector<double>& sds() const noexcept { return sds_; }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;

private:
  std::vector<double> means_;
  std::vector<double> sds_;
};

}  // namespace eltd
