#include "eltd/features.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace eltd {

std::size_t term_count(std::size_t n, std::size_t m) {
  if (n < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "term_count needs n >= 1 and m >= 1");
  // C(n+k-1, k) built incrementally: C(n+k-1,k) = C(n+k-2,k-1) * (n+k-1) / k
  std::size_t total = 0;
  std::size_t c = 1;
  for (std::size_t k = 1; k <= m; ++k) {
    const std::size_t mult = n + k - 1;
    if (c > std::numeric_limits<std::size_t>::max() / mult) {
      throw Error(ErrorCode::InvalidArgument, "polynomial term count overflows");
    }
    c = c * mult / k;
    total += c;
  }
  return total;
}

PolyTermIndex::PolyTermIndex(std::size_t n, std::size_t m) : n_(n), m_(m) {
  const auto p = term_count(n, m);
  if (n > std::numeric_limits<std::uint16_t>::max()) throw Error(ErrorCode::InvalidArgument, "too many variables");
  terms_.reserve(p + 1);
  terms_.emplace_back();
  parent_.push_back(0);
  last_.push_back(0);
  // degree-k block: extend every degree-(k-1) monomial by an index >= its last index
  std::size_t prev_begin = 0, prev_end = 1;
  for (std::size_t k = 1; k <= m; ++k) {
    const std::size_t begin = terms_.size();
    for (std::size_t q = prev_begin; q < prev_end; ++q) {
      const std::uint16_t lo = terms_[q].empty() ? 0 : terms_[q].back();
      for (std::uint16_t i = lo; i < n; ++i) {
        Monomial mono = terms_[q];
        mono.push_back(i);
        terms_.push_back(std::move(mono));
        parent_.push_back(q);
        last_.push_back(i);
      }
    }
    prev_begin = begin;
    prev_end = terms_.size();
  }
  for (std::size_t i = 0; i < terms_.size(); ++i) lookup_.emplace(terms_[i], i);
}

std::size_t PolyTermIndex::position(const Monomial& mono) const {
  auto it = lookup_.find(mono);
  if (it == lookup_.end()) throw Error(ErrorCode::InvalidArgument, "monomial not in polynomial index");
  return it->second;
}

void poly_expand_into(std::span<const double> x, const PolyTermIndex& index, std::span<double> out) {
  if (x.size() != index.n_) {
    throw Error(ErrorCode::DimensionMismatch, "polynomial input has " + std::to_string(x.size()) +
                                                  " values, expected " + std::to_string(index.n_));
  }
  if (out.size() != index.terms_.size()) throw Error(ErrorCode::DimensionMismatch, "polynomial output size");
  out[0] = 1.0;
  for (std::size_t i = 1; i < index.terms_.size(); ++i) out[i] = out[index.parent_[i]] * x[index.last_[i]];
}

std::vector<double> poly_expand(std::span<const double> x, const PolyTermIndex& index) {
  std::vector<double> out(index.size());
  poly_expand_into(x, index, out);
  return out;
}

Standardizer::Standardizer(std::vector<double> means, std::vector<double> sds)
    : means_(std::move(means)), sds_(std::move(sds)) {
  if (means_.size() != sds_.size()) throw Error(ErrorCode::DimensionMismatch, "standardizer parameter lengths");
  for (double s : sds_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::ConstantColumn, "standardizer sd must be > 0");
  }
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) throw Error(ErrorCode::Empty, "standardizer needs at least 2 rows");
  std::vector<double> means(static_cast<std::size_t>(rows.cols())), sds(means.size());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double m = rows.col(c).mean();
    const double ss = (rows.col(c).array() - m).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(rows.rows() - 1));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) {
      throw Error(ErrorCode::ConstantColumn, "column " + std::to_string(c) + " is constant");
    }
    means[static_cast<std::size_t>(c)] = m;
    sds[static_cast<std::size_t>(c)] = sd;
  }
  return Standardizer(std::move(means), std::move(sds));
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != means_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "standardizer column count mismatch");
  }
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const auto k = static_cast<std::size_t>(c);
    out.col(c) = (rows.col(c).array() - means_[k]) / sds_[k];
  }
  return out;
}

void Standardizer::apply_inplace(std::span<double> row) const {
  if (row.size() != means_.size()) throw Error(ErrorCode::DimensionMismatch, "standardizer column count mismatch");
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - means_[c]) / sds_[c];
}

}  // namespace eltd
