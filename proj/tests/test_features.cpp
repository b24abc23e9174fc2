#include <doctest.h>

#include <set>

#include "eltd/features.hpp"
#include "support.hpp"

using namespace eltd;
using eltd_test::code_of;

TEST_CASE("term counts") {
  CHECK(term_count(1, 1) == 1);
  CHECK(term_count(2, 2) == 5);
  CHECK(term_count(7, 3) == 119);
  for (std::size_t n = 1; n <= 7; ++n)
    for (std::size_t m = 1; m <= 5; ++m) CHECK(PolyTermIndex(n, m).size() == term_count(n, m) + 1);
}

TEST_CASE("polynomial index is graded and duplicate free") {
  const PolyTermIndex idx(3, 3);
  std::set<Monomial> seen;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    const auto& mono = idx.monomial(p);
    CHECK(seen.insert(mono).second);
    CHECK(idx.position(mono) == p);
    if (p > 0) {
      const auto& prev = idx.monomial(p - 1);
      CHECK((prev.size() < mono.size() || (prev.size() == mono.size() && prev < mono)));
    }
  }
  CHECK(code_of([&] { (void)idx.position(Monomial{0, 0, 0, 0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("poly expansion") {
  const std::vector<double> a{1.5};
  CHECK(poly_expand(a, PolyTermIndex(1, 2)) == std::vector<double>{1, 1.5, 2.25});
  const std::vector<double> x{2, 3};
  CHECK(poly_expand(x, PolyTermIndex(2, 2)) == std::vector<double>{1, 2, 3, 4, 6, 9});
  const std::vector<double> zero(4, 0.0);
  const auto z = poly_expand(zero, PolyTermIndex(4, 3));
  CHECK(z[0] == 1.0);
  for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] == 0.0);
  CHECK(code_of([&] { poly_expand(x, PolyTermIndex(3, 2)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("standardizer") {
  Eigen::MatrixXd m(3, 2);
  m << 1, 10, 2, 30, 3, 20;
  const auto s = Standardizer::fit(m);
  CHECK(s.means()[0] == 2.0);
  CHECK(s.sds()[0] == 1.0);
  const auto z = s.apply(m);
  CHECK(z(0, 0) == -1.0);
  CHECK(z(1, 0) == 0.0);
  CHECK(z(2, 0) == 1.0);
  for (int c = 0; c < 2; ++c) CHECK(std::abs(z.col(c).mean()) < 1e-12);
  Eigen::MatrixXd k(3, 1);
  k << 4, 4, 4;
  CHECK(code_of([&] { Standardizer::fit(k); }) == ErrorCode::ConstantColumn);
}
