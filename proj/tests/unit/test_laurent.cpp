#include <doctest.h>

#include <algorithm>
#include <random>

#include "nbloch/laurent.hpp"

using namespace nbloch;

TEST_CASE("symbol constructor enforces tight hop ranges") {
  CHECK_THROWS(LaurentSymbol({{-2, {0, 0}}, {-1, {1, 0}}, {1, {1, 0}}}, 2, 1));
  CHECK_THROWS(LaurentSymbol({{-1, {1, 0}}, {2, {0, 0}}}, 1, 2));
  CHECK_THROWS(LaurentSymbol({{1, {1, 0}}}, 0, 1));  // r >= 1 required

  auto s = LaurentSymbol::from_hops({{-2, {1, 0}}, {1, {0.5, 0}}});
  CHECK(s.r() == 2);
  CHECK(s.s() == 1);
  CHECK(s.coeff(-1) == cd(0, 0));
}

TEST_CASE("laurent_eval matches direct summation and rejects beta = 0") {
  auto s = LaurentSymbol::from_hops(
      {{-2, {1, 0}}, {-1, {1, 0}}, {1, {0.7, 0}}, {2, {0.8, 0}}});
  cd b(0.3, -1.1);
  cd expect = 1.0 / (b * b) + 1.0 / b + 0.7 * b + 0.8 * b * b;
  CHECK(std::abs(laurent_eval(s, b) - expect) < 1e-14);
  CHECK_THROWS_AS((void)laurent_eval(s, cd(0, 0)), std::domain_error);
}

TEST_CASE("characteristic roots reconstruct the symbol on random instances") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> range(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    int r = range(rng), s = range(rng);
    std::map<int, cd> hops;
    for (int l = -r; l <= s; ++l)
      if (l != 0) hops[l] = cd(u(rng), u(rng));
    // keep the edges away from zero so the declared ranges stay tight
    hops[-r] += cd(2, 0);
    hops[s] += cd(2, 0);
    LaurentSymbol sym(hops, r, s);
    cd E(u(rng), u(rng));
    auto rs = char_roots(sym, E);
    REQUIRE(rs.roots.size() == static_cast<size_t>(r + s));
    for (cd b : rs.roots)
      CHECK(std::abs(laurent_eval(sym, b) - E) <
            1e-8 * (1.0 + std::abs(E)));
  }
}

TEST_CASE("root ordering is modulus then phase and rank lookup is 1-based") {
  // x^2 + 1: roots +-i tie in modulus, phase pi/2 sorts before 3pi/2
  auto roots = poly_roots({{1, 0}, {0, 0}, {1, 0}});
  REQUIRE(roots.size() == 2);
  CHECK(std::abs(roots[0] - cd(0, 1)) < 1e-12);
  CHECK(std::abs(roots[1] - cd(0, -1)) < 1e-12);

  auto s = LaurentSymbol::from_hops(
      {{-2, {1, 0}}, {-1, {1, 0}}, {1, {0.7, 0}}, {2, {0.8, 0}}});
  auto rs = char_roots(s, cd(0, 0.35));
  REQUIRE(rs.roots.size() == 4);
  CHECK(std::abs(modulus_rank(rs, 3)) > 1.0);
  CHECK_THROWS_AS((void)modulus_rank(rs, 0), std::out_of_range);
  CHECK_THROWS_AS((void)modulus_rank(rs, 5), std::out_of_range);
}

TEST_CASE("sorting permutes but never alters the root multiset") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cd> roots;
  for (int i = 0; i < 12; ++i) roots.push_back(cd(u(rng), u(rng)));
  auto sorted = roots;
  sort_by_modulus(sorted);
  auto key = [](cd a, cd b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  };
  std::vector<cd> x = roots, y = sorted;
  std::sort(x.begin(), x.end(), key);
  std::sort(y.begin(), y.end(), key);
  for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - y[i]) < 1e-15);
}

TEST_CASE("coincident roots raise the near-degenerate flag") {
  // beta + 1/beta at E = 2 gives a double root at beta = 1
  auto s = LaurentSymbol::from_hops({{-1, {1, 0}}, {1, {1, 0}}});
  auto rs = char_roots(s, cd(2, 0));
  CHECK(rs.near_degenerate);
  rs = char_roots(s, cd(0.3, 0.4));
  CHECK(!rs.near_degenerate);
}

TEST_CASE("laurent polynomial window arithmetic") {
  LaurentPoly a(-1, {{1, 0}, {0, 0}, {1, 0}});  // beta^-1 + beta
  LaurentPoly b(0, {{-1, 0}, {1, 0}});          // beta - 1
  auto prod = a * b;
  CHECK(std::abs(prod.coeff(-1) - cd(-1, 0)) < 1e-15);
  CHECK(std::abs(prod.coeff(0) - cd(1, 0)) < 1e-15);
  CHECK(std::abs(prod.coeff(1) - cd(-1, 0)) < 1e-15);
  CHECK(std::abs(prod.coeff(2) - cd(1, 0)) < 1e-15);
  auto sum = a + b;
  CHECK(std::abs(sum.coeff(1) - cd(2, 0)) < 1e-15);
  CHECK(std::abs((a - a).coeff(-1)) < 1e-15);

  CHECK_THROWS(monomial_coeffs(a, 0));  // term below -pole
  auto mono = monomial_coeffs(a, 1);    // beta * (beta^-1 + beta) = 1 + beta^2
  REQUIRE(mono.size() == 3);
  CHECK(std::abs(mono[0] - cd(1, 0)) < 1e-15);
  CHECK(std::abs(mono[2] - cd(1, 0)) < 1e-15);
}
