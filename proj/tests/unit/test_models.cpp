#include <doctest.h>

#include <Eigen/Dense>

#include "nbloch/model.hpp"

using namespace nbloch;

static SingleBandModel asym_model() {
  return SingleBandModel(LaurentSymbol::from_hops(
      {{-2, {1, 0}}, {-1, {1, 0}}, {1, {0.7, 0}}, {2, {0.8, 0}}}));
}

TEST_CASE("open truncation places hop blocks on the right diagonals") {
  auto m = asym_model();
  auto H = build_truncated(m, 8, Boundary::open);
  CHECK(H.dim() == 8);
  auto D = H.to_dense();
  // (H)_{n,m} = T_{n-m}
  CHECK(std::abs(D(3, 1) - cd(0.8, 0)) < 1e-15);  // offset +2
  CHECK(std::abs(D(3, 2) - cd(0.7, 0)) < 1e-15);  // offset +1
  CHECK(std::abs(D(3, 3)) < 1e-15);               // no on-site term
  CHECK(std::abs(D(3, 4) - cd(1, 0)) < 1e-15);    // offset -1
  CHECK(std::abs(D(3, 5) - cd(1, 0)) < 1e-15);    // offset -2
  CHECK(std::abs(D(0, 7)) < 1e-15);               // open: no wrap
}

TEST_CASE("periodic truncation wraps the corners") {
  auto m = asym_model();
  auto D = build_truncated(m, 8, Boundary::periodic).to_dense();
  CHECK(std::abs(D(0, 6) - cd(0.8, 0)) < 1e-15);  // offset +2 wrapped
  CHECK(std::abs(D(7, 0) - cd(1, 0)) < 1e-15);    // offset -1 wrapped
  CHECK(std::abs(D(6, 0) - cd(1, 0)) < 1e-15);    // offset -2 wrapped
}

TEST_CASE("truncation rejects lattices shorter than the hop ranges allow") {
  auto m = asym_model();
  CHECK_THROWS((void)build_truncated(m, 4, Boundary::open));
  CHECK_NOTHROW((void)build_truncated(m, 5, Boundary::open));
}

TEST_CASE("two-chain bloch matrix matches its k-space definition") {
  TwoChainModel m(0.75, 0.25, -0.15, 0.05, 0.8);
  for (double k : {0.3, -1.1, 2.7}) {
    cd beta = std::polar(1.0, k);
    auto B = m.bloch_matrix(beta);
    cd d0 = 2.0 * 0.75 * std::cos(k) - cd(0, 1) * (0.25 - 0.15) * std::sin(k);
    cd dz = 0.8 + cd(0, 1) * (-0.15 - 0.25) * std::sin(k);
    CHECK(std::abs(B(0, 0) - (d0 + dz)) < 1e-14);
    CHECK(std::abs(B(1, 1) - (d0 - dz)) < 1e-14);
    CHECK(std::abs(B(0, 1) - cd(0.05, 0)) < 1e-14);
    CHECK(std::abs(B(1, 0) - cd(0.05, 0)) < 1e-14);
  }
}

TEST_CASE("two-chain characteristic roots solve det(H(beta) - E) = 0") {
  TwoChainModel m(0.75, 0.25, -0.15, 0.05, 0.8);
  CHECK(m.pole_order() == 2);
  CHECK(m.root_count() == 4);
  cd E(0.4, -0.2);
  auto rs = m.char_roots(E);
  REQUIRE(rs.roots.size() == 4);
  for (cd b : rs.roots) {
    Eigen::Matrix2cd A = m.bloch_matrix(b) - E * Eigen::Matrix2cd::Identity();
    CHECK(std::abs(A.determinant()) < 1e-9);
  }
}

TEST_CASE("two-chain hop blocks carry the per-chain asymmetric amplitudes") {
  TwoChainModel m(0.75, 0.25, -0.15, 0.05, 0.8);
  auto L = m.hop_block(-1), C = m.hop_block(0), R = m.hop_block(1);
  CHECK(std::abs(L(0, 0) - cd(1.0, 0)) < 1e-15);   // t1 + da
  CHECK(std::abs(L(1, 1) - cd(0.6, 0)) < 1e-15);   // t1 + db
  CHECK(std::abs(R(0, 0) - cd(0.5, 0)) < 1e-15);   // t1 - da
  CHECK(std::abs(R(1, 1) - cd(0.9, 0)) < 1e-15);   // t1 - db
  CHECK(std::abs(C(0, 0) - cd(0.8, 0)) < 1e-15);
  CHECK(std::abs(C(1, 1) + cd(0.8, 0)) < 1e-15);
  CHECK(std::abs(C(0, 1) - cd(0.05, 0)) < 1e-15);
}

TEST_CASE("nearest-neighbor asymmetric chain has constant root product") {
  // t beta^2 - E beta + 1 = 0: product of roots is 1/t independent of E
  double t = 0.5;
  SingleBandModel m(LaurentSymbol::from_hops({{-1, {1, 0}}, {1, {t, 0}}}));
  for (cd E : {cd(0.2, 0.1), cd(-1, 0.4), cd(0.9, -0.7)}) {
    auto rs = m.char_roots(E);
    REQUIRE(rs.roots.size() == 2);
    CHECK(std::abs(rs.roots[0] * rs.roots[1] - cd(1.0 / t, 0)) < 1e-10);
  }
}
