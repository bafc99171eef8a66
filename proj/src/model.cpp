#include "nbloch/model.hpp"

#include <stdexcept>

namespace nbloch {

Eigen::MatrixXcd TruncatedHamiltonian::to_dense() const {
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim(), dim());
  for (int n = 0; n < N; ++n) {
    for (int l = -r; l <= s; ++l) {
      int m = n - l;
      if (boundary == Boundary::periodic)
        m = ((m % N) + N) % N;
      else if (m < 0 || m >= N)
        continue;
      const cd* blk = block(l);
      for (int a = 0; a < bands; ++a)
        for (int b = 0; b < bands; ++b)
          H(n * bands + a, m * bands + b) += blk[a * bands + b];
    }
  }
  return H;
}

Eigen::MatrixXcd SingleBandModel::bloch_matrix(cd beta) const {
  Eigen::MatrixXcd H(1, 1);
  H(0, 0) = laurent_eval(symbol_, beta);
  return H;
}

RootSet SingleBandModel::char_roots(cd E) const {
  return nbloch::char_roots(symbol_, E);
}

Eigen::MatrixXcd SingleBandModel::hop_block(int l) const {
  Eigen::MatrixXcd T(1, 1);
  T(0, 0) = symbol_.coeff(l);
  return T;
}

TwoChainModel::TwoChainModel(double t1, double delta_a, double delta_b,
                             double t0, double V)
    : t1_(t1), da_(delta_a), db_(delta_b), t0_(t0), V_(V) {
  if (t1 - delta_a == 0.0 && t1 - delta_b == 0.0)
    throw std::invalid_argument("TwoChainModel: no right hopping in either chain");
  if (t1 + delta_a == 0.0 && t1 + delta_b == 0.0)
    throw std::invalid_argument("TwoChainModel: no left hopping in either chain");
}

namespace {

// cos k -> (beta + 1/beta)/2, i sin k -> (beta - 1/beta)/2
LaurentPoly cos_poly() { return LaurentPoly(-1, {cd(0.5), cd(0.0), cd(0.5)}); }
LaurentPoly isin_poly() { return LaurentPoly(-1, {cd(-0.5), cd(0.0), cd(0.5)}); }

LaurentPoly d0_poly(double t1, double da, double db) {
  return LaurentPoly(cd(2.0 * t1)) * cos_poly() -
         LaurentPoly(cd(da + db)) * isin_poly();
}

LaurentPoly vz_poly(double da, double db, double V) {
  return LaurentPoly(cd(V)) + LaurentPoly(cd(db - da)) * isin_poly();
}

}  // namespace

Eigen::MatrixXcd TwoChainModel::bloch_matrix(cd beta) const {
  if (beta == cd(0.0, 0.0))
    throw std::domain_error("bloch_matrix: beta = 0");
  const cd ib = cd(1.0, 0.0) / beta;
  const cd cosk = 0.5 * (beta + ib);
  const cd isink = 0.5 * (beta - ib);
  const cd d0 = 2.0 * t1_ * cosk - cd(da_ + db_) * isink;
  const cd vz = cd(V_) + cd(db_ - da_) * isink;
  Eigen::MatrixXcd H(2, 2);
  H(0, 0) = d0 + vz;
  H(0, 1) = cd(t0_);
  H(1, 0) = cd(t0_);
  H(1, 1) = d0 - vz;
  return H;
}

RootSet TwoChainModel::char_roots(cd E) const {
  // det(H(beta) - E) = (d0 - E)^2 - vz^2 - t0^2, pole order 2
  const LaurentPoly dE = d0_poly(t1_, da_, db_) - LaurentPoly(E);
  const LaurentPoly vz = vz_poly(da_, db_, V_);
  const LaurentPoly det = dE * dE - vz * vz - LaurentPoly(cd(t0_ * t0_));
  RootSet rs;
  rs.energy = E;
  rs.roots = poly_roots(monomial_coeffs(det, pole_order()));
  for (size_t i = 0; i + 1 < rs.roots.size() && !rs.near_degenerate; ++i)
    for (size_t j = i + 1; j < rs.roots.size(); ++j)
      if (std::abs(rs.roots[i] - rs.roots[j]) < 1e-8) {
        rs.near_degenerate = true;
        break;
      }
  return rs;
}

Eigen::MatrixXcd TwoChainModel::hop_block(int l) const {
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(2, 2);
  if (l == -1) {
    T(0, 0) = cd(t1_ + da_);
    T(1, 1) = cd(t1_ + db_);
  } else if (l == 0) {
    T(0, 0) = cd(V_);
    T(1, 1) = cd(-V_);
    T(0, 1) = cd(t0_);
    T(1, 0) = cd(t0_);
  } else if (l == 1) {
    T(0, 0) = cd(t1_ - da_);
    T(1, 1) = cd(t1_ - db_);
  }
  return T;
}

TruncatedHamiltonian build_truncated(const BlochModel& model, int N,
                                     Boundary boundary) {
  const int r = model.left_range(), s = model.right_range();
  if (N <= 2 * std::max(r, s))
    throw std::invalid_argument("build_truncated: N must exceed 2*max(r,s)");
  TruncatedHamiltonian H;
  H.N = N;
  H.bands = model.bands();
  H.r = r;
  H.s = s;
  H.boundary = boundary;
  H.blocks.resize(static_cast<size_t>(r + s + 1));
  for (int l = -r; l <= s; ++l) {
    Eigen::MatrixXcd T = model.hop_block(l);
    auto& blk = H.blocks[static_cast<size_t>(l + r)];
    blk.resize(static_cast<size_t>(H.bands * H.bands));
    for (int a = 0; a < H.bands; ++a)
      for (int b = 0; b < H.bands; ++b)
        blk[static_cast<size_t>(a * H.bands + b)] = T(a, b);
  }
  return H;
}

}  // namespace nbloch
