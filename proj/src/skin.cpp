#include "nbloch/skin.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nbloch/kernels.hpp"
#include "nbloch/spectra.hpp"

namespace nbloch {

namespace {

// c * beta^{-n} through log magnitude/phase; underflows cleanly to zero
// where beta^{-n} spans too many decades for direct powers.
cd decayed_term(cd c, cd log_beta, int n) {
  if (c == cd(0.0, 0.0)) return cd(0.0, 0.0);
  const cd expo = std::log(c) - static_cast<double>(n) * log_beta;
  if (expo.real() < -700.0) return cd(0.0, 0.0);
  return std::exp(expo);
}

void normalize_mode(std::vector<cd>& amp) {
  double max_abs = 0.0;
  for (cd a : amp) max_abs = std::max(max_abs, std::abs(a));
  if (max_abs == 0.0)
    throw std::runtime_error("skin mode: vanishing amplitudes");
  cd phase(1.0, 0.0);
  for (cd a : amp)
    if (std::abs(a) > 1e-12 * max_abs) {
      phase = a / std::abs(a);
      break;
    }
  const double nrm = std::sqrt(kernels::scalar::norm_sq(amp.data(), amp.size()));
  const cd f = std::conj(phase) / nrm;
  for (cd& a : amp) a *= f;
}

}  // namespace

std::vector<SkinMode> build_skin_modes(const BlochModel& model, cd E0, int N) {
  int W;
  try {
    W = winding_roots(model, E0);
  } catch (const std::domain_error&) {
    throw std::invalid_argument("build_skin_modes: E0 on the PBC loop");
  }
  if (W >= 0)
    throw std::invalid_argument("build_skin_modes: W(E0) >= 0, not a skin energy");
  const int mult = -W;
  const int bands = model.bands();

  RootSet rs = model.char_roots(E0);
  std::vector<cd> outside;
  for (cd b : rs.roots)
    if (std::abs(b) > 1.0) outside.push_back(b);
  for (size_t i = 0; i + 1 < outside.size(); ++i)
    for (size_t j = i + 1; j < outside.size(); ++j)
      if (std::abs(std::abs(outside[i]) - std::abs(outside[j])) < 1e-8 &&
          std::abs(outside[i] - outside[j]) < 1e-8)
        throw std::runtime_error("build_skin_modes: degenerate decaying roots");
  const int n_out = static_cast<int>(outside.size());

  // per-root block nullvectors (trivially 1 for single band)
  std::vector<Eigen::VectorXcd> nullvecs(static_cast<size_t>(n_out));
  for (int i = 0; i < n_out; ++i) {
    if (bands == 1) {
      nullvecs[static_cast<size_t>(i)] = Eigen::VectorXcd::Ones(1);
    } else {
      Eigen::MatrixXcd M = model.bloch_matrix(outside[static_cast<size_t>(i)]);
      for (int d = 0; d < bands; ++d) M(d, d) -= E0;
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      if (sv(bands - 2) < 1e-6)
        throw std::runtime_error("build_skin_modes: degenerate band nullvector");
      nullvecs[static_cast<size_t>(i)] = svd.matrixV().col(bands - 1);
    }
  }

  // boundary constraints: zero padding of sites 0, -1, ..., 1-s (block rows)
  const int s = model.right_range();
  const int n_constraints = bands == 1 ? s : s * bands;
  Eigen::MatrixXcd C(n_constraints, n_out);
  for (int i = 0; i < n_out; ++i) {
    for (int j = 0; j < s; ++j) {
      const cd w = std::pow(outside[static_cast<size_t>(i)], j);
      for (int b = 0; b < bands; ++b)
        C(j * bands + b, i) = w * nullvecs[static_cast<size_t>(i)](b);
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  int nullity = n_out - static_cast<int>(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) < 1e-10 * std::max(sigma_max, 1.0)) ++nullity;
  if (nullity != mult)
    throw std::runtime_error(
        "build_skin_modes: constraint nullspace dimension != |W|");

  std::vector<cd> log_betas(static_cast<size_t>(n_out));
  for (int i = 0; i < n_out; ++i)
    log_betas[static_cast<size_t>(i)] = std::log(outside[static_cast<size_t>(i)]);

  std::vector<SkinMode> modes;
  for (int m = 0; m < mult; ++m) {
    Eigen::VectorXcd coef = svd.matrixV().col(n_out - 1 - m);
    SkinMode mode;
    mode.E0 = E0;
    mode.bands = bands;
    mode.winding = W;
    mode.roots_used = outside;
    mode.coefficients.assign(coef.data(), coef.data() + n_out);
    mode.amplitudes.assign(static_cast<size_t>(N) * bands, cd(0.0, 0.0));
    for (int n = 1; n <= N; ++n) {
      for (int i = 0; i < n_out; ++i) {
        const cd w = decayed_term(coef(i), log_betas[static_cast<size_t>(i)], n);
        if (w == cd(0.0, 0.0)) continue;
        for (int b = 0; b < bands; ++b)
          mode.amplitudes[static_cast<size_t>((n - 1) * bands + b)] +=
              w * nullvecs[static_cast<size_t>(i)](b);
      }
    }
    modes.push_back(std::move(mode));
  }

  // orthonormal basis when the eigenvalue is degenerate (|W| > 1)
  for (size_t m = 0; m < modes.size(); ++m) {
    auto& amp = modes[m].amplitudes;
    for (size_t p = 0; p < m; ++p) {
      const auto& prev = modes[p].amplitudes;
      cd ov(0.0, 0.0);
      for (size_t i = 0; i < amp.size(); ++i) ov += std::conj(prev[i]) * amp[i];
      for (size_t i = 0; i < amp.size(); ++i) amp[i] -= ov * prev[i];
    }
    normalize_mode(amp);
  }

  const int guard = std::max(model.left_range(), model.right_range());
  TruncatedHamiltonian H = build_truncated(model, N, Boundary::open);
  for (auto& mode : modes)
    mode.residual = eigen_residual(H, mode, 1, N - guard);
  return modes;
}

SkinMode build_skin_mode(const BlochModel& model, cd E0, int N) {
  return build_skin_modes(model, E0, N).front();
}

double eigen_residual(const TruncatedHamiltonian& H, const SkinMode& mode,
                      int n_lo, int n_hi) {
  const int guard = std::max(H.r, H.s);
  if (n_lo < 1 || n_hi > H.N - guard || n_lo > n_hi)
    throw std::invalid_argument(
        "eigen_residual: window must be non-empty and exclude the last "
        "max(r,s) sites");
  std::vector<cd> y(static_cast<size_t>(H.dim()));
  kernels::banded_matvec(H, mode.amplitudes.data(), y.data());
  double num = 0.0, den = 0.0;
  for (int n = n_lo; n <= n_hi; ++n)
    for (int b = 0; b < H.bands; ++b) {
      const size_t i = static_cast<size_t>((n - 1) * H.bands + b);
      num += std::norm(y[i] - mode.E0 * mode.amplitudes[i]);
      den += std::norm(mode.amplitudes[i]);
    }
  if (den == 0.0)
    throw std::runtime_error("eigen_residual: zero state on window");
  return std::sqrt(num / den);
}

}  // namespace nbloch
