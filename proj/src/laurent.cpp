#include "nbloch/laurent.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nbloch {

LaurentSymbol::LaurentSymbol(std::map<int, cd> coeffs, int r, int s)
    : coeffs_(std::move(coeffs)), r_(r), s_(s) {
  if (r_ < 1 || s_ < 1)
    throw std::invalid_argument("LaurentSymbol: r and s must be >= 1");
  for (const auto& [l, t] : coeffs_) {
    if (l < -r_ || l > s_)
      throw std::invalid_argument("LaurentSymbol: offset outside [-r, s]");
  }
  auto tight = [&](int l) {
    auto it = coeffs_.find(l);
    return it != coeffs_.end() && it->second != cd(0.0, 0.0);
  };
  if (!tight(-r_) || !tight(s_))
    throw std::invalid_argument("LaurentSymbol: t_{-r} and t_s must be nonzero");
}

LaurentSymbol LaurentSymbol::from_hops(const std::map<int, cd>& coeffs) {
  int r = 0, s = 0;
  for (const auto& [l, t] : coeffs) {
    if (t == cd(0.0, 0.0)) continue;
    r = std::max(r, -l);
    s = std::max(s, l);
  }
  std::map<int, cd> clean;
  for (const auto& [l, t] : coeffs)
    if (t != cd(0.0, 0.0)) clean[l] = t;
  return LaurentSymbol(std::move(clean), r, s);
}

cd LaurentSymbol::coeff(int l) const {
  auto it = coeffs_.find(l);
  return it == coeffs_.end() ? cd(0.0, 0.0) : it->second;
}

cd LaurentPoly::coeff(int l) const {
  if (l < lo_ || l > hi()) return cd(0.0, 0.0);
  return c_[static_cast<size_t>(l - lo_)];
}

LaurentPoly LaurentPoly::operator+(const LaurentPoly& o) const {
  int lo = std::min(lo_, o.lo_);
  int hi_ = std::max(hi(), o.hi());
  std::vector<cd> c(static_cast<size_t>(hi_ - lo + 1), cd(0.0, 0.0));
  for (int l = lo; l <= hi_; ++l)
    c[static_cast<size_t>(l - lo)] = coeff(l) + o.coeff(l);
  return LaurentPoly(lo, std::move(c));
}

LaurentPoly LaurentPoly::operator-(const LaurentPoly& o) const {
  int lo = std::min(lo_, o.lo_);
  int hi_ = std::max(hi(), o.hi());
  std::vector<cd> c(static_cast<size_t>(hi_ - lo + 1), cd(0.0, 0.0));
  for (int l = lo; l <= hi_; ++l)
    c[static_cast<size_t>(l - lo)] = coeff(l) - o.coeff(l);
  return LaurentPoly(lo, std::move(c));
}

LaurentPoly LaurentPoly::operator*(const LaurentPoly& o) const {
  int lo = lo_ + o.lo_;
  std::vector<cd> c(c_.size() + o.c_.size() - 1, cd(0.0, 0.0));
  for (size_t i = 0; i < c_.size(); ++i)
    for (size_t j = 0; j < o.c_.size(); ++j) c[i + j] += c_[i] * o.c_[j];
  return LaurentPoly(lo, std::move(c));
}

cd laurent_eval(const LaurentSymbol& symbol, cd beta) {
  if (beta == cd(0.0, 0.0))
    throw std::domain_error("laurent_eval: beta = 0 is a pole of order r");
  cd sum(0.0, 0.0);
  for (const auto& [l, t] : symbol.coeffs()) sum += t * std::pow(beta, l);
  return sum;
}

namespace {

double phase_0_2pi(cd z) {
  double a = std::arg(z);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

void sort_by_modulus(std::vector<cd>& roots) {
  std::sort(roots.begin(), roots.end(), [](cd a, cd b) {
    double ma = std::abs(a), mb = std::abs(b);
    if (std::abs(ma - mb) > 1e-12 * (ma + mb)) return ma < mb;
    return phase_0_2pi(a) < phase_0_2pi(b);
  });
}

std::vector<cd> poly_roots(const std::vector<cd>& coeffs) {
  const int d = static_cast<int>(coeffs.size()) - 1;
  if (d < 1) throw std::invalid_argument("poly_roots: degree must be >= 1");
  const cd lead = coeffs.back();
  if (lead == cd(0.0, 0.0))
    throw std::invalid_argument("poly_roots: zero leading coefficient");

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = cd(1.0, 0.0);
  for (int i = 0; i < d; ++i)
    companion(i, d - 1) = -coeffs[static_cast<size_t>(i)] / lead;

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("poly_roots: eigensolver did not converge");

  std::vector<cd> roots(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) roots[static_cast<size_t>(i)] = es.eigenvalues()(i);
  sort_by_modulus(roots);
  return roots;
}

std::vector<cd> monomial_coeffs(const LaurentPoly& poly, int pole) {
  if (poly.lo() < -pole)
    throw std::invalid_argument("monomial_coeffs: pole order too small");
  std::vector<cd> a(static_cast<size_t>(poly.hi() + pole + 1), cd(0.0, 0.0));
  for (int l = poly.lo(); l <= poly.hi(); ++l)
    a[static_cast<size_t>(l + pole)] = poly.coeff(l);
  return a;
}

RootSet char_roots(const LaurentSymbol& symbol, cd E) {
  const int r = symbol.r(), s = symbol.s();
  std::vector<cd> a(static_cast<size_t>(r + s + 1), cd(0.0, 0.0));
  for (const auto& [l, t] : symbol.coeffs()) a[static_cast<size_t>(l + r)] += t;
  a[static_cast<size_t>(r)] -= E;

  RootSet rs;
  rs.energy = E;
  rs.roots = poly_roots(a);
  for (size_t i = 0; i + 1 < rs.roots.size() && !rs.near_degenerate; ++i)
    for (size_t j = i + 1; j < rs.roots.size(); ++j)
      if (std::abs(rs.roots[i] - rs.roots[j]) < 1e-8) {
        rs.near_degenerate = true;
        break;
      }
  return rs;
}

cd modulus_rank(const RootSet& rs, int index) {
  if (index < 1 || index > static_cast<int>(rs.roots.size()))
    throw std::out_of_range("modulus_rank: index out of range");
  return rs.roots[static_cast<size_t>(index - 1)];
}

}  // namespace nbloch
