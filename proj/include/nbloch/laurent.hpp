#pragma once

#include <complex>
#include <map>
#include <vector>

namespace nbloch {

using cd = std::complex<double>;

// Laurent symbol P(beta) = sum_{l=-r}^{s} t_l beta^l of a banded Toeplitz
// lattice. r and s are the largest left/right hopping orders and must be
// tight: t_{-r} != 0 and t_s != 0, with r, s >= 1.
class LaurentSymbol {
 public:
  LaurentSymbol(std::map<int, cd> coeffs, int r, int s);

  // Convenience: infer (r, s) from the outermost nonzero offsets.
  static LaurentSymbol from_hops(const std::map<int, cd>& coeffs);

  int r() const { return r_; }
  int s() const { return s_; }
  cd coeff(int l) const;
  const std::map<int, cd>& coeffs() const { return coeffs_; }

 private:
  std::map<int, cd> coeffs_;
  int r_;
  int s_;
};

// Roots of the characteristic polynomial beta^p (Q(beta) - ...) solved at a
// fixed complex energy, sorted by ascending modulus (ties by ascending phase
// in [0, 2pi)).
struct RootSet {
  std::vector<cd> roots;
  cd energy{};
  // set when two roots are closer than 1e-8; callers near GBZ/branch points
  // must handle this themselves
  bool near_degenerate = false;
};

// Dense Laurent polynomial on a contiguous offset window [lo, lo+len).
// Small helper used to assemble characteristic polynomials of block models.
class LaurentPoly {
 public:
  LaurentPoly() : lo_(0) {}
  explicit LaurentPoly(cd constant) : lo_(0), c_{constant} {}
  LaurentPoly(int lo, std::vector<cd> c) : lo_(lo), c_(std::move(c)) {}

  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(c_.size()) - 1; }
  cd coeff(int l) const;

  LaurentPoly operator+(const LaurentPoly& o) const;
  LaurentPoly operator-(const LaurentPoly& o) const;
  LaurentPoly operator*(const LaurentPoly& o) const;

 private:
  int lo_;
  std::vector<cd> c_;
};

cd laurent_eval(const LaurentSymbol& symbol, cd beta);

// All roots of the degree-(r+s) polynomial beta^r (P(beta) - E), via the
// companion matrix of the monic form.
RootSet char_roots(const LaurentSymbol& symbol, cd E);

// Roots of the polynomial sum_j a_j x^j (a.back() != 0), modulus-sorted.
std::vector<cd> poly_roots(const std::vector<cd>& coeffs);

// Monomial coefficients a_j of beta^{pole} * poly, poly given as Laurent.
// Throws if poly has terms below -pole.
std::vector<cd> monomial_coeffs(const LaurentPoly& poly, int pole);

// Stable modulus-then-phase ordering shared by every root consumer.
void sort_by_modulus(std::vector<cd>& roots);

// index is 1-based; returns the index-th root by ascending modulus.
cd modulus_rank(const RootSet& rs, int index);

}  // namespace nbloch
