#pragma once

#include <string>
#include <vector>

#include "nbloch/model.hpp"

namespace nbloch {

// Left-edge SIBC eigenstate at energy E0 with W(E0) < 0, assembled from the
// characteristic roots with |beta| > 1.
struct SkinMode {
  cd E0;
  int bands = 1;
  int winding = 0;
  std::vector<cd> roots_used;    // |beta| > 1, modulus-sorted
  std::vector<cd> coefficients;  // one per root (times nullvector for blocks)
  std::vector<cd> amplitudes;    // sites 1..N, bands components per site
  std::string normalization = "unit-norm, first significant amplitude real-positive";
  double residual = 0.0;  // certified on the interior window at build time
};

// All |W(E0)| independent modes, orthonormalized. Throws when W(E0) >= 0
// (not a skin energy), when decaying roots are modulus-degenerate, or when
// the boundary-constraint nullspace has unexpected dimension.
std::vector<SkinMode> build_skin_modes(const BlochModel& model, cd E0, int N);

SkinMode build_skin_mode(const BlochModel& model, cd E0, int N);

// ||(H psi - E0 psi)|window|| / ||psi|window||, 1-based site window
// [n_lo, n_hi]; the window must exclude the last max(r,s) sites (right-edge
// truncation rows) while left boundary rows are legitimate.
double eigen_residual(const TruncatedHamiltonian& H, const SkinMode& mode,
                      int n_lo, int n_hi);

}  // namespace nbloch
