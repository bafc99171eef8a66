#pragma once

#include <optional>
#include <vector>

#include "nbloch/model.hpp"

namespace nbloch {

struct PbcSample {
  double k;
  cd E;
  int band;
};

// PBC spectrum sampled on k in [-pi, pi); one branch-tracked loop per band.
struct PbcLoop {
  std::vector<PbcSample> samples;  // band-major, then ascending k
  int bands = 1;
  int samples_per_band = 0;
};

struct GbzPoint {
  cd beta;
  cd E;
};

// Generalized Brillouin zone: (beta, E) pairs where the pole_order-th and
// next characteristic roots tie in modulus.
struct GbzSet {
  std::vector<GbzPoint> points;
};

struct GridSpec {
  double re_min, re_max, im_min, im_max;
  int nx = 400, ny = 400;
  double tol = 1e-8;
};

struct ThresholdReport {
  double E_m1 = 0.0;
  std::optional<double> E_m2;
  double E_m = 0.0;
  bool bloch_points_present = false;
};

enum class SibcRegion { on_pbc_loop, skin_negative, interior_positive, exterior };

struct SibcClass {
  SibcRegion region;
  int winding = 0;
  int multiplicity = 0;  // |W| for skin_negative, else 0
};

enum class HealingVerdict { self_healing, not_self_healing, not_a_skin_mode };

struct HealingPrediction {
  HealingVerdict verdict;
  double margin = 0.0;  // Im(E0) - E_m
  bool indeterminate = false;
};

PbcLoop pbc_spectrum(const BlochModel& model, int K);

// W(E) by the argument principle on characteristic roots:
// W = #(|beta| < 1) - pole_order. Throws if E sits on the PBC loop
// (some root within 1e-8 of the unit circle).
int winding_roots(const BlochModel& model, cd E);

// W(E) by phase accumulation of det(H(e^{ik}) - E) over K steps.
// Throws if a single step jumps by more than pi/2 (refine K) or the
// accumulated phase misses an integer multiple of 2pi by more than 0.05.
int winding_integral(const BlochModel& model, cd E, int K);

// Doubles K until winding_integral accepts (K capped at k_max).
int winding_integral_adaptive(const BlochModel& model, cd E, int K0 = 256,
                              int k_max = 1 << 21);

// Level-set extraction of the modulus-tie locus on an E-plane grid, with
// bisection along grid edges down to grid.tol.
GbzSet obc_gbz_scan(const BlochModel& model, const GridSpec& grid,
                    int threads = 1);

SibcClass sibc_classify(const BlochModel& model, cd E);

// E_m1 from the GBZ, E_m2 from the positive-winding interior when the GBZ
// touches the unit circle, E_m = max of what is present.
ThresholdReport compute_threshold(const BlochModel& model, const GbzSet& gbz,
                                  const GridSpec& grid);

HealingPrediction predict_self_healing(const BlochModel& model, cd E0,
                                       const ThresholdReport& threshold);

// Bounding box of the PBC loop inflated by 10% per side.
GridSpec default_grid(const BlochModel& model, int resolution = 400,
                      double tol = 1e-8);

}  // namespace nbloch
