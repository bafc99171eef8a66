#include "nbloch/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace nbloch {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitCircleTol = 1e-8;

cd det_bloch(const BlochModel& model, cd beta, cd E) {
  Eigen::MatrixXcd H = model.bloch_matrix(beta);
  for (int i = 0; i < H.rows(); ++i) H(i, i) -= E;
  if (H.rows() == 1) return H(0, 0);
  if (H.rows() == 2) return H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
  return H.determinant();
}

}  // namespace

PbcLoop pbc_spectrum(const BlochModel& model, int K) {
  if (K < 64) throw std::invalid_argument("pbc_spectrum: K must be >= 64");
  const int bands = model.bands();
  PbcLoop loop;
  loop.bands = bands;
  loop.samples_per_band = K;
  loop.samples.resize(static_cast<size_t>(bands) * K);

  std::vector<cd> prev(static_cast<size_t>(bands));
  for (int j = 0; j < K; ++j) {
    const double k = -kPi + 2.0 * kPi * j / K;
    const cd beta = std::polar(1.0, k);
    std::vector<cd> eigs(static_cast<size_t>(bands));
    if (bands == 1) {
      eigs[0] = model.bloch_matrix(beta)(0, 0);
    } else {
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(model.bloch_matrix(beta),
                                                     false);
      for (int b = 0; b < bands; ++b) eigs[static_cast<size_t>(b)] = es.eigenvalues()(b);
      if (j == 0) {
        std::sort(eigs.begin(), eigs.end(), [](cd a, cd b) {
          if (a.real() != b.real()) return a.real() < b.real();
          return a.imag() < b.imag();
        });
      } else {
        // continuity-based branch tracking: greedy nearest match to the
        // previous k sample
        std::vector<cd> matched(eigs.size());
        std::vector<bool> used(eigs.size(), false);
        for (size_t b = 0; b < prev.size(); ++b) {
          size_t best = 0;
          double best_d = std::numeric_limits<double>::infinity();
          for (size_t i = 0; i < eigs.size(); ++i) {
            if (used[i]) continue;
            double d = std::abs(eigs[i] - prev[b]);
            if (d < best_d) {
              best_d = d;
              best = i;
            }
          }
          used[best] = true;
          matched[b] = eigs[best];
        }
        eigs = matched;
      }
    }
    prev = eigs;
    for (int b = 0; b < bands; ++b)
      loop.samples[static_cast<size_t>(b) * K + j] = {k, eigs[static_cast<size_t>(b)], b};
  }
  return loop;
}

int winding_roots(const BlochModel& model, cd E) {
  RootSet rs = model.char_roots(E);
  int n_in = 0;
  for (cd beta : rs.roots) {
    const double m = std::abs(beta);
    if (std::abs(m - 1.0) < kUnitCircleTol)
      throw std::domain_error(
          "winding_roots: E on the PBC loop, winding undefined");
    if (m < 1.0) ++n_in;
  }
  return n_in - model.pole_order();
}

int winding_integral(const BlochModel& model, cd E, int K) {
  if (K < 256) throw std::invalid_argument("winding_integral: K must be >= 256");
  double total = 0.0;
  cd prev = det_bloch(model, std::polar(1.0, -kPi), E);
  for (int j = 1; j <= K; ++j) {
    const double k = -kPi + 2.0 * kPi * j / K;
    const cd cur = det_bloch(model, std::polar(1.0, k), E);
    const double step = std::arg(cur / prev);
    if (std::abs(step) > kPi / 2.0)
      throw std::runtime_error("winding_integral: phase step > pi/2, refine K");
    total += step;
    prev = cur;
  }
  const double w = total / (2.0 * kPi);
  const double rounded = std::round(w);
  if (std::abs(w - rounded) > 0.05)
    throw std::runtime_error("winding_integral: residual from integer > 0.05");
  return static_cast<int>(rounded);
}

int winding_integral_adaptive(const BlochModel& model, cd E, int K0, int k_max) {
  for (int K = std::max(K0, 256); K <= k_max; K *= 2) {
    try {
      return winding_integral(model, E, K);
    } catch (const std::runtime_error&) {
      if (K * 2 > k_max) throw;
    }
  }
  throw std::runtime_error("winding_integral_adaptive: K cap exceeded");
}

namespace {

struct TrackedPair {
  cd b1, b2;  // b1 the smaller-modulus root at the anchor point
};

// nearest-root matching; the two labels always map to distinct roots
TrackedPair match_pair(const std::vector<cd>& roots, const TrackedPair& ref) {
  size_t i1 = 0, i2 = 0;
  double d1 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < roots.size(); ++i) {
    double d = std::abs(roots[i] - ref.b1);
    if (d < d1) {
      d1 = d;
      i1 = i;
    }
  }
  double d2 = std::numeric_limits<double>::infinity();
  bool found = false;
  for (size_t i = 0; i < roots.size(); ++i) {
    if (i == i1) continue;
    double d = std::abs(roots[i] - ref.b2);
    if (d < d2) {
      d2 = d;
      i2 = i;
      found = true;
    }
  }
  if (!found) return {roots[i1], roots[i1]};
  return {roots[i1], roots[i2]};
}

double pair_gap(const TrackedPair& p) { return std::abs(p.b1) - std::abs(p.b2); }

// Bisection along the segment [Ea, Eb] for the modulus crossing of the pair
// that is middle-ranked at Ea. Returns the tie point, or nullopt if the
// endpoints do not bracket a swap.
std::optional<std::pair<cd, TrackedPair>> bisect_edge(const BlochModel& model,
                                                      cd Ea, cd Eb,
                                                      const std::vector<cd>& roots_a,
                                                      const std::vector<cd>& roots_b,
                                                      double tol) {
  const int p = model.pole_order();
  TrackedPair lo{roots_a[static_cast<size_t>(p - 1)], roots_a[static_cast<size_t>(p)]};
  if (pair_gap(lo) > 0.0) return std::nullopt;  // sorted, expect <= 0
  TrackedPair at_b = match_pair(roots_b, lo);
  if (pair_gap(at_b) <= 0.0) return std::nullopt;  // no swap along the edge

  double t_lo = 0.0, t_hi = 1.0;
  while (std::abs(Eb - Ea) * (t_hi - t_lo) > tol) {
    const double t_mid = 0.5 * (t_lo + t_hi);
    const cd Em = Ea + (Eb - Ea) * t_mid;
    RootSet rs = model.char_roots(Em);
    TrackedPair mid = match_pair(rs.roots, lo);
    if (pair_gap(mid) <= 0.0) {
      t_lo = t_mid;
      lo = mid;
    } else {
      t_hi = t_mid;
    }
  }
  const double t_mid = 0.5 * (t_lo + t_hi);
  const cd Em = Ea + (Eb - Ea) * t_mid;
  RootSet rs = model.char_roots(Em);
  TrackedPair tie = match_pair(rs.roots, lo);
  // reject spurious detections where the tracked pair never actually ties
  const double m1 = std::abs(tie.b1), m2 = std::abs(tie.b2);
  if (std::abs(m1 - m2) > 1e-4 * (m1 + m2)) return std::nullopt;
  return std::make_pair(Em, tie);
}

double phase_0_2pi(cd z) {
  double a = std::arg(z);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2 * threads) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

GbzSet obc_gbz_scan(const BlochModel& model, const GridSpec& grid, int threads) {
  const int nx = grid.nx, ny = grid.ny;
  if (nx < 2 || ny < 2) throw std::invalid_argument("obc_gbz_scan: grid too coarse");
  const double dx = (grid.re_max - grid.re_min) / nx;
  const double dy = (grid.im_max - grid.im_min) / ny;

  const int n_nodes = (nx + 1) * (ny + 1);
  std::vector<std::vector<cd>> node_roots(static_cast<size_t>(n_nodes));
  auto node_E = [&](int ix, int iy) {
    return cd(grid.re_min + ix * dx, grid.im_min + iy * dy);
  };
  parallel_for(n_nodes, threads, [&](int idx) {
    const int ix = idx % (nx + 1), iy = idx / (nx + 1);
    node_roots[static_cast<size_t>(idx)] = model.char_roots(node_E(ix, iy)).roots;
  });

  // edges: (ix,iy)->(ix+1,iy) then (ix,iy)->(ix,iy+1)
  struct Edge {
    int a, b;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(2 * n_nodes));
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix) {
      const int a = iy * (nx + 1) + ix;
      if (ix < nx) edges.push_back({a, a + 1});
      if (iy < ny) edges.push_back({a, a + nx + 1});
    }

  std::vector<std::vector<GbzPoint>> hits(edges.size());
  parallel_for(static_cast<int>(edges.size()), threads, [&](int e) {
    const auto& ed = edges[static_cast<size_t>(e)];
    const int ax = ed.a % (nx + 1), ay = ed.a / (nx + 1);
    const int bx = ed.b % (nx + 1), by = ed.b / (nx + 1);
    auto res = bisect_edge(model, node_E(ax, ay), node_E(bx, by),
                           node_roots[static_cast<size_t>(ed.a)],
                           node_roots[static_cast<size_t>(ed.b)], grid.tol);
    if (res) {
      hits[static_cast<size_t>(e)].push_back({res->second.b1, res->first});
      hits[static_cast<size_t>(e)].push_back({res->second.b2, res->first});
    }
  });

  GbzSet gbz;
  for (const auto& h : hits)
    gbz.points.insert(gbz.points.end(), h.begin(), h.end());
  if (gbz.points.empty()) {
    double g_min = std::numeric_limits<double>::infinity();
    double g_max = 0.0;
    const int p = model.pole_order();
    for (const auto& roots : node_roots) {
      const double g = std::abs(roots[static_cast<size_t>(p)]) -
                       std::abs(roots[static_cast<size_t>(p - 1)]);
      g_min = std::min(g_min, g);
      g_max = std::max(g_max, g);
    }
    throw std::runtime_error(
        "obc_gbz_scan: no GBZ points found; modulus-gap field range [" +
        std::to_string(g_min) + ", " + std::to_string(g_max) + "]");
  }
  std::sort(gbz.points.begin(), gbz.points.end(),
            [](const GbzPoint& a, const GbzPoint& b) {
              if (a.E.real() != b.E.real()) return a.E.real() < b.E.real();
              if (a.E.imag() != b.E.imag()) return a.E.imag() < b.E.imag();
              return phase_0_2pi(a.beta) < phase_0_2pi(b.beta);
            });
  return gbz;
}

SibcClass sibc_classify(const BlochModel& model, cd E) {
  int W;
  try {
    W = winding_roots(model, E);
  } catch (const std::domain_error&) {
    return {SibcRegion::on_pbc_loop, 0, 0};
  }
  if (W < 0) return {SibcRegion::skin_negative, W, -W};
  if (W > 0) return {SibcRegion::interior_positive, W, 0};
  return {SibcRegion::exterior, 0, 0};
}

ThresholdReport compute_threshold(const BlochModel& model, const GbzSet& gbz,
                                  const GridSpec& grid) {
  if (gbz.points.empty())
    throw std::invalid_argument("compute_threshold: empty GBZ");
  ThresholdReport rep;
  rep.E_m1 = -std::numeric_limits<double>::infinity();
  double min_mod = std::numeric_limits<double>::infinity();
  for (const auto& p : gbz.points) {
    rep.E_m1 = std::max(rep.E_m1, p.E.imag());
    min_mod = std::min(min_mod, std::abs(p.beta));
  }
  rep.bloch_points_present = (min_mod <= 1.0 + 1e-6);
  rep.E_m = rep.E_m1;
  if (rep.bloch_points_present) {
    double em2 = -std::numeric_limits<double>::infinity();
    bool any = false;
    const double dx = (grid.re_max - grid.re_min) / grid.nx;
    const double dy = (grid.im_max - grid.im_min) / grid.ny;
    for (int iy = 0; iy <= grid.ny; ++iy)
      for (int ix = 0; ix <= grid.nx; ++ix) {
        const cd E(grid.re_min + ix * dx, grid.im_min + iy * dy);
        try {
          if (winding_roots(model, E) > 0) {
            em2 = std::max(em2, E.imag());
            any = true;
          }
        } catch (const std::domain_error&) {
          // E on the loop; skip
        }
      }
    if (any) {
      rep.E_m2 = em2;
      rep.E_m = std::max(rep.E_m1, em2);
    }
  }
  return rep;
}

HealingPrediction predict_self_healing(const BlochModel& model, cd E0,
                                       const ThresholdReport& threshold) {
  int W;
  try {
    W = winding_roots(model, E0);
  } catch (const std::domain_error&) {
    return {HealingVerdict::not_a_skin_mode, 0.0, false};
  }
  if (W >= 0) return {HealingVerdict::not_a_skin_mode, 0.0, false};
  const double margin = E0.imag() - threshold.E_m;
  HealingPrediction pred;
  pred.margin = margin;
  // E_m accuracy is limited by GBZ arc sampling, ~grid-cell scale
  pred.indeterminate = std::abs(margin) < 1e-3;
  pred.verdict = margin > 0.0 ? HealingVerdict::self_healing
                              : HealingVerdict::not_self_healing;
  return pred;
}

GridSpec default_grid(const BlochModel& model, int resolution, double tol) {
  PbcLoop loop = pbc_spectrum(model, 1024);
  double re_min = std::numeric_limits<double>::infinity(), re_max = -re_min;
  double im_min = re_min, im_max = -re_min;
  for (const auto& s : loop.samples) {
    re_min = std::min(re_min, s.E.real());
    re_max = std::max(re_max, s.E.real());
    im_min = std::min(im_min, s.E.imag());
    im_max = std::max(im_max, s.E.imag());
  }
  const double wx = std::max(re_max - re_min, 1e-6);
  const double wy = std::max(im_max - im_min, 1e-6);
  GridSpec g;
  g.re_min = re_min - 0.1 * wx;
  g.re_max = re_max + 0.1 * wx;
  g.im_min = im_min - 0.1 * wy;
  g.im_max = im_max + 0.1 * wy;
  g.nx = resolution;
  g.ny = resolution;
  g.tol = tol;
  return g;
}

}  // namespace nbloch
