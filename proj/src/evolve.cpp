#include "nbloch/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nbloch/kernels.hpp"

namespace nbloch {

double PotentialSpec::support_T() const {
  double T = 0.0;
  for (const auto& b : boxes) T = std::max(T, b.t_off);
  return T;
}

int PotentialSpec::support_L() const {
  int L = 0;
  for (const auto& b : boxes) L = std::max(L, b.n_max);
  return L;
}

cd potential_at(const PotentialSpec& spec, int n, int band, double t) {
  cd v(0.0, 0.0);
  for (const auto& b : spec.boxes) {
    if (n < b.n_min || n > b.n_max) continue;
    if (t < b.t_on || t >= b.t_off) continue;  // half-open in time
    if (!b.band_mask.empty() &&
        std::find(b.band_mask.begin(), b.band_mask.end(), band) ==
            b.band_mask.end())
      continue;
    v += b.value;
  }
  return v;
}

namespace {

// y += V(t) x restricted to the active boxes
void apply_potential(const PotentialSpec& spec, int bands, int N, double t,
                     const cd* x, cd* y) {
  for (const auto& box : spec.boxes) {
    if (t < box.t_on || t >= box.t_off) continue;
    const int lo = std::max(1, box.n_min), hi = std::min(N, box.n_max);
    for (int n = lo; n <= hi; ++n)
      for (int b = 0; b < bands; ++b) {
        if (!box.band_mask.empty() &&
            std::find(box.band_mask.begin(), box.band_mask.end(), b) ==
                box.band_mask.end())
          continue;
        const size_t i = static_cast<size_t>((n - 1) * bands + b);
        y[i] += box.value * x[i];
      }
  }
}

// k = -i ((H + V(t)) x)
void derivative(const TruncatedHamiltonian& H, const PotentialSpec& spec,
                double t, const cd* x, cd* k, cd* work) {
  kernels::banded_matvec(H, x, work);
  apply_potential(spec, H.bands, H.N, t, x, work);
  const size_t dim = static_cast<size_t>(H.dim());
  for (size_t i = 0; i < dim; ++i) k[i] = cd(0.0, -1.0) * work[i];
}

double max_potential_abs(const PotentialSpec& spec) {
  double m = 0.0;
  for (const auto& b : spec.boxes) m += std::abs(b.value);
  return m;
}

double hamiltonian_inf_norm(const TruncatedHamiltonian& H) {
  double total = 0.0;
  for (int l = -H.r; l <= H.s; ++l) {
    const cd* blk = H.block(l);
    double row_max = 0.0;
    for (int a = 0; a < H.bands; ++a) {
      double row = 0.0;
      for (int b = 0; b < H.bands; ++b) row += std::abs(blk[a * H.bands + b]);
      row_max = std::max(row_max, row);
    }
    total += row_max;
  }
  return total;
}

void rk4_step_ws(const TruncatedHamiltonian& H, const PotentialSpec& spec,
                 std::vector<cd>& psi, double t, double dt,
                 std::vector<std::vector<cd>>& ws) {
  const size_t dim = psi.size();
  auto& k1 = ws[0];
  auto& k2 = ws[1];
  auto& k3 = ws[2];
  auto& k4 = ws[3];
  auto& tmp = ws[4];
  auto& work = ws[5];

  derivative(H, spec, t, psi.data(), k1.data(), work.data());
  for (size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * dt * k1[i];
  derivative(H, spec, t + 0.5 * dt, tmp.data(), k2.data(), work.data());
  for (size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * dt * k2[i];
  derivative(H, spec, t + 0.5 * dt, tmp.data(), k3.data(), work.data());
  for (size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + dt * k3[i];
  derivative(H, spec, t + dt, tmp.data(), k4.data(), work.data());
  for (size_t i = 0; i < dim; ++i)
    psi[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

void rk4_step(const TruncatedHamiltonian& H, const PotentialSpec& spec,
              std::vector<cd>& psi, double t, double dt) {
  if (dt * (hamiltonian_inf_norm(H) + max_potential_abs(spec)) >= 1.0)
    throw std::invalid_argument("rk4_step: dt too large for stability");
  std::vector<std::vector<cd>> ws(6, std::vector<cd>(psi.size()));
  rk4_step_ws(H, spec, psi, t, dt, ws);
  for (cd a : psi)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw std::runtime_error("rk4_step: non-finite amplitude at t=" +
                               std::to_string(t));
}

EvolutionTrace evolve(const BlochModel& model, const std::vector<cd>& psi0,
                      const PotentialSpec& spec, const EvolutionParams& params,
                      std::optional<cd> E0) {
  const int bands = model.bands();
  const int N = params.N;
  const size_t dim = static_cast<size_t>(N) * bands;
  if (psi0.size() != dim)
    throw std::invalid_argument("evolve: psi0 length must be N*bands");

  TruncatedHamiltonian H = build_truncated(model, N, Boundary::open);
  if (params.dt * (hamiltonian_inf_norm(H) + max_potential_abs(spec)) >= 1.0)
    throw std::invalid_argument("evolve: dt too large for stability");

  const int guard = params.guard_band.value_or(
      10 * std::max(model.left_range(), model.right_range()));
  const int guard_lo = std::max(1, N - guard + 1);  // 1-based first guard site

  const int n_steps = static_cast<int>(std::llround(params.t_end / params.dt));
  const int stride =
      std::max(1, static_cast<int>(std::llround(params.record_stride_t / params.dt)));

  std::vector<cd> psi = psi0;     // scaled state: psi_true = e^{log_psi} psi
  double log_psi = 0.0;
  std::vector<cd> phi;            // co-integrated reference when E0 absent
  double log_phi_scale = 0.0;
  const bool analytic = E0.has_value();
  const double phi0_norm = std::sqrt(kernels::norm_sq(psi0.data(), dim));
  if (!analytic) phi = psi0;
  const PotentialSpec no_potential{};

  std::vector<std::vector<cd>> ws(6, std::vector<cd>(dim));
  std::vector<cd> xi(dim);

  // The finite truncation cannot represent edge contamination below the
  // initial state's own static tail at the guard band; the breach level
  // adapts to that floor so weakly confined modes get a meaningful guard.
  double tail0 = 0.0, peak0 = 0.0;
  for (int n = 1; n <= N; ++n) {
    double site = 0.0;
    for (int b = 0; b < bands; ++b)
      site += std::norm(psi0[static_cast<size_t>((n - 1) * bands + b)]);
    site = std::sqrt(site);
    peak0 = std::max(peak0, site);
    if (n >= guard_lo) tail0 = std::max(tail0, site);
  }
  const double guard_threshold =
      std::max(1e-8, peak0 > 0.0 ? 100.0 * tail0 / peak0 : 0.0);

  EvolutionTrace trace;
  trace.N = N;
  trace.bands = bands;

  auto record = [&](double t) {
    const double psi_nrm2 = kernels::norm_sq(psi.data(), dim);
    if (!std::isfinite(psi_nrm2) || psi_nrm2 == 0.0)
      throw std::runtime_error("evolve: state blow-up at t=" + std::to_string(t));

    double log_phi, phase_re = 1.0, phase_im = 0.0;
    const cd* phi_hat;
    if (analytic) {
      log_phi = E0->imag() * t + std::log(phi0_norm);
      const cd ph = std::polar(1.0, -E0->real() * t);
      phase_re = ph.real();
      phase_im = ph.imag();
      phi_hat = psi0.data();
    } else {
      log_phi = log_phi_scale + 0.5 * std::log(kernels::norm_sq(phi.data(), dim));
      phi_hat = phi.data();
    }
    // xi = psi - phi with both factored as e^{L} * hat-state; use the
    // common scale M = max so subtraction never overflows
    const double log_psi_t = log_psi + 0.5 * std::log(psi_nrm2);
    const double M = std::max(log_psi_t, log_phi);
    const double fp = std::exp(log_psi - M);
    double fr;  // e^{L_phi_state - M} where L_phi_state scales phi_hat
    if (analytic)
      fr = std::exp(log_phi - M - std::log(phi0_norm));
    else
      fr = std::exp(log_phi_scale - M);
    const cd phase = analytic ? cd(phase_re, phase_im) : cd(1.0, 0.0);
    for (size_t i = 0; i < dim; ++i)
      xi[i] = fp * psi[i] - fr * phase * phi_hat[i];
    const double xi_nrm2 = kernels::norm_sq(xi.data(), dim);

    TraceRow row;
    row.t = t;
    row.log_norm_sq = 2.0 * log_psi_t;
    row.eps = xi_nrm2 * std::exp(2.0 * (M - log_phi));
    row.log_xi_norm = xi_nrm2 > 0.0
                          ? M + 0.5 * std::log(xi_nrm2)
                          : -std::numeric_limits<double>::infinity();

    // Guard watches the scattered deviation, not the state itself: a weakly
    // decaying mode has a legitimate static tail at the edge, while any
    // xi amplitude arriving there signals reflection contamination.
    double guard_max = 0.0, all_max = 0.0;
    for (int n = 1; n <= N; ++n) {
      double site = 0.0, xsite = 0.0;
      for (int b = 0; b < bands; ++b) {
        const size_t i = static_cast<size_t>((n - 1) * bands + b);
        site += std::norm(fp * psi[i]);
        xsite += std::norm(xi[i]);
      }
      all_max = std::max(all_max, std::sqrt(site));
      if (n >= guard_lo) guard_max = std::max(guard_max, std::sqrt(xsite));
    }
    row.edge_guard = all_max > 0.0 ? guard_max / all_max : 0.0;
    if (trace.valid && row.edge_guard > guard_threshold) {
      trace.valid = false;
      trace.first_breach_t = t;
    }
    trace.rows.push_back(row);

    for (double ts : params.snapshot_times) {
      if (std::abs(ts - t) <= 0.5 * params.dt * stride &&
          trace.snapshots.find(ts) == trace.snapshots.end()) {
        std::vector<cd> snap(psi);
        const double s = 1.0 / std::sqrt(psi_nrm2);
        for (cd& a : snap) a *= s;
        trace.snapshots[ts] = std::move(snap);
        std::vector<cd> xs(xi);
        if (xi_nrm2 > 0.0) {
          const double sx = 1.0 / std::sqrt(xi_nrm2);
          for (cd& a : xs) a *= sx;
        }
        trace.xi_snapshots[ts] = std::move(xs);
      }
    }
  };

  record(0.0);
  for (int step = 0; step < n_steps; ++step) {
    const double t = step * params.dt;
    rk4_step_ws(H, spec, psi, t, params.dt, ws);
    if (!analytic) rk4_step_ws(H, no_potential, phi, t, params.dt, ws);

    // fold large/small norms into the accumulated log scale
    const double n2 = kernels::norm_sq(psi.data(), dim);
    if (n2 > 1e40 || (n2 > 0.0 && n2 < 1e-40)) {
      const double l = 0.5 * std::log(n2);
      kernels::scale(cd(std::exp(-l), 0.0), psi.data(), dim);
      log_psi += l;
    }
    if (!analytic) {
      const double p2 = kernels::norm_sq(phi.data(), dim);
      if (p2 > 1e40 || (p2 > 0.0 && p2 < 1e-40)) {
        const double l = 0.5 * std::log(p2);
        kernels::scale(cd(std::exp(-l), 0.0), phi.data(), dim);
        log_phi_scale += l;
      }
    }
    if ((step + 1) % stride == 0 || step + 1 == n_steps)
      record((step + 1) * params.dt);
  }
  return trace;
}

TailCheck deviation_tail_check(const EvolutionTrace& trace,
                               const BlochModel& model,
                               const PotentialSpec& spec, double T, double h) {
  auto it = trace.xi_snapshots.lower_bound(T - 1e-9);
  if (it == trace.xi_snapshots.end() || std::abs(it->first - T) > 1e-6)
    throw std::invalid_argument("deviation_tail_check: no snapshot at t=T");
  const auto& xi = it->second;
  const int bands = trace.bands, N = trace.N;

  double hop_max = 0.0;
  for (int l = -model.left_range(); l <= model.right_range(); ++l)
    hop_max = std::max(hop_max, model.hop_block(l).cwiseAbs().maxCoeff());
  const double v = 2.0 * std::max(model.left_range(), model.right_range()) * hop_max;
  const int n_start = static_cast<int>(std::ceil(spec.support_L() + v * T)) + 1;
  const int n_end = N - 10 * std::max(model.left_range(), model.right_range());

  double xi_max = 0.0;
  for (int n = 1; n <= N; ++n) {
    double site = 0.0;
    for (int b = 0; b < bands; ++b)
      site += std::norm(xi[static_cast<size_t>((n - 1) * bands + b)]);
    xi_max = std::max(xi_max, std::sqrt(site));
  }
  // the tail is only resolved down to roundoff of the integration; past the
  // first sub-floor site the profile is noise (and, further right, junk
  // radiated by the open edge), so the fit stops there
  const double floor = std::max(1e-290, 1e-13 * xi_max);

  TailCheck res;
  res.n_start = n_start;
  std::vector<std::pair<double, double>> pts;  // (n, log|xi_n|)
  for (int n = n_start; n <= n_end; ++n) {
    double site = 0.0;
    for (int b = 0; b < bands; ++b)
      site += std::norm(xi[static_cast<size_t>((n - 1) * bands + b)]);
    site = std::sqrt(site);
    if (site <= floor) break;
    pts.push_back({static_cast<double>(n), std::log(site)});
  }
  if (pts.size() < 5) {
    res.pass = true;
    res.vacuous = true;
    return res;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(pts.size());
  res.fitted_rate = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  res.pass = res.fitted_rate <= -h;
  return res;
}

double growth_rate(const std::vector<std::pair<double, double>>& series,
                   double t1, double t2) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (auto [t, v] : series) {
    if (t < t1 || t > t2 || v <= 0.0) continue;
    const double y = std::log(v);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++m;
  }
  if (m < 10)
    throw std::invalid_argument("growth_rate: fewer than 10 samples in window");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

Classification classify_healing(const EvolutionTrace& trace,
                                const ClassifierThresholds& th) {
  if (trace.rows.empty())
    throw std::invalid_argument("classify_healing: empty trace");
  Classification c;
  c.eps_max = 0.0;
  for (const auto& r : trace.rows) c.eps_max = std::max(c.eps_max, r.eps);
  c.eps_final = trace.rows.back().eps;

  if (c.eps_max < 1e-12) {
    c.verdict = ObservedVerdict::healed;
    c.healed_trivially = true;
    return c;
  }

  const double t_end = trace.rows.back().t;
  std::vector<std::pair<double, double>> series;
  for (const auto& r : trace.rows) series.push_back({r.t, r.eps});
  c.final_slope = growth_rate(series, t_end - th.slope_window, t_end);

  // A healed run's eps bottoms out at the truncation noise floor instead of
  // decaying forever, so "healed" asks for a deep drop without late regrowth
  // rather than a steep final slope.
  if (c.eps_final < th.eps_floor * c.eps_max && c.final_slope < th.slope_eta)
    c.verdict = ObservedVerdict::healed;
  else if (c.final_slope > th.slope_eta || c.eps_final > 0.3 * c.eps_max)
    c.verdict = ObservedVerdict::not_healed;
  else
    c.verdict = ObservedVerdict::inconclusive;
  return c;
}

}  // namespace nbloch
