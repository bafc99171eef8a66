#pragma once

#include <map>
#include <optional>
#include <vector>

#include "nbloch/model.hpp"
#include "nbloch/skin.hpp"

namespace nbloch {

// On-site space-time obstacle: a sum of boxes, each active on sites
// [n_min, n_max] (1-based), a band subset, and times [t_on, t_off).
struct PotentialBox {
  int n_min = 1, n_max = 1;
  std::vector<int> band_mask;  // empty = all bands
  double t_on = 0.0, t_off = 0.0;
  cd value{};
};

struct PotentialSpec {
  std::vector<PotentialBox> boxes;
  double support_T() const;  // max t_off
  int support_L() const;     // max n_max
};

cd potential_at(const PotentialSpec& spec, int n, int band, double t);

struct EvolutionParams {
  int N = 300;
  double dt = 1e-3;
  double t_end = 20.0;
  std::vector<double> snapshot_times;
  double record_stride_t = 0.01;  // trace sampling interval
  std::optional<int> guard_band;  // default 10*max(r,s)
};

struct TraceRow {
  double t;
  double log_norm_sq;   // log ||psi(t)||^2
  double eps;           // ||xi||^2 / ||phi||^2
  double log_xi_norm;   // log ||xi(t)||, -inf if xi = 0
  double edge_guard;    // max |psi_n| over the guard band / max_n |psi_n|
};

struct EvolutionTrace {
  std::vector<TraceRow> rows;
  // normalized state snapshots (psi / ||psi||), keyed by requested time
  std::map<double, std::vector<cd>> snapshots;
  // normalized deviation xi / ||xi|| at snapshot times
  std::map<double, std::vector<cd>> xi_snapshots;
  bool valid = true;
  double first_breach_t = 0.0;
  int N = 0;
  int bands = 1;
};

// RK4 step of i dpsi/dt = (H + V(t)) psi; V sampled at t, t+dt/2, t+dt.
void rk4_step(const TruncatedHamiltonian& H, const PotentialSpec& spec,
              std::vector<cd>& psi, double t, double dt);

// Integrates i dpsi/dt = (H + V(t)) psi on the open truncation. When
// phi0/E0 are given the
// deviation is measured against the analytic reference phi0 e^{-i E0 t};
// otherwise a V = 0 run is co-integrated. Norm growth is absorbed into an
// accumulated log scale so eps stays exact at any Im(E0).
EvolutionTrace evolve(const BlochModel& model, const std::vector<cd>& psi0,
                      const PotentialSpec& spec, const EvolutionParams& params,
                      std::optional<cd> E0 = std::nullopt);

struct TailCheck {
  bool pass = false;
  bool vacuous = false;  // tail entirely below the floating-point floor
  double fitted_rate = 0.0;  // slope of log|xi_n| per site (negative = decay)
  int n_start = 0;
};

// Checks that the deviation tail beyond the ballistic cone L + v*T decays at
// least as fast as e^{-h n}.
TailCheck deviation_tail_check(const EvolutionTrace& trace,
                               const BlochModel& model,
                               const PotentialSpec& spec, double T, double h);

// Least-squares slope of log(value) vs t on [t1, t2]; needs >= 10 samples.
double growth_rate(const std::vector<std::pair<double, double>>& series,
                   double t1, double t2);

enum class ObservedVerdict { healed, not_healed, inconclusive };

struct ClassifierThresholds {
  double eps_floor = 1e-2;
  double slope_window = 5.0;  // fit log eps over [t_end - window, t_end]
  double slope_eta = 0.05;
};

struct Classification {
  ObservedVerdict verdict;
  bool healed_trivially = false;  // max eps below machine floor
  double eps_final = 0.0;
  double eps_max = 0.0;
  double final_slope = 0.0;
};

Classification classify_healing(const EvolutionTrace& trace,
                                const ClassifierThresholds& th = {});

}  // namespace nbloch
