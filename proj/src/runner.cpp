#include "nbloch/runner.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "nbloch/spectra.hpp"

namespace nbloch {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

namespace {

GridSpec make_grid(const BlochModel& model, const RunConfig& cfg) {
  if (cfg.scan_box) {
    GridSpec g;
    g.re_min = (*cfg.scan_box)[0];
    g.re_max = (*cfg.scan_box)[1];
    g.im_min = (*cfg.scan_box)[2];
    g.im_max = (*cfg.scan_box)[3];
    g.nx = cfg.scan_resolution;
    g.ny = cfg.scan_resolution;
    g.tol = cfg.scan_tol;
    return g;
  }
  return default_grid(model, cfg.scan_resolution, cfg.scan_tol);
}

std::string verdict_str(HealingVerdict v) {
  switch (v) {
    case HealingVerdict::self_healing:
      return "self_healing";
    case HealingVerdict::not_self_healing:
      return "not_self_healing";
    default:
      return "not_a_skin_mode";
  }
}

std::string observed_str(ObservedVerdict v) {
  switch (v) {
    case ObservedVerdict::healed:
      return "healed";
    case ObservedVerdict::not_healed:
      return "not_healed";
    default:
      return "inconclusive";
  }
}

json threshold_json(const ThresholdReport& rep) {
  json j;
  j["E_m1"] = rep.E_m1;
  if (rep.E_m2) j["E_m2"] = *rep.E_m2;
  j["E_m"] = rep.E_m;
  j["bloch_points_present"] = rep.bloch_points_present;
  return j;
}

void write_pbc_csv(const std::string& path, const PbcLoop& loop) {
  std::string out = "k,ReE,ImE,band\n";
  for (const auto& s : loop.samples)
    out += fmt_g17(s.k) + "," + fmt_g17(s.E.real()) + "," +
           fmt_g17(s.E.imag()) + "," + std::to_string(s.band) + "\n";
  atomic_write(path, out);
}

void write_gbz_csv(const std::string& path, const GbzSet& gbz) {
  std::string out = "Rebeta,Imbeta,ReE,ImE\n";
  for (const auto& p : gbz.points)
    out += fmt_g17(p.beta.real()) + "," + fmt_g17(p.beta.imag()) + "," +
           fmt_g17(p.E.real()) + "," + fmt_g17(p.E.imag()) + "\n";
  atomic_write(path, out);
}

void write_mode_csv(const std::string& path, const SkinMode& mode) {
  std::string out = "n,band,Repsi,Impsi\n";
  const int N = static_cast<int>(mode.amplitudes.size()) / mode.bands;
  for (int n = 1; n <= N; ++n)
    for (int b = 0; b < mode.bands; ++b) {
      const cd a = mode.amplitudes[static_cast<size_t>((n - 1) * mode.bands + b)];
      out += std::to_string(n) + "," + std::to_string(b) + "," +
             fmt_g17(a.real()) + "," + fmt_g17(a.imag()) + "\n";
    }
  atomic_write(path, out);
}

void write_trace_csv(const std::string& path, const EvolutionTrace& trace) {
  std::string out = "t,norm_sq_log,eps,xi_norm_log,edge_guard\n";
  for (const auto& r : trace.rows)
    out += fmt_g17(r.t) + "," + fmt_g17(r.log_norm_sq) + "," + fmt_g17(r.eps) +
           "," + fmt_g17(r.log_xi_norm) + "," + fmt_g17(r.edge_guard) + "\n";
  atomic_write(path, out);
}

void write_snapshots_csv(const std::string& path, const EvolutionTrace& trace) {
  std::string out = "t,n,band,Repsi,Impsi\n";
  for (const auto& [t, snap] : trace.snapshots) {
    const int N = static_cast<int>(snap.size()) / trace.bands;
    for (int n = 1; n <= N; ++n)
      for (int b = 0; b < trace.bands; ++b) {
        const cd a = snap[static_cast<size_t>((n - 1) * trace.bands + b)];
        out += fmt_g17(t) + "," + std::to_string(n) + "," + std::to_string(b) +
               "," + fmt_g17(a.real()) + "," + fmt_g17(a.imag()) + "\n";
      }
  }
  atomic_write(path, out);
}

EvolutionParams make_params(const RunConfig& cfg, const RunOverrides& ov) {
  EvolutionParams p;
  p.N = cfg.N;
  p.dt = ov.dt.value_or(cfg.dt);
  p.t_end = ov.t_end.value_or(cfg.t_end);
  p.snapshot_times = cfg.snapshot_times;
  if (cfg.guard_band >= 0) p.guard_band = cfg.guard_band;
  return p;
}

cd require_E0(const RunConfig& cfg) {
  if (!cfg.E0)
    throw std::invalid_argument("this subcommand needs initial.E0 in the config");
  return *cfg.E0;
}

void run_one(const std::string& name, const RunConfig& cfg,
             const fs::path& out, const RunOverrides& ov) {
  auto model = make_model(cfg.model);

  if (name == "spectrum") {
    write_pbc_csv((out / "pbc.csv").string(), pbc_spectrum(*model, 1024));
  } else if (name == "gbz") {
    write_gbz_csv((out / "gbz.csv").string(),
                  obc_gbz_scan(*model, make_grid(*model, cfg), ov.threads));
  } else if (name == "winding-map") {
    const GridSpec g = make_grid(*model, cfg);
    const double dx = (g.re_max - g.re_min) / g.nx;
    const double dy = (g.im_max - g.im_min) / g.ny;
    std::string csv = "ReE,ImE,W\n";
    for (int iy = 0; iy <= g.ny; ++iy)
      for (int ix = 0; ix <= g.nx; ++ix) {
        const cd E(g.re_min + ix * dx, g.im_min + iy * dy);
        try {
          const int W = winding_roots(*model, E);
          csv += fmt_g17(E.real()) + "," + fmt_g17(E.imag()) + "," +
                 std::to_string(W) + "\n";
        } catch (const std::domain_error&) {
          // on the PBC loop: winding undefined, row omitted
        }
      }
    atomic_write((out / "winding.csv").string(), csv);
  } else if (name == "threshold") {
    const GridSpec g = make_grid(*model, cfg);
    const GbzSet gbz = obc_gbz_scan(*model, g, ov.threads);
    const ThresholdReport rep = compute_threshold(*model, gbz, g);
    atomic_write((out / "threshold.json").string(),
                 threshold_json(rep).dump(2) + "\n");
  } else if (name == "skin-mode") {
    const cd E0 = require_E0(cfg);
    const auto modes = build_skin_modes(*model, E0, cfg.N);
    write_mode_csv((out / "mode.csv").string(), modes[0]);
    for (size_t m = 1; m < modes.size(); ++m)
      write_mode_csv((out / ("mode_" + std::to_string(m + 1) + ".csv")).string(),
                     modes[m]);
    json j;
    j["E0"] = {E0.real(), E0.imag()};
    j["W"] = modes[0].winding;
    j["multiplicity"] = modes.size();
    j["residual"] = modes[0].residual;
    json roots = json::array();
    for (cd b : modes[0].roots_used) roots.push_back({b.real(), b.imag()});
    j["roots"] = roots;
    atomic_write((out / "mode.json").string(), j.dump(2) + "\n");
  } else if (name == "evolve") {
    const cd E0 = require_E0(cfg);
    const SkinMode mode = build_skin_mode(*model, E0, cfg.N);
    PotentialSpec spec{cfg.potential};
    const EvolutionTrace trace =
        evolve(*model, mode.amplitudes, spec, make_params(cfg, ov), E0);
    write_trace_csv((out / "trace.csv").string(), trace);
    write_snapshots_csv((out / "snapshots.csv").string(), trace);
  } else if (name == "heal-test") {
    const cd E0 = require_E0(cfg);
    const GridSpec g = make_grid(*model, cfg);
    const GbzSet gbz = obc_gbz_scan(*model, g, ov.threads);
    const ThresholdReport rep = compute_threshold(*model, gbz, g);
    atomic_write((out / "threshold.json").string(),
                 threshold_json(rep).dump(2) + "\n");
    const HealingPrediction pred = predict_self_healing(*model, E0, rep);

    const SkinMode mode = build_skin_mode(*model, E0, cfg.N);
    PotentialSpec spec{cfg.potential};
    const EvolutionTrace trace =
        evolve(*model, mode.amplitudes, spec, make_params(cfg, ov), E0);
    write_trace_csv((out / "trace.csv").string(), trace);
    const Classification cls = classify_healing(trace);

    json j;
    j["predicted"] = verdict_str(pred.verdict);
    j["predicted_indeterminate"] = pred.indeterminate;
    j["observed"] = observed_str(cls.verdict);
    j["margin"] = pred.margin;
    j["run_valid"] = trace.valid;
    j["eps_final"] = cls.eps_final;
    j["eps_max"] = cls.eps_max;
    j["E_m"] = rep.E_m;
    atomic_write((out / "verdict.json").string(), j.dump(2) + "\n");
  } else {
    throw std::invalid_argument("unknown subcommand: " + name);
  }
}

}  // namespace

int run_subcommand(const std::string& name, const RunConfig& cfg,
                   const std::string& out_dir, const RunOverrides& ov) {
  const fs::path out(out_dir);
  fs::create_directories(out);
  try {
    run_one(name, cfg, out, ov);
    return 0;
  } catch (const std::exception& e) {
    json j;
    j["subcommand"] = name;
    j["error"] = e.what();
    try {
      atomic_write((out / "error.json").string(), j.dump(2) + "\n");
    } catch (...) {
    }
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace nbloch
