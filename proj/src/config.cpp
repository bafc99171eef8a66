#include "nbloch/config.hpp"

#include <json.hpp>

#include <stdexcept>

namespace nbloch {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw std::invalid_argument("config: " + path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) fail(path + "." + it.key(), "unknown key");
  }
}

cd parse_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(path, "complex values are [re, im] pairs");
  return cd(j[0].get<double>(), j[1].get<double>());
}

json emit_complex(cd z) { return json::array({z.real(), z.imag()}); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("$", "top level must be an object");
  check_keys(j, "$", {"model", "lattice", "integrate", "initial", "potential", "scan"});

  RunConfig cfg;

  if (!j.contains("model")) fail("$.model", "required");
  const json& jm = j["model"];
  check_keys(jm, "$.model",
             {"type", "hops", "t1", "delta_a", "delta_b", "t0", "V"});
  const std::string type = jm.at("type").get<std::string>();
  if (type == "single_band") {
    cfg.model.kind = ModelConfig::Kind::single_band;
    if (!jm.contains("hops")) fail("$.model.hops", "required for single_band");
    for (const auto& h : jm["hops"]) {
      if (!h.is_array() || h.size() != 2) fail("$.model.hops", "entries are [l, [re, im]]");
      const int l = h[0].get<int>();
      if (cfg.model.hops.count(l)) fail("$.model.hops", "duplicate offset " + std::to_string(l));
      const cd t = parse_complex(h[1], "$.model.hops");
      if (t == cd(0.0, 0.0))
        fail("$.model.hops", "zero amplitude at declared offset " +
                                 std::to_string(l) + " violates tightness");
      cfg.model.hops[l] = t;
    }
  } else if (type == "two_chain") {
    cfg.model.kind = ModelConfig::Kind::two_chain;
    for (const char* k : {"t1", "delta_a", "delta_b", "t0", "V"})
      if (!jm.contains(k)) fail(std::string("$.model.") + k, "required for two_chain");
    cfg.model.t1 = jm["t1"].get<double>();
    cfg.model.delta_a = jm["delta_a"].get<double>();
    cfg.model.delta_b = jm["delta_b"].get<double>();
    cfg.model.t0 = jm["t0"].get<double>();
    cfg.model.V = jm["V"].get<double>();
  } else {
    fail("$.model.type", "must be 'single_band' or 'two_chain'");
  }

  // validates symbol tightness / hop ranges
  auto model = make_model(cfg.model);

  if (j.contains("lattice")) {
    const json& jl = j["lattice"];
    check_keys(jl, "$.lattice", {"N", "guard_band"});
    if (jl.contains("N")) cfg.N = jl["N"].get<int>();
    if (jl.contains("guard_band")) cfg.guard_band = jl["guard_band"].get<int>();
  }
  const int reach = std::max(model->left_range(), model->right_range());
  if (cfg.N <= 2 * reach) fail("$.lattice.N", "N must exceed 2*max(r,s)");

  if (j.contains("integrate")) {
    const json& ji = j["integrate"];
    check_keys(ji, "$.integrate", {"dt", "t_end", "snapshot_times"});
    if (ji.contains("dt")) cfg.dt = ji["dt"].get<double>();
    if (ji.contains("t_end")) cfg.t_end = ji["t_end"].get<double>();
    if (ji.contains("snapshot_times"))
      for (const auto& t : ji["snapshot_times"])
        cfg.snapshot_times.push_back(t.get<double>());
    if (cfg.dt <= 0.0) fail("$.integrate.dt", "must be positive");
  }

  if (j.contains("initial")) {
    const json& jin = j["initial"];
    check_keys(jin, "$.initial", {"type", "E0"});
    if (jin.at("type").get<std::string>() != "skin_mode")
      fail("$.initial.type", "only 'skin_mode' is supported");
    cfg.E0 = parse_complex(jin.at("E0"), "$.initial.E0");
  }

  if (j.contains("potential")) {
    int bi = 0;
    for (const auto& jb : j["potential"]) {
      const std::string path = "$.potential[" + std::to_string(bi++) + "]";
      check_keys(jb, path, {"n_min", "n_max", "band_mask", "t_on", "t_off", "value"});
      PotentialBox box;
      box.n_min = jb.at("n_min").get<int>();
      box.n_max = jb.at("n_max").get<int>();
      box.t_on = jb.at("t_on").get<double>();
      box.t_off = jb.at("t_off").get<double>();
      box.value = parse_complex(jb.at("value"), path + ".value");
      if (jb.contains("band_mask"))
        for (const auto& b : jb["band_mask"]) {
          const int band = b.get<int>();
          if (band < 0 || band >= model->bands())
            fail(path + ".band_mask", "band index out of range");
          box.band_mask.push_back(band);
        }
      if (box.n_min < 1 || box.n_max < box.n_min)
        fail(path, "need 1 <= n_min <= n_max");
      if (box.t_off < box.t_on) fail(path, "need t_on <= t_off");
      cfg.potential.push_back(std::move(box));
    }
  }

  if (j.contains("scan")) {
    const json& js = j["scan"];
    check_keys(js, "$.scan", {"box", "resolution", "tol"});
    if (js.contains("box")) {
      const json& jb = js["box"];
      if (!jb.is_array() || jb.size() != 4)
        fail("$.scan.box", "must be [re_min, re_max, im_min, im_max]");
      cfg.scan_box = {jb[0].get<double>(), jb[1].get<double>(),
                      jb[2].get<double>(), jb[3].get<double>()};
    }
    if (js.contains("resolution")) cfg.scan_resolution = js["resolution"].get<int>();
    if (js.contains("tol")) cfg.scan_tol = js["tol"].get<double>();
    if (cfg.scan_resolution < 2) fail("$.scan.resolution", "must be >= 2");
  }

  return cfg;
}

std::string emit_config(const RunConfig& cfg) {
  json j;
  json jm;
  if (cfg.model.kind == ModelConfig::Kind::single_band) {
    jm["type"] = "single_band";
    json hops = json::array();
    for (const auto& [l, t] : cfg.model.hops)
      hops.push_back(json::array({l, emit_complex(t)}));
    jm["hops"] = hops;
  } else {
    jm["type"] = "two_chain";
    jm["t1"] = cfg.model.t1;
    jm["delta_a"] = cfg.model.delta_a;
    jm["delta_b"] = cfg.model.delta_b;
    jm["t0"] = cfg.model.t0;
    jm["V"] = cfg.model.V;
  }
  j["model"] = jm;
  j["lattice"] = {{"N", cfg.N}, {"guard_band", cfg.guard_band}};
  j["integrate"] = {{"dt", cfg.dt},
                    {"t_end", cfg.t_end},
                    {"snapshot_times", cfg.snapshot_times}};
  if (cfg.E0)
    j["initial"] = {{"type", "skin_mode"}, {"E0", emit_complex(*cfg.E0)}};
  json pots = json::array();
  for (const auto& b : cfg.potential) {
    json jb = {{"n_min", b.n_min}, {"n_max", b.n_max},   {"t_on", b.t_on},
               {"t_off", b.t_off}, {"value", emit_complex(b.value)}};
    if (!b.band_mask.empty()) jb["band_mask"] = b.band_mask;
    pots.push_back(jb);
  }
  if (!pots.empty()) j["potential"] = pots;
  json js = {{"resolution", cfg.scan_resolution}, {"tol", cfg.scan_tol}};
  if (cfg.scan_box)
    js["box"] = {(*cfg.scan_box)[0], (*cfg.scan_box)[1], (*cfg.scan_box)[2],
                 (*cfg.scan_box)[3]};
  j["scan"] = js;
  return j.dump(2) + "\n";
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.model.kind == b.model.kind && a.model.hops == b.model.hops &&
         a.model.t1 == b.model.t1 && a.model.delta_a == b.model.delta_a &&
         a.model.delta_b == b.model.delta_b && a.model.t0 == b.model.t0 &&
         a.model.V == b.model.V && a.N == b.N && a.guard_band == b.guard_band &&
         a.dt == b.dt && a.t_end == b.t_end &&
         a.snapshot_times == b.snapshot_times && a.E0 == b.E0 &&
         a.scan_box == b.scan_box && a.scan_resolution == b.scan_resolution &&
         a.scan_tol == b.scan_tol &&
         [&] {
           if (a.potential.size() != b.potential.size()) return false;
           for (size_t i = 0; i < a.potential.size(); ++i) {
             const auto& x = a.potential[i];
             const auto& y = b.potential[i];
             if (x.n_min != y.n_min || x.n_max != y.n_max ||
                 x.band_mask != y.band_mask || x.t_on != y.t_on ||
                 x.t_off != y.t_off || x.value != y.value)
               return false;
           }
           return true;
         }();
}

std::unique_ptr<BlochModel> make_model(const ModelConfig& mc) {
  if (mc.kind == ModelConfig::Kind::single_band)
    return std::make_unique<SingleBandModel>(LaurentSymbol::from_hops(mc.hops));
  return std::make_unique<TwoChainModel>(mc.t1, mc.delta_a, mc.delta_b, mc.t0,
                                         mc.V);
}

}  // namespace nbloch
