#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nbloch/evolve.hpp"
#include "nbloch/model.hpp"

namespace nbloch {

struct ModelConfig {
  enum class Kind { single_band, two_chain };
  Kind kind = Kind::single_band;
  std::map<int, cd> hops;  // single_band
  double t1 = 0.0, delta_a = 0.0, delta_b = 0.0, t0 = 0.0, V = 0.0;  // two_chain
};

// Fully-resolved run configuration: every default is explicit after parse.
struct RunConfig {
  ModelConfig model;
  int N = 300;
  int guard_band = -1;  // -1: 10*max(r,s)
  double dt = 1e-3;
  double t_end = 20.0;
  std::vector<double> snapshot_times;
  std::optional<cd> E0;  // initial skin-mode energy
  std::vector<PotentialBox> potential;
  std::optional<std::array<double, 4>> scan_box;  // re_min, re_max, im_min, im_max
  int scan_resolution = 400;
  double scan_tol = 1e-8;
};

// Strict JSON parse: unknown keys are errors with field-path messages,
// complex numbers are [re, im] pairs.
RunConfig parse_config(const std::string& text);
std::string emit_config(const RunConfig& cfg);

bool operator==(const RunConfig& a, const RunConfig& b);

std::unique_ptr<BlochModel> make_model(const ModelConfig& mc);

}  // namespace nbloch
