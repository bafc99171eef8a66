#pragma once

#include <optional>
#include <string>

#include "nbloch/config.hpp"

namespace nbloch {

struct RunOverrides {
  std::optional<double> dt;
  std::optional<double> t_end;
  int threads = 1;
};

// Executes one CLI subcommand against a parsed config, writing its artifact
// files into out_dir (atomically, with fixed 17-significant-digit floats).
// Returns 0 on success; on any module error writes error.json and returns 1.
int run_subcommand(const std::string& name, const RunConfig& cfg,
                   const std::string& out_dir, const RunOverrides& ov = {});

// temp-file + rename write
void atomic_write(const std::string& path, const std::string& content);

std::string fmt_g17(double v);

}  // namespace nbloch
