#pragma once

// Run configuration: JSON file, named presets and command-line overrides,
// plus the driver that writes trace.csv, bounds.json and report.json.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "danyra/io.hpp"
#include "danyra/netsim.hpp"

namespace danyra {

struct GenerateSpec {
  std::uint64_t seed = 1;
  std::size_t n = 14;
  double r_max = 70.0;
  std::size_t extra_edges = 5;
  InstanceRanges ranges;
};

using InstanceSource = std::variant<GenerateSpec, std::filesystem::path>;

/// One member of a buffer sweep; written to <out>/<name>/.
struct SweepRun {
  std::string name;
  BufferSchedule buffer;
};

struct RunConfig {
  std::optional<std::string> preset;
  InstanceSource instance;
  HyperParams hp;
  ConstraintMode mode = ConstraintMode::kInequality;
  std::size_t iters = 1;
  std::size_t record_every = 1;
  InitMode init = InitMode::kAtDemand;
  std::optional<Vector> init_offset;
  std::vector<DisturbanceEvent> disturbances;
  bool disturb_virtual = true;
  std::vector<SweepRun> sweep;
  std::filesystem::path out = "out";
  int threads = 0;
};

/// Command-line values that take precedence over file keys.
struct ConfigOverrides {
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iters;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> mode;
  std::optional<int> threads;
};

const std::vector<std::string>& preset_names();

/// Fully expanded JSON document of a preset. Throws ConfigError for an
/// unknown name.
io::Json preset_json(const std::string& name);

/// Builds a RunConfig from a JSON document. Unknown keys are rejected and
/// missing required keys (instance, hyperparams, mode, iters) are named in
/// the error.
RunConfig config_from_json(const io::Json& j);
io::Json to_json(const RunConfig& config);

/// Layering: preset (from the file's "preset" key or overrides.preset), then
/// the file's keys, then the overrides. `path` may be empty when a preset is
/// given.
RunConfig parse_config(const std::optional<std::filesystem::path>& path,
                       const ConfigOverrides& overrides = {});

/// Thread cap from DANYRA_THREADS, if set and valid.
std::optional<int> threads_from_env();

/// Builds the instance, solves the oracle, runs every experiment and writes
/// the output files. Returns 0 on success; errors propagate as exceptions.
int run(const RunConfig& config);

}  // namespace danyra
