#include "danyra/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>

#include "danyra/error.hpp"
#include "danyra/metrics.hpp"
#include "danyra/oracle.hpp"

namespace danyra {

namespace {

using io::Json;

void check_keys(const Json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

const Json& require(const Json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ConfigError(std::string(where) + ": missing key \"" + key + "\"");
  return j.at(key);
}

template <class T>
T get_as(const Json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("key \"") + key + "\" has the wrong type");
  }
}

std::size_t get_count(const Json& j, const char* key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError(std::string("key \"") + key + "\" must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

InstanceRanges ranges_from_json(const Json& j) {
  check_keys(j, "instance.generate.ranges", {"c_min", "c_max", "eig_min", "eig_max", "q_max"});
  InstanceRanges r;
  if (j.contains("c_min")) r.c_min = get_as<double>(j["c_min"], "c_min");
  if (j.contains("c_max")) r.c_max = get_as<double>(j["c_max"], "c_max");
  if (j.contains("eig_min")) r.eig_min = get_as<double>(j["eig_min"], "eig_min");
  if (j.contains("eig_max")) r.eig_max = get_as<double>(j["eig_max"], "eig_max");
  if (j.contains("q_max")) r.q_max = get_as<double>(j["q_max"], "q_max");
  return r;
}

Json ranges_to_json(const InstanceRanges& r) {
  return {{"c_min", r.c_min},
          {"c_max", r.c_max},
          {"eig_min", r.eig_min},
          {"eig_max", r.eig_max},
          {"q_max", r.q_max}};
}

InstanceSource source_from_json(const Json& j) {
  check_keys(j, "instance", {"generate", "file"});
  if (j.contains("generate") == j.contains("file")) {
    throw ConfigError("instance needs exactly one of \"generate\" or \"file\"");
  }
  if (j.contains("file")) return std::filesystem::path(get_as<std::string>(j["file"], "file"));
  const Json& g = j["generate"];
  check_keys(g, "instance.generate", {"seed", "n", "r_max", "extra_edges", "ranges"});
  GenerateSpec spec;
  spec.seed = get_as<std::uint64_t>(require(g, "seed", "instance.generate"), "seed");
  spec.n = get_count(require(g, "n", "instance.generate"), "n");
  spec.r_max = get_as<double>(require(g, "r_max", "instance.generate"), "r_max");
  if (g.contains("extra_edges")) spec.extra_edges = get_count(g["extra_edges"], "extra_edges");
  if (g.contains("ranges")) spec.ranges = ranges_from_json(g["ranges"]);
  return spec;
}

Json source_to_json(const InstanceSource& src) {
  if (const auto* path = std::get_if<std::filesystem::path>(&src)) {
    return {{"file", path->string()}};
  }
  const auto& g = std::get<GenerateSpec>(src);
  return {{"generate",
           {{"seed", g.seed},
            {"n", g.n},
            {"r_max", g.r_max},
            {"extra_edges", g.extra_edges},
            {"ranges", ranges_to_json(g.ranges)}}}};
}

const char* init_name(InitMode mode) {
  switch (mode) {
    case InitMode::kAtDemand:
      return "at_demand";
    case InitMode::kZero:
      return "zero";
    case InitMode::kCustom:
      return "custom";
  }
  return "at_demand";
}

Json fig2_json(const char* name, std::size_t iters) {
  return {{"preset", name},
          {"instance",
           {{"generate",
             {{"seed", 1},
              {"n", 14},
              {"r_max", 70.0},
              {"extra_edges", 5},
              {"ranges", ranges_to_json(InstanceRanges{})}}}}},
          {"hyperparams",
           {{"alpha", 0.01},
            {"beta", 0.02},
            {"eta", 0.1},
            {"gamma", 0.2},
            {"buffer", {{"constant", 0.0}}}}},
          {"mode", "ineq"},
          {"iters", iters},
          {"record_every", 1},
          {"init", {{"mode", "at_demand"}}},
          {"disturbances", {{{"at", 500}, {"agents", Json::array()}, {"additive", {50.0, 50.0}}}}},
          {"disturb_virtual", true},
          {"sweep", Json::array()},
          {"out", std::string("out/") + name},
          {"threads", 0}};
}

Json buffer_sweep_json() {
  Json j = fig2_json("buffer-sweep", 20000);
  j["init"] = {{"mode", "at_demand"}, {"offset", {50.0, 50.0}}};
  j["disturbances"] = Json::array();
  j["sweep"] = {
      {{"name", "omega_0.01"}, {"buffer", {{"constant", 0.01}}}},
      {{"name", "omega_0.1"}, {"buffer", {{"constant", 0.1}}}},
      {{"name", "omega_1"}, {"buffer", {{"constant", 1.0}}}},
      {{"name", "omega_5_over_k"}, {"buffer", {{"decaying", {{"coefficient", 5.0}, {"shift", 0}}}}}}};
  return j;
}

Json equality_json() {
  Json j = fig2_json("equality", 50000);
  j["instance"]["generate"]["n"] = 10;
  j["instance"]["generate"]["ranges"] =
      ranges_to_json(InstanceRanges{0.9, 1.1, 1.0, 1.2, 1.0});
  j["hyperparams"] = {{"alpha", 0.1},
                      {"beta", 0.1},
                      {"eta", 0.2},
                      {"gamma", 0.8},
                      {"buffer", {{"constant", 0.0}}}};
  j["mode"] = "eq";
  j["disturbances"] = Json::array();
  return j;
}

// Recovery is measured from the last disturbance, or from the start.
std::size_t recovery_origin(const RunConfig& config) {
  std::size_t k0 = 0;
  for (const auto& ev : config.disturbances) k0 = std::max(k0, ev.at_iteration);
  return k0;
}

ProblemInstance build_instance(const InstanceSource& src) {
  if (const auto* path = std::get_if<std::filesystem::path>(&src)) {
    return io::instance_from_json(io::read_json_file(*path));
  }
  const auto& g = std::get<GenerateSpec>(src);
  return generate_instance(g.seed, g.n, g.r_max, g.extra_edges, g.ranges);
}

void run_one(const RunConfig& config, const ProblemInstance& inst, const OracleSolution& oracle,
             const SpectralConstants& sc, const HyperParams& hp,
             const std::filesystem::path& dir) {
  ExperimentPlan plan;
  plan.instance = &inst;
  plan.hp = hp;
  plan.mode = config.mode;
  plan.init.mode = config.init;
  plan.init.offset = config.init_offset;
  plan.iters = config.iters;
  plan.record_every = config.record_every;
  plan.disturbances = config.disturbances;
  plan.disturb_virtual = config.disturb_virtual;
  plan.policy.threads = config.threads;

  SwarmState start = init_state(inst, hp, config.mode, plan.init);
  const double initial_violation = violation_l1(inst, stacked_x(start));
  ExperimentResult result = run_experiment_from(plan, std::move(start), &oracle);
  if (const auto* g = std::get_if<GenerateSpec>(&config.instance)) result.trace.metadata.seed = g->seed;

  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "trace.csv");
    if (!csv) throw ConfigError("cannot write " + (dir / "trace.csv").string());
    write_trace_csv(csv, result.trace);
  }

  const std::size_t k0 = recovery_origin(config);
  double c_vio = initial_violation;
  if (k0 > 0) {
    c_vio = 0.0;
    for (const auto& row : result.trace.rows) {
      if (row.k == k0) c_vio = row.violation_l1;
    }
  }
  io::write_json_file(dir / "bounds.json", io::to_json(bounds_report(sc, hp, inst.n(), c_vio, k0)));

  const auto recovered = recovery_iteration(result.trace, k0);
  Json report = {{"mode", io::mode_name(config.mode)},
                 {"iters", config.iters},
                 {"final_gap", result.trace.rows.back().gap.value_or(0.0)},
                 {"final_violation_l1", result.trace.rows.back().violation_l1},
                 {"initial_violation_l1", initial_violation},
                 {"recovery_from", k0},
                 {"hyperparams", io::to_json(hp)},
                 {"conditions", io::to_json(validate_hyperparams(hp, sc, config.mode))},
                 {"spectral", io::to_json(sc)},
                 {"oracle", io::to_json(oracle)},
                 {"seconds_per_iteration", result.trace.seconds_per_iteration}};
  report["recovery_iteration"] = recovered ? Json(*recovered) : Json(nullptr);
  io::write_json_file(dir / "report.json", report);
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig2", "fig3", "buffer-sweep", "equality"};
  return names;
}

Json preset_json(const std::string& name) {
  if (name == "fig2") return fig2_json("fig2", 20000);
  if (name == "fig3") return fig2_json("fig3", 1000);
  if (name == "buffer-sweep") return buffer_sweep_json();
  if (name == "equality") return equality_json();
  throw ConfigError("unknown preset \"" + name + "\" (expected fig2, fig3, buffer-sweep, equality)");
}

RunConfig config_from_json(const Json& j) {
  check_keys(j, "config",
             {"preset", "instance", "hyperparams", "mode", "iters", "record_every", "init",
              "disturbances", "disturb_virtual", "sweep", "out", "threads"});
  RunConfig c;
  if (j.contains("preset")) c.preset = get_as<std::string>(j["preset"], "preset");
  c.instance = source_from_json(require(j, "instance", "config"));
  c.hp = io::hyperparams_from_json(require(j, "hyperparams", "config"));
  c.mode = io::mode_from_name(get_as<std::string>(require(j, "mode", "config"), "mode"));
  c.iters = get_count(require(j, "iters", "config"), "iters");
  if (c.iters < 1) throw ConfigError("key \"iters\" must be >= 1");
  if (j.contains("record_every")) c.record_every = get_count(j["record_every"], "record_every");
  if (c.record_every < 1) throw ConfigError("key \"record_every\" must be >= 1");

  if (j.contains("init")) {
    const Json& init = j["init"];
    check_keys(init, "init", {"mode", "offset"});
    const auto mode = get_as<std::string>(require(init, "mode", "init"), "init.mode");
    if (mode == "at_demand") {
      c.init = InitMode::kAtDemand;
    } else if (mode == "zero") {
      c.init = InitMode::kZero;
    } else {
      throw ConfigError("init.mode must be \"at_demand\" or \"zero\", got \"" + mode + "\"");
    }
    if (init.contains("offset")) c.init_offset = io::vector_from_json(init["offset"], "init.offset");
  }

  if (j.contains("disturbances")) {
    for (const auto& d : j["disturbances"]) {
      check_keys(d, "disturbances[]", {"at", "agents", "additive"});
      DisturbanceEvent ev;
      ev.at_iteration = get_count(require(d, "at", "disturbances[]"), "at");
      if (d.contains("agents")) ev.agent_ids = get_as<std::vector<std::size_t>>(d["agents"], "agents");
      ev.additive = io::vector_from_json(require(d, "additive", "disturbances[]"), "additive");
      if (ev.at_iteration > c.iters) {
        throw ConfigError("disturbance at " + std::to_string(ev.at_iteration) +
                          " is beyond iters = " + std::to_string(c.iters));
      }
      c.disturbances.push_back(std::move(ev));
    }
  }
  if (j.contains("disturb_virtual")) c.disturb_virtual = get_as<bool>(j["disturb_virtual"], "disturb_virtual");

  if (j.contains("sweep")) {
    std::set<std::string> seen;
    for (const auto& s : j["sweep"]) {
      check_keys(s, "sweep[]", {"name", "buffer"});
      SweepRun run{get_as<std::string>(require(s, "name", "sweep[]"), "name"),
                   io::buffer_from_json(require(s, "buffer", "sweep[]"))};
      if (run.name.empty() || run.name.find('/') != std::string::npos || !seen.insert(run.name).second) {
        throw ConfigError("sweep names must be unique, non-empty and contain no '/'");
      }
      c.sweep.push_back(std::move(run));
    }
  }
  if (j.contains("out")) c.out = get_as<std::string>(j["out"], "out");
  if (j.contains("threads")) c.threads = get_as<int>(j["threads"], "threads");
  if (c.threads < 0) throw ConfigError("key \"threads\" must be >= 0");
  validate(c.hp);
  return c;
}

Json to_json(const RunConfig& c) {
  Json disturbances = Json::array();
  for (const auto& ev : c.disturbances) {
    disturbances.push_back(
        {{"at", ev.at_iteration}, {"agents", ev.agent_ids}, {"additive", io::to_json(ev.additive)}});
  }
  Json sweep = Json::array();
  for (const auto& s : c.sweep) sweep.push_back({{"name", s.name}, {"buffer", io::to_json(s.buffer)}});
  Json init = {{"mode", init_name(c.init)}};
  if (c.init_offset) init["offset"] = io::to_json(*c.init_offset);
  Json j = {{"instance", source_to_json(c.instance)},
            {"hyperparams", io::to_json(c.hp)},
            {"mode", io::mode_name(c.mode)},
            {"iters", c.iters},
            {"record_every", c.record_every},
            {"init", init},
            {"disturbances", disturbances},
            {"disturb_virtual", c.disturb_virtual},
            {"sweep", sweep},
            {"out", c.out.string()},
            {"threads", c.threads}};
  if (c.preset) j["preset"] = *c.preset;
  return j;
}

RunConfig parse_config(const std::optional<std::filesystem::path>& path,
                       const ConfigOverrides& overrides) {
  Json file = Json::object();
  if (path) file = io::read_json_file(*path);
  if (!file.is_object()) throw ConfigError("config file must hold a JSON object");

  std::optional<std::string> preset = overrides.preset;
  if (!preset && file.contains("preset")) preset = get_as<std::string>(file["preset"], "preset");
  if (!path && !preset) throw ConfigError("either a config file or a preset is required");

  Json merged = preset ? preset_json(*preset) : Json::object();
  for (const auto& [key, value] : file.items()) merged[key] = value;
  if (preset) merged["preset"] = *preset;

  if (overrides.iters) merged["iters"] = *overrides.iters;
  if (overrides.out) merged["out"] = overrides.out->string();
  if (overrides.mode) merged["mode"] = *overrides.mode;
  if (overrides.threads) merged["threads"] = *overrides.threads;
  if (overrides.seed) {
    if (!merged.contains("instance") || !merged["instance"].is_object() ||
        !merged["instance"].contains("generate")) {
      throw ConfigError("--seed needs a generated instance");
    }
    merged["instance"]["generate"]["seed"] = *overrides.seed;
  }
  return config_from_json(merged);
}

std::optional<int> threads_from_env() {
  const char* raw = std::getenv("DANYRA_THREADS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 0 || v > 4096) {
    throw ConfigError(std::string("DANYRA_THREADS must be a nonnegative integer, got \"") + raw + "\"");
  }
  return static_cast<int>(v);
}

int run(const RunConfig& config) {
  const ProblemInstance inst = build_instance(config.instance);
  const SpectralConstants sc = spectral_constants(inst);
  const OracleSolution oracle = solve_oracle(inst, config.mode);
  std::filesystem::create_directories(config.out);
  io::write_json_file(config.out / "config.json", to_json(config));
  io::write_json_file(config.out / "oracle.json", io::to_json(oracle));

  if (config.sweep.empty()) {
    run_one(config, inst, oracle, sc, config.hp, config.out);
    return 0;
  }
  for (const auto& s : config.sweep) {
    HyperParams hp = config.hp;
    hp.buffer = s.buffer;
    run_one(config, inst, oracle, sc, hp, config.out / s.name);
  }
  return 0;
}

}  // namespace danyra
