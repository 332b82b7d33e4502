#include "danyra/io.hpp"

#include <fstream>
#include <string>

#include "danyra/error.hpp"

namespace danyra::io {

namespace {

const Json& field(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string(where) + ": missing key \"" + key + "\"");
  }
  return j.at(key);
}

std::size_t count_field(const Json& j, const char* key, const char* where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(std::string(where) + ": \"" + key + "\" must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw ConfigError(std::string(what) + " must be a number");
  return j.get<double>();
}

}  // namespace

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Matrix& M) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Vector vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

Matrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError(std::string(what) + " must be a non-empty array of rows");
  }
  const std::size_t cols = j[0].size();
  Matrix M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError(std::string(what) + " rows must all have " + std::to_string(cols) +
                        " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], what);
    }
  }
  return M;
}

Json to_json(const ProblemInstance& instance) {
  Json agents = Json::array();
  for (const auto& a : instance.agents) {
    const auto* q = a.quadratic();
    if (!q) throw ConfigError("only quadratic instances can be serialized");
    agents.push_back({{"P", to_json(q->P())}, {"Q", to_json(q->Q())}, {"A", to_json(a.A)},
                      {"d", to_json(a.d)}});
  }
  Json edges = Json::array();
  for (const auto& e : instance.topology.edges) edges.push_back({e.i, e.j});
  return {{"n", instance.n()},
          {"p", instance.p},
          {"m", instance.m},
          {"agents", std::move(agents)},
          {"topology", {{"edges", std::move(edges)}, {"weights", instance.topology.edge_weights()}}}};
}

ProblemInstance instance_from_json(const Json& j) {
  constexpr const char* where = "instance";
  const std::size_t n = count_field(j, "n", where);
  ProblemInstance inst;
  inst.p = count_field(j, "p", where);
  inst.m = count_field(j, "m", where);
  const Json& agents = field(j, "agents", where);
  if (!agents.is_array() || agents.size() != n) {
    throw ConfigError("instance: \"agents\" must list n entries");
  }
  for (const auto& a : agents) {
    AgentSpec spec{QuadraticCost(matrix_from_json(field(a, "P", "agent"), "P"),
                                 vector_from_json(field(a, "Q", "agent"), "Q")),
                   matrix_from_json(field(a, "A", "agent"), "A"),
                   vector_from_json(field(a, "d", "agent"), "d"), std::nullopt};
    if (spec.A.rows() == 2 && spec.A.cols() == 2 && spec.A(0, 0) == 1.0 && spec.A(0, 1) == 0.0 &&
        spec.A(1, 0) == 0.0) {
      spec.C = spec.A(1, 1);
    }
    inst.agents.push_back(std::move(spec));
  }
  const Json& topo = field(j, "topology", where);
  std::vector<Edge> edges;
  for (const auto& e : field(topo, "edges", "topology")) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("topology edges must be pairs");
    edges.push_back(Edge{e[0].get<std::size_t>(), e[1].get<std::size_t>()});
  }
  std::vector<double> weights;
  for (const auto& w : field(topo, "weights", "topology")) weights.push_back(number(w, "weight"));
  inst.topology = topology_from_weights(n, edges, weights);
  validate_instance(inst);
  return inst;
}

Json to_json(const SwarmState& state) {
  Json agents = Json::array();
  for (const auto& a : state.agents) {
    agents.push_back({{"x", to_json(a.x)},
                      {"x_prime", to_json(a.x_prime)},
                      {"y", to_json(a.y)},
                      {"delta", to_json(a.delta)},
                      {"lambda", to_json(a.lambda)}});
  }
  return {{"k", state.k}, {"mode", mode_name(state.mode)}, {"agents", std::move(agents)}};
}

SwarmState state_from_json(const Json& j, const ProblemInstance& instance) {
  SwarmState s;
  s.k = count_field(j, "k", "state");
  s.mode = mode_from_name(field(j, "mode", "state").get<std::string>());
  const Json& agents = field(j, "agents", "state");
  if (!agents.is_array() || agents.size() != instance.n()) {
    throw ConfigError("state: agent count does not match the instance");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    AgentState st;
    st.x = vector_from_json(field(a, "x", "state agent"), "x");
    st.x_prime = vector_from_json(field(a, "x_prime", "state agent"), "x_prime");
    st.y = vector_from_json(field(a, "y", "state agent"), "y");
    st.delta = vector_from_json(field(a, "delta", "state agent"), "delta");
    st.lambda = vector_from_json(field(a, "lambda", "state agent"), "lambda");
    st.projector = projector_for(instance.agents[i].A);
    s.agents.push_back(std::move(st));
  }
  return s;
}

Json to_json(const OracleSolution& sol) {
  return {{"x_star", to_json(sol.x_star)},
          {"lambda_star", to_json(sol.lambda_star)},
          {"f_star", sol.f_star},
          {"active_set", sol.active_set},
          {"mode", mode_name(sol.mode)}};
}

OracleSolution oracle_from_json(const Json& j) {
  OracleSolution sol;
  sol.x_star = vector_from_json(field(j, "x_star", "oracle"), "x_star");
  sol.lambda_star = vector_from_json(field(j, "lambda_star", "oracle"), "lambda_star");
  sol.f_star = number(field(j, "f_star", "oracle"), "f_star");
  sol.active_set = field(j, "active_set", "oracle").get<std::vector<std::size_t>>();
  sol.mode = mode_from_name(field(j, "mode", "oracle").get<std::string>());
  return sol;
}

Json to_json(const BufferSchedule& schedule) {
  switch (schedule.kind()) {
    case BufferSchedule::Kind::kConstant:
      return {{"constant", schedule.constant_value()}};
    case BufferSchedule::Kind::kDecaying:
      return {{"decaying", {{"coefficient", schedule.coefficient()}, {"shift", schedule.shift()}}}};
    case BufferSchedule::Kind::kSequence:
      return {{"sequence", schedule.values()}};
  }
  return {};
}

BufferSchedule buffer_from_json(const Json& j) {
  if (j.is_number()) return BufferSchedule::constant(j.get<double>());
  if (!j.is_object() || j.size() != 1) {
    throw ConfigError("buffer must be a number or one of {constant, decaying, sequence}");
  }
  if (j.contains("constant")) return BufferSchedule::constant(number(j["constant"], "buffer.constant"));
  if (j.contains("decaying")) {
    const Json& d = j["decaying"];
    for (const auto& [key, _] : d.items()) {
      if (key != "coefficient" && key != "shift") {
        throw ConfigError("unknown key \"" + key + "\" in buffer.decaying");
      }
    }
    const long shift = d.contains("shift") ? d["shift"].get<long>() : 1L;
    return BufferSchedule::decaying(number(field(d, "coefficient", "buffer.decaying"),
                                           "buffer.decaying.coefficient"),
                                    shift);
  }
  if (j.contains("sequence")) {
    return BufferSchedule::sequence(j["sequence"].get<std::vector<double>>());
  }
  throw ConfigError("unknown buffer kind \"" + j.begin().key() + "\"");
}

Json to_json(const HyperParams& hp) {
  return {{"alpha", hp.alpha},
          {"beta", hp.beta},
          {"eta", hp.eta},
          {"gamma", hp.gamma},
          {"buffer", to_json(hp.buffer)}};
}

HyperParams hyperparams_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("hyperparams must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "alpha" && key != "beta" && key != "eta" && key != "gamma" && key != "buffer") {
      throw ConfigError("unknown key \"" + key + "\" in hyperparams");
    }
  }
  HyperParams hp;
  hp.alpha = number(field(j, "alpha", "hyperparams"), "alpha");
  hp.beta = number(field(j, "beta", "hyperparams"), "beta");
  hp.eta = number(field(j, "eta", "hyperparams"), "eta");
  hp.gamma = number(field(j, "gamma", "hyperparams"), "gamma");
  hp.buffer = j.contains("buffer") ? buffer_from_json(j["buffer"]) : BufferSchedule::constant(0.0);
  return hp;
}

Json to_json(const ConditionReport& report) {
  Json conds = Json::array();
  for (const auto& c : report.conditions) {
    conds.push_back(
        {{"name", c.name}, {"bound", c.bound}, {"supplied", c.supplied}, {"passed", c.passed}});
  }
  Json out = {{"conditions", std::move(conds)}, {"c", report.c}, {"all_passed", report.all_passed()}};
  out["theta_prime"] = report.theta_prime ? Json(*report.theta_prime) : Json(nullptr);
  return out;
}

Json to_json(const BoundsReport& r) {
  Json out = {{"omega", r.omega},
              {"accuracy_bound", r.accuracy_bound},
              {"tradeoff_t", r.tradeoff_t},
              {"tradeoff_rhs", r.tradeoff_rhs},
              {"one_step_threshold", r.one_step_threshold},
              {"one_step_absorbs", r.one_step_absorbs},
              {"c_vio", r.c_vio}};
  out["recovery_bound_t"] = r.recovery_bound_t ? Json(*r.recovery_bound_t) : Json(nullptr);
  return out;
}

Json to_json(const SpectralConstants& sc) {
  return {{"ell", sc.ell},
          {"mu", sc.mu},
          {"sigma_A_max", sc.sigma_A_max},
          {"sigma_A_min", sc.sigma_A_min},
          {"kappa_A", sc.kappa_A},
          {"sigma_L_max", sc.sigma_L_max},
          {"sigma_L_min", sc.sigma_L_min}};
}

const char* mode_name(ConstraintMode mode) {
  return mode == ConstraintMode::kEquality ? "eq" : "ineq";
}

ConstraintMode mode_from_name(const std::string& name) {
  if (name == "ineq" || name == "inequality") return ConstraintMode::kInequality;
  if (name == "eq" || name == "equality") return ConstraintMode::kEquality;
  throw ConfigError("mode must be \"ineq\" or \"eq\", got \"" + name + "\"");
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace danyra::io
