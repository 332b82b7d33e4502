#pragma once

// JSON documents for instances, states, oracle solutions and reports.
// Matrices are arrays of rows; doubles round-trip exactly.

#include <filesystem>

#include <json.hpp>

#include "danyra/engine.hpp"
#include "danyra/hyperparams.hpp"
#include "danyra/metrics.hpp"
#include "danyra/oracle.hpp"
#include "danyra/problem.hpp"

namespace danyra::io {

using Json = nlohmann::json;

Json to_json(const Vector& v);
Json to_json(const Matrix& M);
Vector vector_from_json(const Json& j, const char* what);
Matrix matrix_from_json(const Json& j, const char* what);

/// {n, p, m, agents:[{P, Q, A, d}], topology:{edges, weights}}.
/// Only quadratic instances can be written.
Json to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const Json& j);

/// {k, mode, agents:[{x, x_prime, y, delta, lambda}]}; projectors are
/// rebuilt from the instance on load.
Json to_json(const SwarmState& state);
SwarmState state_from_json(const Json& j, const ProblemInstance& instance);

Json to_json(const OracleSolution& sol);
OracleSolution oracle_from_json(const Json& j);

Json to_json(const BufferSchedule& schedule);
BufferSchedule buffer_from_json(const Json& j);
Json to_json(const HyperParams& hp);
HyperParams hyperparams_from_json(const Json& j);

Json to_json(const ConditionReport& report);
Json to_json(const BoundsReport& report);
Json to_json(const SpectralConstants& sc);

const char* mode_name(ConstraintMode mode);
ConstraintMode mode_from_name(const std::string& name);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace danyra::io
