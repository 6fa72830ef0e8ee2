#pragma once

// JSON serialization of check reports (schema_version 1).

#include <cmath>
#include <string>

#include <json.hpp>

#include "pdc/conflict.hpp"

namespace pdc {

inline constexpr int kSchemaVersion = 1;

namespace detail {

// JSON has no infinities or NaN; those travel as strings.
inline nlohmann::json number_to_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline double number_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return kNaN;
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ValidationError("report: '" + s + "' is not a number");
  }
  return j.get<double>();
}

inline nlohmann::json numbers_to_json(const std::vector<double>& v) {
  auto out = nlohmann::json::array();
  for (double x : v) out.push_back(number_to_json(x));
  return out;
}

inline std::vector<double> numbers_from_json(const nlohmann::json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number_from_json(x));
  return out;
}

}  // namespace detail

/// Report as JSON. Replicate vectors are written only when they are
/// non-empty; callers drop them unless --keep-replicates was given.
inline nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = {{"name", r.model}, {"params", r.model_params}};
  j["variant"] = to_string(r.variant);
  j["order"] = r.order.to_string();
  j["seed"] = r.seed;
  j["M"] = r.M;
  j["inner_draws"] = r.inner_draws;
  j["unit"] = r.unit ? nlohmann::json(*r.unit) : nlohmann::json(nullptr);
  j["method"] = r.method;
  j["discrepancy_obs"] = detail::number_to_json(r.discrepancy_obs);
  j["p_value"] = detail::number_to_json(r.p_value);
  j["mc_std_error"] = detail::number_to_json(r.mc_std_error);
  j["flags"] = r.flags;
  auto diag = nlohmann::json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = detail::number_to_json(v);
  j["diagnostics"] = diag;
  if (!r.replicate_discrepancies.empty())
    j["replicate_discrepancies"] = detail::numbers_to_json(r.replicate_discrepancies);
  if (!r.replicate_directions.empty())
    j["replicate_directions"] = detail::numbers_to_json(r.replicate_directions);
  return j;
}

inline CheckReport report_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    detail::require(version == kSchemaVersion,
                    "report: unsupported schema_version " + std::to_string(version));
    CheckReport r;
    r.model = j.at("model").at("name").get<std::string>();
    r.model_params = j.at("model").at("params").get<ParamMap>();
    r.variant = parse_variant(j.at("variant").get<std::string>());
    r.order = DivergenceOrder::parse(j.at("order").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.M = j.at("M").get<int>();
    r.inner_draws = j.at("inner_draws").get<int>();
    if (!j.at("unit").is_null()) r.unit = j.at("unit").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.discrepancy_obs = detail::number_from_json(j.at("discrepancy_obs"));
    r.p_value = detail::number_from_json(j.at("p_value"));
    r.mc_std_error = detail::number_from_json(j.at("mc_std_error"));
    r.flags = j.at("flags").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("diagnostics").items()) r.diagnostics[k] = detail::number_from_json(v);
    if (j.contains("replicate_discrepancies"))
      r.replicate_discrepancies = detail::numbers_from_json(j["replicate_discrepancies"]);
    if (j.contains("replicate_directions"))
      r.replicate_directions = detail::numbers_from_json(j["replicate_directions"]);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: malformed JSON report: ") + e.what());
  }
}

inline CheckReport report_from_json(const std::string& text) {
  try {
    return report_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("report: invalid JSON: ") + e.what());
  }
}

}  // namespace pdc
