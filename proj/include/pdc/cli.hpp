#pragma once

// Command-line driver. Exit codes: 0 success, 2 usage or configuration
// error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdc/conflict.hpp"
#include "pdc/report.hpp"
#include "pdc/reproduce.hpp"

#ifndef PDC_DATA_DIR
#define PDC_DATA_DIR "data"
#endif

namespace pdc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Options shared by every command. Unset optionals fall back to the config
/// file, then to defaults.
struct Flags {
  std::optional<std::string> model, data, order, output, config;
  std::vector<std::string> set;
  std::optional<int> M, inner_draws, level;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool keep_replicates = false, em = false, all_units = false, cv = false, one_sided = false;
  std::optional<std::string> unit, theta;
  std::optional<long> draws;
  // curve
  std::optional<double> nu, t_max_factor;
  std::optional<int> points, n;
  // reproduce
  int example = 0;
  std::optional<std::string> output_dir, data_dir;
  // fit
  std::optional<std::string> trace;
};

struct RunConfig {
  std::string model;
  ParamMap params;
  std::string data_path;
  std::string order = "kl";
  int M = 1000;
  int inner_draws = 200;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string output;
  bool keep_replicates = false;
};

namespace detail {

inline double parse_double(const std::string& text, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw ValidationError("--set: value '" + text + "' for key '" + key + "' is not a number");
  return v;
}

/// "k=v,k=v" into a parameter map.
inline void parse_set(const std::string& spec, ParamMap& out) {
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--set: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    out[key] = parse_double(item.substr(eq + 1), key);
  }
}

inline const std::set<std::string>& run_keys() {
  static const std::set<std::string> keys{"model", "data",   "order",           "M",
                                          "inner_draws", "seed", "workers", "output",
                                          "keep_replicates"};
  return keys;
}

/// Flat JSON config: run keys plus numeric model parameters.
inline void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config file " + path + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "model") cfg.model = value.get<std::string>();
      else if (key == "data") cfg.data_path = value.get<std::string>();
      else if (key == "order") cfg.order = value.get<std::string>();
      else if (key == "M") cfg.M = value.get<int>();
      else if (key == "inner_draws") cfg.inner_draws = value.get<int>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "workers") cfg.workers = value.get<unsigned>();
      else if (key == "output") cfg.output = value.get<std::string>();
      else if (key == "keep_replicates") cfg.keep_replicates = value.get<bool>();
      else if (value.is_number()) cfg.params[key] = value.get<double>();
      else throw ValidationError("config file " + path + ": unknown key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("config file " + path + ": key '" + key + "' has the wrong type");
    }
  }
}

inline RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (f.config) apply_config_file(*f.config, cfg);
  if (f.model) cfg.model = *f.model;
  if (f.data) cfg.data_path = *f.data;
  if (f.order) cfg.order = *f.order;
  if (f.M) cfg.M = *f.M;
  if (f.inner_draws) cfg.inner_draws = *f.inner_draws;
  if (f.seed) cfg.seed = *f.seed;
  if (f.workers) cfg.workers = *f.workers;
  if (f.output) cfg.output = *f.output;
  if (f.keep_replicates) cfg.keep_replicates = true;
  for (const auto& s : f.set) parse_set(s, cfg.params);
  if (cfg.model.empty()) throw ValidationError("no model given (use --model or the 'model' config key)");
  if (cfg.M < 1) throw ValidationError("M must be at least 1");
  if (cfg.inner_draws < 1) throw ValidationError("inner_draws must be at least 1");
  return cfg;
}

inline Dataset load_data(const RunConfig& cfg, const ModelDefinition& model) {
  if (cfg.data_path.empty()) throw ValidationError("no data file given (use --data)");
  if (!std::filesystem::exists(cfg.data_path)) throw ValidationError("data file not found: " + cfg.data_path);
  return prepare_data(model, read_csv(cfg.data_path));
}

inline CheckOptions check_options(const RunConfig& cfg) {
  CheckOptions o;
  o.M = cfg.M;
  o.inner_draws = cfg.inner_draws;
  o.seed = cfg.seed;
  o.workers = cfg.workers;
  return o;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

inline CheckReport for_output(CheckReport r, bool keep) {
  if (!keep) {
    r.replicate_discrepancies.clear();
    r.replicate_directions.clear();
  }
  return r;
}

inline std::string fixed4(double x) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << x;
  return s.str();
}

inline std::string summary(const CheckReport& r) {
  std::string line = "p = " + fixed4(r.p_value);
  if (r.method == "enumeration")
    line += " (exact enumeration over " + std::to_string(r.M) + " outcomes)";
  else
    line += " (MC std error " + fixed4(r.mc_std_error) + ", M = " + std::to_string(r.M) + ")";
  return line;
}

inline void print_flags(const CheckReport& r, std::ostream& out) {
  for (const auto& f : r.flags) out << "flag: " << f << '\n';
}

inline std::size_t find_unit(const Dataset& data, const std::string& key) {
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].unit == key) return i;
  std::size_t used = 0;
  long idx = -1;
  try {
    idx = std::stol(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == key.size() && idx >= 1 && static_cast<std::size_t>(idx) <= data.size())
    return static_cast<std::size_t>(idx - 1);
  throw ValidationError("unit '" + key + "' is neither a unit label nor an index in 1.." +
                        std::to_string(data.size()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline int cmd_check(const Flags& f, std::ostream& out) {
  const RunConfig cfg = detail::resolve(f);
  const ModelDefinition model = make_model(cfg.model, cfg.params);
  const Dataset data = detail::load_data(cfg, model);
  const DivergenceOrder order = DivergenceOrder::parse(cfg.order);
  const CheckReport r = f.em ? em_p_value(model, data, detail::check_options(cfg))
                             : conflict_p_value(model, data, order, detail::check_options(cfg));
  out << detail::summary(r) << '\n';
  detail::print_flags(r, out);
  if (!cfg.output.empty())
    detail::write_text(cfg.output, to_json(detail::for_output(r, cfg.keep_replicates)).dump(2) + "\n");
  return kExitOk;
}

inline int cmd_hier_check(const Flags& f, std::ostream& out) {
  const RunConfig cfg = detail::resolve(f);
  const ModelDefinition model = make_model(cfg.model, cfg.params);
  const Dataset data = detail::load_data(cfg, model);
  const DivergenceOrder order = DivergenceOrder::parse(cfg.order);
  const int level = f.level.value_or(1);
  const CheckOptions opts = detail::check_options(cfg);
  std::vector<CheckReport> reports;
  if (level == 2) {
    if (f.unit || f.all_units || f.cv || f.one_sided)
      throw ValidationError("--unit, --all-units, --cv and --one-sided apply to --level 1 only");
    reports.push_back(hierarchical_p2(model, data, order, opts));
  } else if (level == 1) {
    const bool per_unit = std::holds_alternative<LogisticRandomEffects>(model);
    if (f.all_units) {
      if (f.unit) throw ValidationError("--unit and --all-units are mutually exclusive");
      reports = hierarchical_p1_all_units(model, data, order, f.cv, f.one_sided, opts);
    } else {
      if (per_unit && !f.unit) throw ValidationError("logistic-re needs --unit or --all-units");
      HierarchicalSplit split;
      if (f.unit) split.unit = detail::find_unit(data, *f.unit);
      split.cross_validated = f.cv;
      split.one_sided = f.one_sided;
      reports.push_back(hierarchical_p1(model, data, order, split, opts));
    }
  } else {
    throw ValidationError("--level must be 1 or 2");
  }

  if (reports.size() == 1) {
    out << detail::summary(reports[0]) << '\n';
    detail::print_flags(reports[0], out);
  } else {
    out << std::left << std::setw(20) << "unit" << std::setw(10) << "p" << std::setw(12) << "std_error"
        << "discrepancy\n";
    for (const auto& r : reports)
      out << std::left << std::setw(20) << r.unit.value_or("") << std::setw(10) << detail::fixed4(r.p_value)
          << std::setw(12) << detail::fixed4(r.mc_std_error) << detail::fixed4(r.discrepancy_obs) << '\n';
  }
  if (!cfg.output.empty()) {
    nlohmann::json j;
    if (reports.size() == 1) {
      j = to_json(detail::for_output(reports[0], cfg.keep_replicates));
    } else {
      j = nlohmann::json::array();
      for (const auto& r : reports) j.push_back(to_json(detail::for_output(r, cfg.keep_replicates)));
    }
    detail::write_text(cfg.output, j.dump(2) + "\n");
  }
  return kExitOk;
}

inline int cmd_curve(const Flags& f, std::ostream& out) {
  double nu = 0.0;
  if (f.nu) {
    nu = *f.nu;
  } else {
    if (!f.n) throw ValidationError("curve needs --nu, or --n with the shifted-exponential parameters");
    ParamMap params;
    for (const auto& s : f.set) detail::parse_set(s, params);
    const ShiftedExponential model = ShiftedExponential::from_params(params);
    nu = *f.n * model.r() / model.kappa();
  }
  const DivergenceOrder order = DivergenceOrder::parse(f.order.value_or("kl"));
  const int points = f.points.value_or(200);
  if (points < 2) throw ValidationError("--points must be at least 2");
  const auto curve = shifted_exp_curve(nu, order, default_sweep(nu, order, points, f.t_max_factor.value_or(20.0)));
  const std::string csv = curve_csv(curve);
  if (f.output) {
    detail::write_text(*f.output, csv);
    out << "t0 = " << shifted_exp::t0(nu, order) << ", " << curve.size() << " points written to " << *f.output
        << '\n';
  } else {
    out << csv;
  }
  return kExitOk;
}

inline int cmd_asymptotic(const Flags& f, std::ostream& out) {
  const RunConfig cfg = detail::resolve(f);
  const ModelDefinition model = make_model(cfg.model, cfg.params);
  if (!f.theta) throw ValidationError("asymptotic needs --theta");
  std::vector<double> values;
  {
    std::stringstream ss(*f.theta);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(detail::parse_double(item, "theta"));
  }
  if (values.empty()) throw ValidationError("--theta is empty");
  const Vector theta = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  const long draws = f.draws.value_or(100000);
  if (draws < 1) throw ValidationError("--draws must be positive");
  const CheckReport r = asymptotic_check(model, theta, draws, cfg.seed);
  out << "limiting p = " << detail::fixed4(r.p_value) << " (MC std error " << detail::fixed4(r.mc_std_error)
      << ", " << draws << " prior draws)\n";
  if (!cfg.output.empty()) detail::write_text(cfg.output, to_json(r).dump(2) + "\n");
  return kExitOk;
}

inline nlohmann::json posterior_json(const PosteriorResult& post) {
  nlohmann::json j;
  j["strategy"] = to_string(post.strategy);
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  auto mat = [&](const Matrix& m) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < m.rows(); ++i) rows.push_back(vec(m.row(i).transpose()));
    return rows;
  };
  auto gaussian = [&](const GaussianMV& g) { return nlohmann::json{{"mean", vec(g.mean())}, {"cov", mat(g.cov())}}; };
  std::visit(
      [&](const auto& rep) {
        using R = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<R, GridPosterior>) {
          j["family"] = "grid";
          j["points"] = {rep.x.size(), rep.y.size()};
          j["mean"] = vec(rep.mean());
        } else if constexpr (std::is_same_v<R, GaussianMV>) {
          j["family"] = "gaussian";
          j.update(gaussian(rep));
        } else if constexpr (std::is_same_v<R, GaussianMixtureApprox>) {
          j["family"] = "gaussian_mixture";
          j["weights"] = vec(rep.weights());
          j["components"] = nlohmann::json::array();
          for (const auto& c : rep.components()) j["components"].push_back(gaussian(c));
        } else {
          std::visit(
              [&](const auto& d) {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, GaussianMV>) {
                  j["family"] = "gaussian";
                  j.update(gaussian(d));
                } else if constexpr (std::is_same_v<D, BetaDist>) {
                  j["family"] = "beta";
                  j["a"] = d.a();
                  j["b"] = d.b();
                } else if constexpr (std::is_same_v<D, NormalInverseGamma>) {
                  j["family"] = "normal_inverse_gamma";
                  j["mu0"] = d.mu0();
                  j["lambda0"] = d.lambda0();
                  j["a"] = d.a();
                  j["b"] = d.b();
                } else if constexpr (std::is_same_v<D, TruncatedExponential>) {
                  j["family"] = "truncated_exponential";
                  j["rate"] = d.rate();
                  j["upper"] = d.upper();
                } else if constexpr (std::is_same_v<D, ExponentialDist>) {
                  j["family"] = "exponential";
                  j["kappa"] = d.kappa();
                } else {
                  j["family"] = "other";
                }
              },
              rep);
        }
      },
      post.representation);
  if (post.diagnostics) {
    const auto& d = *post.diagnostics;
    j["diagnostics"] = {{"iterations", d.iterations},         {"converged", d.converged},
                        {"final_elbo", d.final_elbo},         {"final_grad_norm", d.final_grad_norm},
                        {"rejected_draws", d.rejected_draws}, {"collapse_refit", d.collapse_refit}};
  }
  return j;
}

inline int cmd_fit(const Flags& f, std::ostream& out) {
  const RunConfig cfg = detail::resolve(f);
  const ModelDefinition model = make_model(cfg.model, cfg.params);
  const Dataset data = detail::load_data(cfg, model);
  FitConfig fc;
  std::visit(
      [&](const auto& m) {
        if constexpr (requires { m.settings(); }) fc = m.settings().observed;
      },
      model);
  fc.seed = cfg.seed;
  const PosteriorResult post = fit_posterior(model, data, fc);
  nlohmann::json j = posterior_json(post);
  j["model"] = {{"name", cfg.model}, {"params", std::visit([](const auto& m) { return m.params(); }, model)}};
  const std::string text = j.dump(2) + "\n";
  if (cfg.output.empty()) out << text;
  else detail::write_text(cfg.output, text);
  if (f.trace) {
    if (!post.trace) throw ValidationError("--trace: this model's posterior is not a variational fit");
    std::ofstream t(*f.trace);
    if (!t) throw ValidationError("cannot write " + *f.trace);
    post.trace->write_csv(t);
  }
  return kExitOk;
}

inline int cmd_reproduce(const Flags& f, std::ostream& out) {
  ReproduceOptions o;
  if (f.M) o.M = *f.M;
  if (f.inner_draws) o.inner_draws = *f.inner_draws;
  if (f.seed) o.seed = *f.seed;
  if (f.workers) o.workers = *f.workers;
  o.data_dir = f.data_dir.value_or(PDC_DATA_DIR);
  const std::string dir = f.output_dir.value_or("reproduce-" + std::to_string(f.example));
  const Reproduction rep = reproduce(f.example, o);
  std::filesystem::create_directories(dir);
  auto manifest = nlohmann::json::object();
  manifest["schema_version"] = kSchemaVersion;
  manifest["example"] = rep.example;
  manifest["seed"] = o.seed;
  manifest["M"] = o.M;
  manifest["entries"] = nlohmann::json::array();
  for (const auto& e : rep.entries) {
    nlohmann::json row{{"quantity", e.quantity}, {"produced", pdc::detail::number_to_json(e.produced)},
                       {"tolerance", e.tolerance}, {"source", e.source}, {"pass", e.pass}};
    row["expected"] = e.expected ? nlohmann::json(*e.expected) : nlohmann::json(nullptr);
    manifest["entries"].push_back(row);
    out << (e.pass ? "ok    " : "MISS  ") << std::left << std::setw(48) << e.quantity << ' '
        << std::setprecision(6) << e.produced;
    if (e.expected) out << "  expected " << *e.expected << " +/- " << e.tolerance;
    out << '\n';
  }
  manifest["all_pass"] = rep.all_pass();
  for (const auto& [stem, r] : rep.reports)
    detail::write_text((std::filesystem::path(dir) / (stem + ".json")).string(), to_json(detail::for_output(r, false)).dump(2) + "\n");
  for (const auto& [name, text] : rep.files) detail::write_text((std::filesystem::path(dir) / name).string(), text);
  detail::write_text((std::filesystem::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  out << "outputs written to " << dir << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline void add_run_options(CLI::App* cmd, Flags& f, bool with_data = true) {
  cmd->add_option("--model", f.model, "Model name: " + [] {
    std::string s;
    for (const auto& n : model_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }());
  cmd->add_option("--set", f.set, "Model parameter overrides, k=v[,k=v...]");
  cmd->add_option("--config", f.config,
                  "Flat JSON config file; --set and explicit flags override it, and it overrides model defaults");
  if (with_data) cmd->add_option("--data", f.data, "CSV data file");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--output", f.output, "Output file");
}

inline void add_check_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--order", f.order, "Divergence order: kl, mr or alpha:<x>");
  cmd->add_option("--M", f.M, "Number of prior-predictive replicates (default 1000)");
  cmd->add_option("--workers", f.workers, "Worker threads (default: all cores)");
  cmd->add_flag("--keep-replicates", f.keep_replicates, "Include replicate discrepancies in the JSON report");
}

/// Runs the CLI on argv-style arguments (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prior-data conflict checks based on prior-to-posterior divergences", "pdc"};
  app.require_subcommand(1);
  app.footer(
      "Settings precedence: --set and explicit flags, then the --config file, then built-in defaults.\n"
      "Config files are flat JSON objects; keys other than model, data, order, M, inner_draws, seed,\n"
      "workers, output and keep_replicates are numeric model parameters.\n"
      "Exit codes: 0 success, 2 invalid input or unsupported operation, 3 numerical failure.");
  Flags f;

  auto* check = app.add_subcommand("check", "Prior-predictive check of the prior-to-posterior divergence");
  add_run_options(check, f);
  add_check_options(check, f);
  check->add_flag("--em", f.em, "Use the predictive density of the sufficient statistic instead");

  auto* hier = app.add_subcommand("hier-check", "Hierarchical checks (level 1: conditional, level 2: marginal)");
  add_run_options(hier, f);
  add_check_options(hier, f);
  hier->add_option("--level", f.level, "1 checks g(theta1 | theta2), 2 checks g(theta2)");
  hier->add_option("--inner-draws", f.inner_draws, "theta2 draws for the inner expectation (default 200)");
  hier->add_option("--unit", f.unit, "Unit label or 1-based index");
  hier->add_flag("--all-units", f.all_units, "Check every unit and print a table");
  hier->add_flag("--cv", f.cv, "Cross-validated: leave the unit out of the theta2 posterior");
  hier->add_flag("--one-sided", f.one_sided, "Count only excesses in the direction of the observed effect");

  auto* curve = app.add_subcommand("curve", "Exact p-value curve for the shifted exponential model (CSV)");
  curve->add_option("--nu", f.nu, "nu = n r / kappa (> 1)");
  curve->add_option("--n", f.n, "Sample size, with --set kappa=..,r=.. instead of --nu");
  curve->add_option("--set", f.set, "Model parameter overrides");
  curve->add_option("--order", f.order, "Divergence order");
  curve->add_option("--points", f.points, "Sweep points (default 200)");
  curve->add_option("--t-max-factor", f.t_max_factor, "Sweep up to this multiple of t0 (default 20)");
  curve->add_option("--output", f.output, "CSV output file (default: standard output)");

  auto* asym = app.add_subcommand("asymptotic", "Large-sample limit of the check at theta*");
  add_run_options(asym, f, false);
  asym->add_option("--theta", f.theta, "theta*, comma separated")->required();
  asym->add_option("--draws", f.draws, "Prior draws (default 100000)");

  auto* fit = app.add_subcommand("fit", "Posterior for a dataset (JSON summary)");
  add_run_options(fit, f);
  fit->add_option("--trace", f.trace, "Write the ELBO trace CSV here (variational fits)");

  auto* repro = app.add_subcommand("reproduce", "Run one worked scenario end to end");
  repro->add_option("example", f.example, "Scenario number 1-6 (see README)")->required()->check(CLI::Range(1, 6));
  repro->add_option("--output-dir", f.output_dir, "Directory for reports, CSVs and manifest.json");
  repro->add_option("--data-dir", f.data_dir, "Directory holding the fixtures");
  repro->add_option("--M", f.M, "Replicates per check");
  repro->add_option("--inner-draws", f.inner_draws, "theta2 draws for hierarchical checks");
  repro->add_option("--seed", f.seed, "Master seed");
  repro->add_option("--workers", f.workers, "Worker threads");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check(f, out);
    if (hier->parsed()) return cmd_hier_check(f, out);
    if (curve->parsed()) return cmd_curve(f, out);
    if (asym->parsed()) return cmd_asymptotic(f, out);
    if (fit->parsed()) return cmd_fit(f, out);
    if (repro->parsed()) return cmd_reproduce(f, out);
  } catch (const NumericalAbort& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace pdc::cli
