#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fcop/inference.hpp"
#include "fcop/simulation.hpp"
#include "fcop/tail.hpp"

namespace fcop {

using Json = nlohmann::json;

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header, const Matrix& values) {
  if (!header.empty() && static_cast<Eigen::Index>(header.size()) != values.cols())
    throw DimensionMismatch("write_csv: header width differs from column count");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  if (!header.empty()) out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
    out << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path);
}

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Numeric CSV with a header row.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty file " + path);
  CsvTable t;
  t.header = split_csv_line(line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != t.header.size()) throw ConfigError(path + ": row " + std::to_string(rows.size() + 2) + " has the wrong width");
    std::vector<double> r;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != c.size()) throw ConfigError(path + ": bad number '" + c + "'");
      r.push_back(v);
    }
    rows.push_back(std::move(r));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

inline void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path);
}

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": invalid JSON (" + e.what() + ")");
  }
}

namespace detail {

inline void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
T get_required(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + ": key '" + key + "' has the wrong type");
  }
}

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_or_null(x));
  return a;
}

inline std::vector<double> numbers_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
  return v;
}

}  // namespace detail

inline Json to_json(const OneSidedFactor& f) {
  return {{"family", to_string(f.family())}, {"theta", f.theta()}, {"shape", f.shape()}};
}

inline OneSidedFactor one_sided_from_json(const Json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"family", "theta", "shape"}, where);
  const auto fam = factor_family_from_string(detail::get_required<std::string>(j, "family", where));
  if (fam == FactorFamily::degenerate_zero) return {};
  const double theta = detail::get_required<double>(j, "theta", where);
  if (fam == FactorFamily::exponential) return OneSidedFactor::exponential(theta);
  return {fam, theta, detail::get_required<double>(j, "shape", where)};
}

inline Json to_json(const FactorSpec& s) {
  if (s.is_degenerate()) return {{"form", "gaussian"}};
  Json j{{"form", s.form() == FactorForm::difference ? "difference" : "one_sided"}, {"v1", to_json(s.v1())}};
  if (s.form() == FactorForm::difference) j["v2"] = to_json(s.v2());
  return j;
}

// Forms: gaussian; one_sided {v1}; difference {v1, v2}; exponential_difference {theta: [t1, t2]}.
inline FactorSpec factor_from_json(const Json& j) {
  const std::string where = "factor";
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const auto form = detail::get_required<std::string>(j, "form", where);
  if (form == "gaussian") {
    detail::reject_unknown_keys(j, {"form"}, where);
    return FactorSpec::gaussian();
  }
  if (form == "exponential_difference") {
    detail::reject_unknown_keys(j, {"form", "theta"}, where);
    const auto t = detail::numbers_from(j.at("theta"), where + ".theta");
    if (t.size() != 2) throw ConfigError(where + ": exponential_difference needs two scales");
    return FactorSpec::exponential_difference(t[0], t[1]);
  }
  if (form == "one_sided") {
    detail::reject_unknown_keys(j, {"form", "v1"}, where);
    if (!j.contains("v1")) throw ConfigError(where + ": missing key 'v1'");
    return FactorSpec::one_sided(one_sided_from_json(j.at("v1"), where + ".v1"));
  }
  if (form == "difference") {
    detail::reject_unknown_keys(j, {"form", "v1", "v2"}, where);
    if (!j.contains("v1") || !j.contains("v2")) throw ConfigError(where + ": difference needs v1 and v2");
    return FactorSpec::difference(one_sided_from_json(j.at("v1"), where + ".v1"), one_sided_from_json(j.at("v2"), where + ".v2"));
  }
  throw ConfigError(where + ": unknown form '" + form + "'");
}

inline Json to_json(const CorrelationModel& c) { return {{"family", to_string(c.family())}, {"params", c.params()}}; }

inline CorrelationModel correlation_from_json(const Json& j) {
  detail::reject_unknown_keys(j, {"family", "params"}, "correlation");
  return {correlation_family_from_string(detail::get_required<std::string>(j, "family", "correlation")),
          detail::numbers_from(j.at("params"), "correlation.params")};
}

inline Json to_json(const MarginalModel& g) {
  switch (g.kind) {
    case MarginalKind::known_uniform: return {{"kind", "known_uniform"}};
    case MarginalKind::rank_nonparametric: return {{"kind", "rank"}};
    case MarginalKind::parametric_student_t: return {{"kind", "student_t"}, {"m", g.m}, {"sd", g.sd}, {"nu", g.nu}};
  }
  return {};
}

inline MarginalModel margin_from_json(const Json& j) {
  const std::string where = "margin";
  const auto kind = detail::get_required<std::string>(j, "kind", where);
  if (kind == "student_t") {
    detail::reject_unknown_keys(j, {"kind", "m", "sd", "nu"}, where);
    auto g = MarginalModel::student_t(detail::get_required<double>(j, "m", where), detail::get_required<double>(j, "sd", where),
                                      detail::get_required<double>(j, "nu", where));
    g.validate();
    return g;
  }
  detail::reject_unknown_keys(j, {"kind"}, where);
  if (kind == "known_uniform") return {MarginalKind::known_uniform};
  if (kind == "rank") return {MarginalKind::rank_nonparametric};
  throw ConfigError(where + ": unknown kind '" + kind + "'");
}

// Dependence model without sites: {"factor": ..., "correlation": ..., optional "margin"}.
struct ModelConfig {
  FactorSpec factor = FactorSpec::gaussian();
  CorrelationModel corr;
  std::optional<MarginalModel> margin;
};

inline ModelConfig model_config_from_json(const Json& j) {
  detail::reject_unknown_keys(j, {"factor", "correlation", "margin"}, "model");
  if (!j.contains("factor") || !j.contains("correlation")) throw ConfigError("model: needs factor and correlation");
  ModelConfig m{factor_from_json(j.at("factor")), correlation_from_json(j.at("correlation")), std::nullopt};
  if (j.contains("margin")) m.margin = margin_from_json(j.at("margin"));
  return m;
}

inline Json to_json(const ModelConfig& m) {
  Json j{{"factor", to_json(m.factor)}, {"correlation", to_json(m.corr)}};
  if (m.margin) j["margin"] = to_json(*m.margin);
  return j;
}

inline Json to_json(const FitResult& r) {
  Json trace = Json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"iteration", t.iteration}, {"objective", t.objective}, {"gradient_norm", t.gradient_norm}, {"halvings", t.halvings}});
  Json j{{"procedure", r.procedure},
         {"replicates", r.replicates},
         {"names", r.names},
         {"estimates", detail::numbers(r.estimates())},
         {"standard_errors", detail::numbers(r.standard_errors)},
         {"standard_errors_available", r.standard_errors_available},
         {"log_likelihood", r.log_likelihood},
         {"aic", r.aic},
         {"bic", r.bic},
         {"iterations", r.iterations},
         {"converged", r.converged},
         {"gradient_norm", r.gradient_norm},
         {"model", to_json(ModelConfig{r.factor, r.corr, std::nullopt})}};
  if (!r.theta_F.empty()) j["theta_F"] = detail::numbers(r.theta_F);
  j["theta_Sigma"] = detail::numbers(r.theta_Sigma);
  if (r.procedure >= 3) {
    j["theta_G"] = detail::numbers(r.theta_G);
    j["margin"] = to_json(r.margin);
  } else {
    j["margin"] = to_json(MarginalModel{r.procedure == 1 ? MarginalKind::known_uniform : MarginalKind::rank_nonparametric});
  }
  return j;
}

// Fields needed downstream of a fit: the fitted model, its margin and the procedure.
inline FitResult fit_result_from_json(const Json& j) {
  const std::string where = "fit result";
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  FitResult r;
  r.procedure = detail::get_required<int>(j, "procedure", where);
  if (!j.contains("model")) throw ConfigError(where + ": missing key 'model'");
  const ModelConfig m = model_config_from_json(j.at("model"));
  r.factor = m.factor;
  r.corr = m.corr;
  if (j.contains("margin")) r.margin = margin_from_json(j.at("margin"));
  if (j.contains("names")) r.names = j.at("names").get<std::vector<std::string>>();
  r.theta_F = r.factor.is_degenerate() ? std::vector<double>{} : r.factor.scales();
  r.theta_Sigma = r.corr.params();
  if (j.contains("theta_G")) r.theta_G = detail::numbers_from(j.at("theta_G"), where + ".theta_G");
  if (j.contains("converged")) r.converged = j.at("converged").get<bool>();
  if (j.contains("log_likelihood")) r.log_likelihood = j.at("log_likelihood").get<double>();
  if (j.contains("replicates")) r.replicates = j.at("replicates").get<std::size_t>();
  return r;
}

inline Json to_json(const DeltaMetrics& d) {
  return {{"delta_rho", d.rho},     {"abs_delta_rho", d.rho_abs}, {"delta_L", d.lower},
          {"abs_delta_L", d.lower_abs}, {"delta_U", d.upper},   {"abs_delta_U", d.upper_abs}};
}

inline Json to_json(const Estimate& e) { return {{"value", e.value}, {"se", e.se}}; }

inline Json to_json(const TailReport& r) {
  return {{"q", r.q},
          {"lambda_L_q", r.lambda_l},
          {"lambda_U_q", r.lambda_u},
          {"A_q", r.asymmetry},
          {"zeta1", to_json(r.zeta1)},
          {"spearman_rho", to_json(r.spearman)},
          {"alpha_L", to_json(r.alpha_l)},
          {"alpha_U", to_json(r.alpha_u)}};
}

inline Json to_json(const StudyDesign& d) {
  return {{"k", d.k},
          {"replicates", d.replicates},
          {"repetitions", d.repetitions},
          {"theta", d.theta},
          {"procedure", d.procedure},
          {"seed", d.seed},
          {"margin", to_json(d.margin)}};
}

inline StudyDesign study_design_from_json(const Json& j) {
  detail::reject_unknown_keys(j, {"k", "replicates", "repetitions", "theta", "procedure", "seed", "margin", "max_iterations"},
                              "study design");
  StudyDesign d;
  if (j.contains("k")) d.k = j.at("k").get<int>();
  if (j.contains("replicates")) d.replicates = j.at("replicates").get<Eigen::Index>();
  if (j.contains("repetitions")) d.repetitions = j.at("repetitions").get<int>();
  if (j.contains("theta")) d.theta = detail::numbers_from(j.at("theta"), "study design.theta");
  if (j.contains("procedure")) d.procedure = j.at("procedure").get<int>();
  if (j.contains("seed")) d.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("max_iterations")) d.max_iterations = j.at("max_iterations").get<int>();
  if (j.contains("margin")) d.margin = margin_from_json(j.at("margin"));
  return d;
}

inline Json to_json(const StudySummary& s) {
  return {{"names", s.names},
          {"truth", s.truth},
          {"mean", detail::numbers(s.mean)},
          {"bias", detail::numbers(s.bias)},
          {"sd", detail::numbers(s.sd)},
          {"sd_available", s.sd_available},
          {"failures", s.failures},
          {"repetitions", s.repetitions.size()}};
}

}  // namespace fcop
