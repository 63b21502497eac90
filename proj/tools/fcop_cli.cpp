#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fcop/inference.hpp"
#include "fcop/io.hpp"
#include "fcop/prediction.hpp"
#include "fcop/simulation.hpp"
#include "fcop/tail.hpp"

namespace fs = std::filesystem;
using namespace fcop;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kConfig = 2, kNumeric = 3, kNotConverged = 4 };

struct Common {
  std::string locations;
  std::string grid;
  std::string model;
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 1;
  int threads = 1;
};

struct SimulateOpts {
  Eigen::Index replicates = 100;
  std::string scale = "auto";
};

struct FitOpts {
  std::string data;
  int procedure = 1;
  bool gaussian = false;
  bool no_se = false;
  bool trace = false;
  std::string margin;
  int max_iterations = 200;
  double gradient_tol = 1e-6;
};

struct PredictOpts {
  std::string fit;
  std::string data;
  int row = 0;
  std::string target_grid = "60x60";
  std::string targets;
  std::string bbox = "0,1,0,1";
  std::string quantiles = "0.05,0.5,0.95";
};

struct DiagnoseOpts {
  std::string data;
  std::vector<std::string> fits;
  std::string q_grid;
  std::string pair = "0,1";
  Eigen::Index draws = 100000;
};

struct StudyOpts {
  std::string design;
  std::string kind = "bias_sd";
  int repetitions = 0;
  Eigen::Index replicates = 0;
  int procedure = 0;
  int k = 0;
};

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError(what + ": bad number '" + cell + "'");
    }
  }
  if (v.empty()) throw ConfigError(what + ": empty list");
  return v;
}

int parse_grid(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw ConfigError("grid must look like KxK, got '" + s + "'");
  int a = 0;
  int b = 0;
  try {
    a = std::stoi(s.substr(0, x));
    b = std::stoi(s.substr(x + 1));
  } catch (const std::exception&) {
    throw ConfigError("grid must look like KxK, got '" + s + "'");
  }
  if (a != b || a < 1) throw ConfigError("grid must be square with K >= 1, got '" + s + "'");
  return a;
}

LocationSet rect_grid(const std::string& spec, const std::string& bbox) {
  const int k = parse_grid(spec);
  const auto b = parse_list(bbox, "bbox");
  if (b.size() != 4 || !(b[0] < b[1]) || !(b[2] < b[3])) throw ConfigError("bbox must be xmin,xmax,ymin,ymax");
  Matrix c(k * k, 2);
  int r = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j, ++r) {
      c(r, 0) = k == 1 ? 0.5 * (b[0] + b[1]) : b[0] + (b[1] - b[0]) * j / (k - 1);
      c(r, 1) = k == 1 ? 0.5 * (b[2] + b[3]) : b[2] + (b[3] - b[2]) * i / (k - 1);
    }
  return LocationSet(std::move(c));
}

LocationSet resolve_locations(const Common& c) {
  if (!c.locations.empty() && !c.grid.empty()) throw ConfigError("give either --locations or --grid, not both");
  if (!c.locations.empty()) return read_locations_csv(c.locations);
  if (!c.grid.empty()) return LocationSet::grid(parse_grid(c.grid));
  throw ConfigError("sites required: pass --locations or --grid");
}

ModelConfig resolve_model(const Common& c) {
  if (c.model.empty()) throw ConfigError("--model is required");
  if (!fs::exists(c.model)) throw ConfigError("model file not found: " + c.model);
  return model_config_from_json(read_json(c.model));
}

fs::path out_dir(const Common& c) {
  fs::path p(c.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory " + c.out);
  return p;
}

std::string level_name(double p) {
  const double pct = 100.0 * p;
  char buf[32];
  if (std::abs(pct - std::round(pct)) < 1e-9)
    std::snprintf(buf, sizeof buf, "q%02d", static_cast<int>(std::round(pct)));
  else
    std::snprintf(buf, sizeof buf, "q%g", pct);
  return buf;
}

Json sites_json(const LocationSet& loc) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < loc.size(); ++i) {
    std::vector<double> x(loc.coords().cols());
    for (Eigen::Index d = 0; d < loc.coords().cols(); ++d) x[static_cast<std::size_t>(d)] = loc.coords()(i, d);
    a.push_back({{"id", loc.labels()[static_cast<std::size_t>(i)]}, {"coords", x}});
  }
  return a;
}

void check_site_columns(const CsvTable& t, const LocationSet& loc, const std::string& path) {
  if (t.values.cols() != loc.size())
    throw DimensionMismatch(path + ": " + std::to_string(t.values.cols()) + " columns but " + std::to_string(loc.size()) + " sites");
}

// Data on the copula scale implied by a fit's procedure.
Matrix to_copula_scale(const Matrix& y, const FitResult& f) {
  switch (f.procedure) {
    case 1: return y;
    case 2: return rank_transform(y);
    default: return parametric_transform(y, f.margin);
  }
}

int cmd_simulate(const Common& c, const SimulateOpts& o) {
  const LocationSet loc = resolve_locations(c);
  const ModelConfig mc = resolve_model(c);
  const FactorCopulaModel m(mc.corr, mc.factor, loc);
  std::string scale = o.scale;
  if (scale == "auto") scale = mc.margin && mc.margin->kind == MarginalKind::parametric_student_t ? "margin" : "uniform";
  if (scale != "uniform" && scale != "w" && scale != "margin") throw ConfigError("--scale must be uniform, w or margin");
  if (scale == "margin" && !(mc.margin && mc.margin->kind == MarginalKind::parametric_student_t))
    throw ConfigError("--scale margin needs a student_t margin in the model file");
  Matrix y = sample_replicates(m, o.replicates, c.seed);
  if (scale != "w") y = to_uniform(m.factor(), y, c.threads);
  if (scale == "margin")
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = student_t_quantile(y(i), *mc.margin);
  const fs::path dir = out_dir(c);
  write_csv((dir / "replicates.csv").string(), loc.labels(), y);
  write_json((dir / "provenance.json").string(), {{"command", "simulate"},
                                                   {"version", kVersion},
                                                   {"seed", c.seed},
                                                   {"replicates", o.replicates},
                                                   {"scale", scale},
                                                   {"model", to_json(mc)},
                                                   {"sites", sites_json(loc)}});
  return kOk;
}

int cmd_fit(const Common& c, const FitOpts& o) {
  const LocationSet loc = resolve_locations(c);
  const ModelConfig mc = resolve_model(c);
  if (o.data.empty()) throw ConfigError("--data is required");
  const CsvTable t = read_csv(o.data);
  check_site_columns(t, loc, o.data);
  if (o.procedure >= 3) {
    const bool have = o.margin == "student_t" || (mc.margin && mc.margin->kind == MarginalKind::parametric_student_t);
    if (!have) throw ConfigError("procedure " + std::to_string(o.procedure) + " needs a parametric margin (--margin student_t)");
  }
  if (!o.margin.empty() && o.margin != "student_t") throw ConfigError("--margin accepts only student_t");
  FitConfig cfg;
  cfg.procedure = o.procedure;
  cfg.standard_errors = !o.no_se;
  cfg.threads = c.threads;
  cfg.max_iterations = o.max_iterations;
  cfg.gradient_tol = o.gradient_tol;
  const FactorSpec form = o.gaussian ? FactorSpec::gaussian() : mc.factor;
  const FitResult r = fit(t.values, loc, mc.corr.family(), form, cfg);
  const fs::path dir = out_dir(c);
  Json j = to_json(r);
  j["sites"] = sites_json(loc);
  j["version"] = kVersion;
  write_json((dir / "fit.json").string(), j);
  if (o.trace) {
    Matrix tr(static_cast<Eigen::Index>(r.trace.size()), 4);
    for (std::size_t i = 0; i < r.trace.size(); ++i)
      tr.row(static_cast<Eigen::Index>(i)) << r.trace[i].iteration, r.trace[i].objective, r.trace[i].gradient_norm, r.trace[i].halvings;
    write_csv((dir / "trace.csv").string(), {"iteration", "objective", "gradient_norm", "halvings"}, tr);
  }
  if (!r.converged) {
    std::cerr << "fcop fit: optimizer did not converge after " << r.iterations << " iterations (result written)\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_predict(const Common& c, const PredictOpts& o) {
  if (o.fit.empty()) throw ConfigError("--fit is required");
  if (o.data.empty()) throw ConfigError("--data is required");
  const Json fj = read_json(o.fit);
  const FitResult f = fit_result_from_json(fj);
  const LocationSet loc = resolve_locations(c);
  const CsvTable t = read_csv(o.data);
  check_site_columns(t, loc, o.data);
  if (o.row < 0 || o.row >= t.values.rows()) throw ConfigError("--row out of range for " + o.data);
  const Matrix u = to_copula_scale(t.values, f);
  PredictionRequest req{f.model(loc), u.row(o.row).transpose(),
                        o.targets.empty() ? rect_grid(o.target_grid, o.bbox) : read_locations_csv(o.targets)};
  req.quantile_levels = parse_list(o.quantiles, "--quantiles");
  std::sort(req.quantile_levels.begin(), req.quantile_levels.end());
  if (f.procedure >= 3) req.margin = f.margin;
  req.threads = c.threads;
  const PredictionSurface s = predict_grid(req);

  const Eigen::Index dim = req.targets.coords().cols();
  std::vector<std::string> header;
  for (Eigen::Index d = 0; d < dim; ++d) header.push_back(dim == 2 ? (d == 0 ? "x" : "y") : "x" + std::to_string(d + 1));
  for (double p : req.quantile_levels) header.push_back(level_name(p));
  header.push_back("mean");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Matrix out(static_cast<Eigen::Index>(s.sites.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < s.sites.size(); ++i) {
    const auto& sp = s.sites[i];
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index d = 0; d < dim; ++d) out(r, d) = sp.coords(d);
    for (std::size_t k = 0; k < req.quantile_levels.size(); ++k)
      out(r, dim + static_cast<Eigen::Index>(k)) = sp.ok ? sp.quantiles[k] : nan;
    out(r, out.cols() - 1) = sp.ok ? sp.mean : nan;
  }
  const fs::path dir = out_dir(c);
  write_csv((dir / "predictions.csv").string(), header, out);
  for (const auto& sp : s.sites)
    if (!sp.ok) std::cerr << "fcop predict: site " << sp.id << ": " << sp.error << '\n';
  if (static_cast<double>(s.failures) > 0.01 * static_cast<double>(s.sites.size())) {
    std::cerr << "fcop predict: " << s.failures << " of " << s.sites.size() << " sites failed\n";
    return kNumeric;
  }
  return kOk;
}

int cmd_diagnose(const Common& c, const DiagnoseOpts& o) {
  if (o.data.empty()) throw ConfigError("--data is required");
  if (o.fits.empty()) throw ConfigError("at least one --fit is required");
  const LocationSet loc = resolve_locations(c);
  const CsvTable t = read_csv(o.data);
  check_site_columns(t, loc, o.data);
  const auto pair = parse_list(o.pair, "--pair");
  if (pair.size() != 2) throw ConfigError("--pair must name two site indices");
  const auto i = static_cast<Eigen::Index>(pair[0]);
  const auto j = static_cast<Eigen::Index>(pair[1]);
  if (i < 0 || j < 0 || i >= loc.size() || j >= loc.size() || i == j) throw ConfigError("--pair indices out of range");

  const DependenceMatrices emp = dependence_matrices(t.values);
  std::vector<double> q_grid;
  if (!o.q_grid.empty()) q_grid = parse_list(o.q_grid, "--q-grid");
  const fs::path dir = out_dir(c);

  Json models = Json::array();
  Matrix delta(static_cast<Eigen::Index>(o.fits.size()), 6);
  for (std::size_t k = 0; k < o.fits.size(); ++k) {
    const FitResult f = fit_result_from_json(read_json(o.fits[k]));
    const FactorCopulaModel m = f.model(loc);
    const DeltaMetrics d = delta_metrics(emp, model_dependence_matrices(m, o.draws, derive_seed(c.seed, 2 * k)));
    delta.row(static_cast<Eigen::Index>(k)) << d.rho, d.rho_abs, d.lower, d.lower_abs, d.upper, d.upper_abs;
    Json entry{{"fit", o.fits[k]}, {"delta", to_json(d)}, {"model", to_json(ModelConfig{f.factor, f.corr, std::nullopt})}};
    if (!q_grid.empty()) {
      const TailReport r = tail_report(m, q_grid, o.draws, derive_seed(c.seed, 2 * k + 1), i, j, c.threads);
      entry["tail_report"] = to_json(r);
      Matrix qc(static_cast<Eigen::Index>(r.q.size()), 4);
      for (std::size_t a = 0; a < r.q.size(); ++a)
        qc.row(static_cast<Eigen::Index>(a)) << r.q[a], r.lambda_l[a], r.lambda_u[a], r.asymmetry[a];
      write_csv((dir / ("tail_q_" + std::to_string(k) + ".csv")).string(), {"q", "lambda_L", "lambda_U", "A"}, qc);
    }
    models.push_back(entry);
  }
  write_csv((dir / "delta.csv").string(),
            {"delta_rho", "abs_delta_rho", "delta_L", "abs_delta_L", "delta_U", "abs_delta_U"}, delta);
  write_json((dir / "diagnose.json").string(), {{"version", kVersion},
                                                 {"seed", c.seed},
                                                 {"data", o.data},
                                                 {"pair", {i, j}},
                                                 {"empirical_pair",
                                                  {{"spearman_rho", emp.rho_s(i, j)},
                                                   {"alpha_L", emp.alpha_l(i, j)},
                                                   {"alpha_U", emp.alpha_u(i, j)}}},
                                                 {"models", models}});
  return kOk;
}

int cmd_study(const Common& c, const StudyOpts& o) {
  const fs::path dir = out_dir(c);
  if (o.kind == "misspecification") {
    MisspecificationDesign d{misspecification_truth(), misspecification_candidates()};
    d.seed = c.seed;
    d.threads = c.threads;
    if (o.replicates > 0) d.replicates = o.replicates;
    const auto t = run_misspecification_study(d);
    Json rows = Json::array();
    Matrix delta(static_cast<Eigen::Index>(t.rows.size()), 6);
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      const auto& r = t.rows[k];
      delta.row(static_cast<Eigen::Index>(k)) << r.delta.rho, r.delta.rho_abs, r.delta.lower, r.delta.lower_abs, r.delta.upper,
          r.delta.upper_abs;
      rows.push_back({{"name", r.name}, {"fit", to_json(r.fit)}, {"delta", to_json(r.delta)}});
    }
    write_csv((dir / "misspecification_delta.csv").string(),
              {"delta_rho", "abs_delta_rho", "delta_L", "abs_delta_L", "delta_U", "abs_delta_U"}, delta);
    write_json((dir / "misspecification_summary.json").string(),
               {{"version", kVersion}, {"seed", c.seed}, {"replicates", d.replicates}, {"candidates", rows}});
    return kOk;
  }
  if (o.kind != "bias_sd") throw ConfigError("--kind must be bias_sd or misspecification");
  StudyDesign d;
  if (!o.design.empty()) {
    if (!fs::exists(o.design)) throw ConfigError("design file not found: " + o.design);
    d = study_design_from_json(read_json(o.design));
  } else {
    d.seed = c.seed;
  }
  if (o.repetitions > 0) d.repetitions = o.repetitions;
  if (o.replicates > 0) d.replicates = o.replicates;
  if (o.procedure > 0) d.procedure = o.procedure;
  if (o.k > 0) d.k = o.k;
  if (!c.grid.empty()) d.k = parse_grid(c.grid);
  d.threads = c.threads;
  const StudySummary s = run_bias_sd_study(d);

  std::vector<std::string> header{"repetition", "converged"};
  header.insert(header.end(), s.names.begin(), s.names.end());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Matrix reps(static_cast<Eigen::Index>(s.repetitions.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t r = 0; r < s.repetitions.size(); ++r) {
    const auto& rep = s.repetitions[r];
    const auto row = static_cast<Eigen::Index>(r);
    reps(row, 0) = rep.index;
    reps(row, 1) = rep.converged ? 1.0 : 0.0;
    for (std::size_t p = 0; p < s.names.size(); ++p)
      reps(row, 2 + static_cast<Eigen::Index>(p)) = p < rep.estimates.size() ? rep.estimates[p] : nan;
  }
  write_csv((dir / "study_repetitions.csv").string(), header, reps);
  write_json((dir / "study_summary.json").string(), {{"version", kVersion}, {"design", to_json(d)}, {"summary", to_json(s)}});
  if (s.failures * 10 > d.repetitions) {
    std::cerr << "fcop study: " << s.failures << " of " << d.repetitions << " repetitions failed\n";
    return kNumeric;
  }
  return kOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--locations", c.locations, "Sites CSV with header id,x,y");
  sub->add_option("--grid", c.grid, "Uniform KxK grid on the unit square");
  sub->add_option("--model", c.model, "Model JSON");
  sub->add_option("--seed", c.seed, "Master seed");
  sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--config", c.config, "JSON file of option values; flags take precedence");
}

// Appends options from the JSON config of the chosen subcommand that were not given as flags.
std::vector<std::string> config_arguments(CLI::App* sub, const std::string& path) {
  const Json j = read_json(path);
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  std::vector<std::string> extra;
  for (const auto& [key, value] : j.items()) {
    if (key == "config") throw ConfigError(path + ": 'config' cannot be nested");
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw ConfigError(path + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    auto push = [&](const Json& v) {
      extra.push_back("--" + key);
      extra.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    };
    if (opt->get_expected_max() == 0) {
      if (!value.is_boolean()) throw ConfigError(path + ": key '" + key + "' must be true or false");
      if (value.get<bool>()) extra.push_back("--" + key);
    } else if (value.is_array()) {
      for (const auto& v : value) push(v);
    } else {
      push(value);
    }
  }
  return extra;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor copula models for replicated spatial data"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  SimulateOpts so;
  FitOpts fo;
  PredictOpts po;
  DiagnoseOpts dop;
  StudyOpts sto;

  auto* sim = app.add_subcommand("simulate", "Simulate replicates from a model");
  add_common(sim, common);
  sim->add_option("--replicates,-N", so.replicates, "Number of replicates")->check(CLI::PositiveNumber);
  sim->add_option("--scale", so.scale, "Output scale: uniform, w, margin or auto");

  auto* fit_cmd = app.add_subcommand("fit", "Fit a factor copula model");
  add_common(fit_cmd, common);
  fit_cmd->add_option("--data", fo.data, "Replicates CSV");
  fit_cmd->add_option("--procedure", fo.procedure, "Estimation procedure")->check(CLI::Range(1, 4));
  fit_cmd->add_flag("--gaussian", fo.gaussian, "Fit the Gaussian copula baseline");
  fit_cmd->add_flag("--no-se", fo.no_se, "Skip standard errors");
  fit_cmd->add_flag("--trace", fo.trace, "Write the optimizer trace CSV");
  fit_cmd->add_option("--margin", fo.margin, "Parametric margin for procedures 3 and 4 (student_t)");
  fit_cmd->add_option("--max-iterations", fo.max_iterations, "Optimizer iteration limit")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--gradient-tol", fo.gradient_tol, "Gradient norm tolerance")->check(CLI::PositiveNumber);

  auto* pred = app.add_subcommand("predict", "Conditional quantiles on a target grid");
  add_common(pred, common);
  pred->add_option("--fit", po.fit, "Fit result JSON");
  pred->add_option("--data", po.data, "Replicates CSV");
  pred->add_option("--row", po.row, "Zero-based replicate that conditions the prediction");
  pred->add_option("--target-grid", po.target_grid, "Target grid KxK");
  pred->add_option("--targets", po.targets, "Target sites CSV (overrides --target-grid)");
  pred->add_option("--bbox", po.bbox, "Target grid bounds xmin,xmax,ymin,ymax");
  pred->add_option("--quantiles", po.quantiles, "Quantile levels");

  auto* diag = app.add_subcommand("diagnose", "Tail diagnostics and dependence deltas");
  add_common(diag, common);
  diag->add_option("--data", dop.data, "Replicates CSV");
  diag->add_option("--fit", dop.fits, "Fit result JSON (repeatable)");
  diag->add_option("--q-grid", dop.q_grid, "Levels q for lambda_q curves");
  diag->add_option("--pair", dop.pair, "Site pair i,j for the tail report");
  diag->add_option("--draws", dop.draws, "Model simulation draws")->check(CLI::Range(Eigen::Index{10000}, Eigen::Index{100000000}));

  auto* study = app.add_subcommand("study", "Replicated simulation studies");
  add_common(study, common);
  study->add_option("--design", sto.design, "Study design JSON");
  study->add_option("--kind", sto.kind, "bias_sd or misspecification");
  study->add_option("--repetitions", sto.repetitions, "Override repetition count");
  study->add_option("--replicates,-N", sto.replicates, "Override replicate count");
  study->add_option("--procedure", sto.procedure, "Override procedure")->check(CLI::Range(1, 4));
  study->add_option("--k", sto.k, "Override grid size");

  try {
    try {
      app.parse(argc, argv);
      if (!common.config.empty()) {
        CLI::App* sub = app.get_subcommands().front();
        const std::vector<std::string> extra = config_arguments(sub, common.config);
        if (!extra.empty()) {
          std::vector<std::string> args(argv + 1, argv + argc);
          args.insert(args.end(), extra.begin(), extra.end());
          std::reverse(args.begin(), args.end());
          app.parse(args);
        }
      }
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? kOk : kConfig;
    }
    if (sim->parsed()) return cmd_simulate(common, so);
    if (fit_cmd->parsed()) return cmd_fit(common, fo);
    if (pred->parsed()) return cmd_predict(common, po);
    if (diag->parsed()) return cmd_diagnose(common, dop);
    if (study->parsed()) return cmd_study(common, sto);
  } catch (const NumericError& e) {
    std::cerr << "fcop: numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const ConfigError& e) {
    std::cerr << "fcop: configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "fcop: " << e.what() << '\n';
    return kConfig;
  } catch (const Json::exception& e) {
    std::cerr << "fcop: configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "fcop: " << e.what() << '\n';
    return kNumeric;
  }
  return kConfig;
}
