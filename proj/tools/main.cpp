// Command-line front-end: simulate benchmark datasets, fit the three
// estimators, evaluate AUC curves, run Monte-Carlo studies, and emit
// Weibull-adequacy diagnostics. Exit codes: 0 success, 1 usage error,
// 2 data or fit error.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "idmauc/auc.hpp"
#include "idmauc/fit.hpp"
#include "idmauc/io.hpp"
#include "idmauc/simulate.hpp"
#include "idmauc/study.hpp"

namespace {

using namespace idmauc;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- option parsing helpers -------------------------------------------------

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " from '" + text + "'");
  }
}

// "12,36,60" or "12..120:12" (inclusive endpoints).
std::vector<double> parse_grid(const std::string& text, const std::string& what) {
  std::vector<double> grid;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    auto colon = text.find(':', dots);
    if (colon == std::string::npos)
      throw UsageError(what + ": range syntax is a..b:step, got '" + text + "'");
    double a = parse_number(text.substr(0, dots), what);
    double b = parse_number(text.substr(dots + 2, colon - dots - 2), what);
    double step = parse_number(text.substr(colon + 1), what);
    if (!(step > 0.0) || b < a)
      throw UsageError(what + ": range needs a <= b and step > 0");
    for (double t = a; t <= b + 1e-9 * step; t += step) grid.push_back(t);
  } else {
    for (const auto& part : split(text, ','))
      if (!part.empty()) grid.push_back(parse_number(part, what));
  }
  if (grid.empty()) throw UsageError(what + ": empty grid");
  return grid;
}

std::vector<std::string> parse_scenarios(const std::string& text) {
  std::vector<std::string> names;
  auto valid = [](const std::string& n) {
    return n.size() == 1 && n[0] >= 'A' && n[0] <= 'R';
  };
  if (auto dots = text.find(".."); dots != std::string::npos) {
    std::string lo = text.substr(0, dots);
    std::string hi = text.substr(dots + 2);
    if (!valid(lo) || !valid(hi) || hi[0] < lo[0])
      throw UsageError("scenario range must be like A..F (names run A to R)");
    for (char c = lo[0]; c <= hi[0]; ++c) names.emplace_back(1, c);
  } else {
    for (const auto& part : split(text, ',')) {
      if (!valid(part))
        throw UsageError("unknown scenario '" + part + "'; valid names are A..R");
      names.push_back(part);
    }
  }
  return names;
}

std::ofstream open_output_file(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

// Runs `body(stream)` with either a file stream or std::cout for "-".
template <typename Body>
void with_output(const std::string& path, Body&& body) {
  if (path == "-") {
    body(std::cout);
  } else {
    auto out = open_output_file(path);
    body(out);
  }
}

std::vector<ObservedRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  auto named = read_records(in);
  std::vector<ObservedRecord> records;
  records.reserve(named.size());
  for (auto& n : named) records.push_back(std::move(n.record));
  return records;
}

// --- fit file format ---------------------------------------------------------
// Three-column CSV (key,name,value). Scalar rows leave name empty; hazard
// jumps and per-parameter rows use name for the label/time.

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_fit_file(const MleFit& fit, const std::string& model_kind,
                    bool pwc_proportional, std::ostream& out) {
  out << "key,name,value\n";
  out << "model,," << model_kind << "\n";
  out << "converged,," << (fit.converged ? 1 : 0) << "\n";
  out << "iterations,," << fit.iterations << "\n";
  out << "loglik,," << fmt(fit.loglik) << "\n";
  for (std::size_t i = 0; i < fit.params.size(); ++i)
    out << "param," << fit.param_names[i] << ',' << fmt(fit.params[i]) << "\n";
  for (std::size_t i = 0; i < fit.stderrs.size(); ++i)
    out << "stderr," << fit.param_names[i] << ',' << fmt(fit.stderrs[i]) << "\n";
  if (model_kind == "pwc" || model_kind == "pwc-panel") {
    auto list = [](const std::vector<double>& v) {
      std::ostringstream os;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ';';
        os << fmt(v[i]);
      }
      return os.str();
    };
    const auto& h01 = std::get<PiecewiseConstantHazard>(fit.model.h01);
    const auto& h02 = std::get<PiecewiseConstantHazard>(fit.model.h02);
    const auto& h12 = std::get<PiecewiseConstantHazard>(fit.model.h12);
    out << "proportional,," << (pwc_proportional ? 1 : 0) << "\n";
    if (pwc_proportional)
      out << "param,hazard_ratio," << fmt(std::exp(fit.params.back())) << "\n";
    out << "cutpoints,01," << list(h01.cutpoints) << "\n";
    out << "cutpoints,02," << list(h02.cutpoints) << "\n";
    out << "cutpoints,12," << list(h12.cutpoints) << "\n";
    out << "rates,01," << list(h01.rates) << "\n";
    out << "rates,02," << list(h02.rates) << "\n";
    out << "rates,12," << list(h12.rates) << "\n";
  }
  for (const auto& w : fit.warnings) out << "warning,," << w << "\n";
}

void write_fit_file(const CoxTdFit& fit, std::ostream& out) {
  out << "key,name,value\n";
  out << "model,,cox\n";
  out << "converged,,1\n";
  out << "iterations,," << fit.iterations << "\n";
  out << "loglik,," << fmt(fit.loglik) << "\n";
  out << "param,beta," << fmt(fit.beta) << "\n";
  out << "stderr,beta," << fmt(fit.beta_se) << "\n";
  out << "param,hazard_ratio," << fmt(std::exp(fit.beta)) << "\n";
  for (std::size_t i = 0; i < fit.cumhaz01.jump_times.size(); ++i)
    out << "cumhaz01," << fmt(fit.cumhaz01.jump_times[i]) << ','
        << fmt(fit.cumhaz01.increments[i]) << "\n";
  for (std::size_t i = 0; i < fit.baseline02.jump_times.size(); ++i)
    out << "baseline02," << fmt(fit.baseline02.jump_times[i]) << ','
        << fmt(fit.baseline02.increments[i]) << "\n";
}

struct LoadedFit {
  std::string model;
  std::optional<CoxTdFit> cox;
  std::optional<IllnessDeathModel> smooth;
};

LoadedFit read_fit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw IoError("fit file: empty input");
  if (line != "key,name,value" && line != "key,name,value\r")
    throw IoError("fit file: expected header 'key,name,value'");

  std::map<std::string, std::string> scalars;
  std::map<std::string, double> params;
  std::map<std::string, std::string> lists;  // "cutpoints,01" etc.
  CoxTdFit cox;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto parts = split(line, ',');
    if (parts.size() != 3) throw IoError("fit file line " + std::to_string(line_no) +
                                         ": expected 3 fields");
    const std::string& key = parts[0];
    const std::string& name = parts[1];
    const std::string& value = parts[2];
    if (key == "param") {
      params[name] = parse_number(value, "fit parameter " + name);
    } else if (key == "cumhaz01" || key == "baseline02") {
      double t = parse_number(name, "jump time");
      double inc = parse_number(value, "jump increment");
      auto& h = key == "cumhaz01" ? cox.cumhaz01 : cox.baseline02;
      h.jump_times.push_back(t);
      h.increments.push_back(inc);
    } else if (key == "cutpoints" || key == "rates") {
      lists[key + "," + name] = value;
    } else if (key != "stderr" && key != "warning") {
      scalars[key] = value;
    }
  }

  LoadedFit out;
  auto model_it = scalars.find("model");
  if (model_it == scalars.end()) throw IoError("fit file: missing model row");
  out.model = model_it->second;

  if (out.model == "cox") {
    cox.beta = params.at("beta");
    out.cox = std::move(cox);
  } else if (out.model == "weibull") {
    IllnessDeathModel m;
    m.h01 = WeibullHazard{params.at("alpha01"), params.at("shape01")};
    m.h02 = WeibullHazard{params.at("alpha02"), params.at("shape02")};
    m.h12 = WeibullHazard{params.at("alpha12"), params.at("shape12")};
    out.smooth = m;
  } else if (out.model == "pwc" || out.model == "pwc-panel") {
    auto parse_list = [&lists](const std::string& key) {
      auto it = lists.find(key);
      if (it == lists.end()) throw IoError("fit file: missing row '" + key + "'");
      std::vector<double> v;
      if (!it->second.empty())
        for (const auto& part : split(it->second, ';'))
          v.push_back(parse_number(part, key));
      return v;
    };
    IllnessDeathModel m;
    m.h01 = PiecewiseConstantHazard{parse_list("cutpoints,01"), parse_list("rates,01")};
    m.h02 = PiecewiseConstantHazard{parse_list("cutpoints,02"), parse_list("rates,02")};
    m.h12 = PiecewiseConstantHazard{parse_list("cutpoints,12"), parse_list("rates,12")};
    out.smooth = m;
  } else {
    throw IoError("fit file: unknown model '" + out.model + "'");
  }
  return out;
}

// --- commands ----------------------------------------------------------------

struct SimulateOptions {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string paths_out;
  // explicit-config options (used when --scenario is absent)
  std::size_t n = 0;
  double tau = 0.0;
  double followup = 120.0;
  std::string censoring = "unif:60,120";
  double shape = 0.5, alpha01 = 0.05, alpha02 = 0.05, alpha12 = 0.56;
};

ScenarioConfig build_config(const SimulateOptions& opt) {
  if (!opt.scenario.empty()) {
    for (const auto& s : scenario_table())
      if (s.name == opt.scenario) return s.config;
    throw UsageError("unknown scenario '" + opt.scenario + "'; valid names are A..R");
  }
  if (opt.n == 0 || !(opt.tau > 0.0))
    throw UsageError("explicit config needs --n and --tau (or use --scenario)");
  ScenarioConfig cfg;
  cfg.n_subjects = opt.n;
  cfg.visit_interval = opt.tau;
  cfg.followup_length = opt.followup;
  cfg.weibull = SharedShapeWeibull{opt.shape, opt.alpha01, opt.alpha02, opt.alpha12};
  auto parts = split(opt.censoring, ':');
  if (parts.size() == 2 && parts[0] == "admin") {
    cfg.censoring = AdministrativeCensoring{parse_number(parts[1], "censoring end")};
  } else if (parts.size() == 2 && parts[0] == "unif") {
    auto range = split(parts[1], ',');
    if (range.size() != 2) throw UsageError("uniform censoring syntax: unif:LO,HI");
    cfg.censoring = UniformCensoring{parse_number(range[0], "censoring lower"),
                                     parse_number(range[1], "censoring upper")};
  } else {
    throw UsageError("censoring must be admin:END or unif:LO,HI, got '" + opt.censoring + "'");
  }
  return cfg;
}

std::string sibling_paths_file(const std::string& out_path) {
  auto slash = out_path.find_last_of('/');
  auto dot = out_path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return out_path + ".paths.csv";
  return out_path.substr(0, dot) + ".paths" + out_path.substr(dot);
}

int cmd_simulate(const SimulateOptions& opt) {
  ScenarioConfig cfg = build_config(opt);
  cfg.seed = opt.seed;
  auto subjects = generate_dataset(cfg);

  std::vector<NamedRecord> records;
  std::vector<NamedPath> paths;
  records.reserve(subjects.size());
  paths.reserve(subjects.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    std::string id = "s" + std::to_string(i + 1);
    records.push_back({id, std::move(subjects[i].record)});
    paths.push_back({id, subjects[i].path});
  }

  auto out = open_output_file(opt.out_path);
  write_records(records, out);
  std::string paths_path = opt.paths_out.empty() ? sibling_paths_file(opt.out_path) : opt.paths_out;
  auto paths_out = open_output_file(paths_path);
  write_paths(paths, paths_out);
  std::cerr << "wrote " << records.size() << " subjects to " << opt.out_path
            << " (true paths: " << paths_path << ")\n";
  return 0;
}

struct FitOptions {
  std::string input;
  std::string model;
  std::string cutpoints = "6,30,60,90";
  bool proportional = false;
  std::string out_path = "-";
};

int cmd_fit(const FitOptions& opt) {
  auto records = load_records(opt.input);
  if (opt.model == "cox") {
    CoxTdFit fit = fit_cox_td(records);
    with_output(opt.out_path, [&](std::ostream& out) { write_fit_file(fit, out); });
    std::cerr << "cox fit: beta = " << fit.beta << " (HR " << std::exp(fit.beta) << "), "
              << fit.iterations << " Newton steps\n";
  } else if (opt.model == "weibull") {
    MleFit fit = fit_weibull_ic(records);
    with_output(opt.out_path, [&](std::ostream& out) { write_fit_file(fit, "weibull", false, out); });
    std::cerr << "weibull fit: loglik = " << fit.loglik
              << (fit.converged ? "" : " (NOT converged)") << ", " << fit.iterations
              << " iterations\n";
  } else if (opt.model == "pwc") {
    PwcSpec spec;
    spec.cutpoints01 = spec.cutpoints02 = spec.cutpoints12 =
        parse_grid(opt.cutpoints, "--cutpoints");
    spec.proportional = opt.proportional;
    MleFit fit = fit_pwc_ic(records, spec);
    with_output(opt.out_path,
                [&](std::ostream& out) { write_fit_file(fit, "pwc", spec.proportional, out); });
    std::cerr << "pwc fit: loglik = " << fit.loglik
              << (fit.converged ? "" : " (NOT converged)") << ", " << fit.iterations
              << " iterations\n";
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
  } else if (opt.model == "pwc-panel") {
    MleFit fit = fit_pwc_panel(records, parse_grid(opt.cutpoints, "--cutpoints"));
    with_output(opt.out_path,
                [&](std::ostream& out) { write_fit_file(fit, "pwc-panel", true, out); });
    std::cerr << "pwc-panel fit: loglik = " << fit.loglik << ", HR "
              << std::exp(fit.params.back()) << (fit.converged ? "" : " (NOT converged)")
              << ", " << fit.iterations << " iterations\n";
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
  } else {
    throw UsageError("unknown model '" + opt.model + "' (expected cox, pwc, pwc-panel, weibull)");
  }
  return 0;
}

struct AucOptions {
  std::string fit_path;
  bool truth = false;
  std::string definition;
  std::string grid;
  double window = 0.0;
  bool window_set = false;
  double shape = 0.5, alpha01 = 0.05, alpha02 = 0.05, alpha12 = 0.56;
  std::string out_path = "-";
};

int cmd_auc(const AucOptions& opt) {
  if (opt.truth == !opt.fit_path.empty())
    throw UsageError("need exactly one of --fit FILE or --truth");
  AucDefinition def;
  if (opt.definition == "id") {
    def = AucDefinition::IncidentDynamic;
  } else if (opt.definition == "cd") {
    def = AucDefinition::CumulativeDynamic;
  } else {
    throw UsageError("--definition must be id or cd");
  }
  if (def == AucDefinition::CumulativeDynamic && !opt.window_set)
    throw UsageError("--definition cd needs --window");
  std::optional<double> window;
  if (def == AucDefinition::CumulativeDynamic) window = opt.window;
  auto grid = parse_grid(opt.grid, "--grid");

  AucCurve curve;
  if (opt.truth) {
    IllnessDeathModel truth =
        truth_model(SharedShapeWeibull{opt.shape, opt.alpha01, opt.alpha02, opt.alpha12});
    curve = auc_model_based(truth, def, grid, window, "truth");
  } else {
    LoadedFit fit = read_fit_file(opt.fit_path);
    if (fit.cox) {
      curve = auc_model_based(*fit.cox, def, grid, window);
    } else {
      curve = auc_model_based(*fit.smooth, def, grid, window, fit.model);
    }
  }
  with_output(opt.out_path, [&](std::ostream& out) { write_curve(curve, out); });
  for (double t : curve.skipped)
    std::cerr << "note: grid point " << t << " skipped (degenerate probability)\n";
  return 0;
}

struct StudyCliOptions {
  std::string scenarios;
  std::string estimators = "cox-prob,cox-riskset,pwc,weibull";
  std::size_t reps = 200;
  std::uint64_t seed = 0;
  std::string id_grid = "12,36,60";
  std::string cd_grid;
  double window = 0.0;
  bool window_set = false;
  std::string cutpoints = "6,30,60,90";
  int threads = 0;
  std::string out_path = "-";
};

int cmd_study(const StudyCliOptions& opt) {
  auto names = parse_scenarios(opt.scenarios);
  std::vector<Estimator> estimators;
  for (const auto& label : split(opt.estimators, ',')) {
    try {
      estimators.push_back(estimator_from_label(label));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  std::vector<AucTarget> targets;
  if (!opt.id_grid.empty())
    for (double t : parse_grid(opt.id_grid, "--id-grid"))
      targets.push_back({AucDefinition::IncidentDynamic, t, std::nullopt});
  if (!opt.cd_grid.empty()) {
    if (!opt.window_set) throw UsageError("--cd-grid needs --window");
    for (double t : parse_grid(opt.cd_grid, "--cd-grid"))
      targets.push_back({AucDefinition::CumulativeDynamic, t, opt.window});
  }
  if (targets.empty()) throw UsageError("no targets: give --id-grid and/or --cd-grid");

  StudyOptions options;
  options.n_replications = opt.reps;
  options.base_seed = opt.seed;
  options.threads = opt.threads;
  options.pwc_cutpoints = parse_grid(opt.cutpoints, "--cutpoints");

  std::vector<StudyResult> all;
  for (const auto& name : names) {
    auto start = std::chrono::steady_clock::now();
    auto results = run_scenario(name, scenario_by_name(name), estimators, targets, options);
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    std::cerr << "scenario " << name << ": " << opt.reps << " replications in " << elapsed.count()
              << " s\n";
    all.insert(all.end(), results.begin(), results.end());
  }
  ReportTable table = study_report(all);
  with_output(opt.out_path, [&](std::ostream& out) { write_report(table, out); });
  return 0;
}

struct DiagnoseOptions {
  std::string input;
  std::string out_path = "-";
};

int cmd_diagnose(const DiagnoseOptions& opt) {
  auto records = load_records(opt.input);
  TransitionNelsonAalen na = nelson_aalen_by_transition(records);
  std::vector<std::pair<std::string, StepCumulativeHazard>> hazards;
  auto add = [&hazards](const char* label, const StepCumulativeHazard& h) {
    if (h.jump_times.empty())
      std::cerr << "note: transition " << label << " has no events; panel omitted\n";
    else
      hazards.emplace_back(label, h);
  };
  add("01", na.h01);
  add("02", na.h02);
  add("12", na.h12);
  WeibullDiagnostic diag = weibull_diagnostic(hazards);
  with_output(opt.out_path, [&](std::ostream& out) { write_diagnostic(diag, out); });
  for (const auto& tr : diag.transitions)
    if (tr.has_line)
      std::cerr << "transition " << tr.label << ": slope " << tr.slope << ", R^2 "
                << tr.r_squared << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Illness-death survival models with interval-censored disease onset:\n"
      "simulation, Cox / Weibull / piecewise-constant fitting, and\n"
      "time-specific AUC evaluation."};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate a benchmark dataset");
  c_sim->add_option("--scenario", sim.scenario, "Benchmark scenario name (A..R)");
  c_sim->add_option("--seed", sim.seed, "RNG seed (mandatory: runs must be reproducible)")
      ->required();
  c_sim->add_option("--out", sim.out_path, "Record file to write")->required();
  c_sim->add_option("--paths-out", sim.paths_out,
                    "True-path file (default: <out>.paths.csv sibling)");
  c_sim->add_option("--n", sim.n, "Subjects (explicit config)");
  c_sim->add_option("--tau", sim.tau, "Visit spacing in months (explicit config)");
  c_sim->add_option("--followup", sim.followup, "Visit schedule end in months");
  c_sim->add_option("--censoring", sim.censoring, "admin:END or unif:LO,HI");
  c_sim->add_option("--shape", sim.shape, "Weibull shape");
  c_sim->add_option("--alpha01", sim.alpha01, "Disease onset rate");
  c_sim->add_option("--alpha02", sim.alpha02, "Disease-free death rate");
  c_sim->add_option("--alpha12", sim.alpha12, "Post-disease death rate");

  FitOptions fit;
  auto* c_fit = app.add_subcommand("fit", "Fit a model to a record file");
  c_fit->add_option("--input", fit.input, "Record file (long format)")->required();
  c_fit->add_option("--model", fit.model, "cox, pwc, pwc-panel, or weibull")->required();
  c_fit->add_option("--cutpoints", fit.cutpoints, "Piecewise cutpoints (pwc / pwc-panel)");
  c_fit->add_flag("--proportional", fit.proportional,
                  "Constrain h12 = h02 * exp(beta) (pwc only)");
  c_fit->add_option("--out", fit.out_path, "Fit file to write ('-' = stdout)");

  AucOptions auc;
  auto* c_auc = app.add_subcommand("auc", "Evaluate an AUC curve");
  c_auc->add_option("--fit", auc.fit_path, "Fit file from the fit command");
  c_auc->add_flag("--truth", auc.truth, "Use the benchmark true model instead of a fit");
  c_auc->add_option("--definition", auc.definition, "id or cd")->required();
  c_auc->add_option("--grid", auc.grid, "Times: comma list or a..b:step")->required();
  c_auc->add_option("--window", auc.window, "Prediction window in months (cd)")
      ->each([&auc](const std::string&) { auc.window_set = true; });
  c_auc->add_option("--shape", auc.shape, "Truth shape override");
  c_auc->add_option("--alpha01", auc.alpha01, "Truth onset rate override");
  c_auc->add_option("--alpha02", auc.alpha02, "Truth death rate override");
  c_auc->add_option("--alpha12", auc.alpha12, "Truth post-disease death rate override");
  c_auc->add_option("--out", auc.out_path, "Curve file to write ('-' = stdout)");

  StudyCliOptions study;
  auto* c_study = app.add_subcommand("study", "Run a Monte-Carlo scenario study");
  c_study->add_option("--scenarios", study.scenarios, "Names: comma list or A..F range")
      ->required();
  c_study->add_option("--estimators", study.estimators,
                      "Comma list of cox-prob,cox-riskset,pwc,weibull");
  c_study->add_option("--reps", study.reps, "Replications per scenario (default 200)");
  c_study->add_option("--seed", study.seed, "Base seed (mandatory)")->required();
  c_study->add_option("--id-grid", study.id_grid, "Incident/dynamic times (default 12,36,60)");
  c_study->add_option("--cd-grid", study.cd_grid, "Cumulative/dynamic start times");
  c_study->add_option("--window", study.window, "Prediction window for --cd-grid")
      ->each([&study](const std::string&) { study.window_set = true; });
  c_study->add_option("--cutpoints", study.cutpoints, "Piecewise estimator cutpoints");
  c_study->add_option("--threads", study.threads, "Worker threads (default: all cores)");
  c_study->add_option("--out", study.out_path, "Report file to write ('-' = stdout)");

  DiagnoseOptions diag;
  auto* c_diag = app.add_subcommand("diagnose", "Weibull adequacy check (log-log linearity)");
  c_diag->add_option("--input", diag.input, "Record file (long format)")->required();
  c_diag->add_option("--out", diag.out_path, "Diagnostic file to write ('-' = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*c_sim) return cmd_simulate(sim);
    if (*c_fit) return cmd_fit(fit);
    if (*c_auc) return cmd_auc(auc);
    if (*c_study) return cmd_study(study);
    if (*c_diag) return cmd_diagnose(diag);
    throw UsageError("no command given");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
