#include "agestruct/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "agestruct/dynamics.hpp"
#include "agestruct/errors.hpp"
#include "agestruct/format.hpp"
#include "agestruct/oracle.hpp"
#include "agestruct/reconstruction.hpp"
#include "agestruct/report.hpp"
#include "agestruct/reproduction.hpp"
#include "agestruct/scenario.hpp"

namespace agestruct {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Verbosity from AGESTRUCT_LOG: "quiet", "info" (default) or "debug".
int log_level() {
  const char* v = std::getenv("AGESTRUCT_LOG");
  if (!v) return 1;
  const std::string s(v);
  if (s == "quiet" || s == "0") return 0;
  if (s == "debug" || s == "2") return 2;
  return 1;
}

struct Options {
  std::string config;
  std::optional<double> t_end;
  std::string times = "0";
  double dt = 0.01;
  std::string out;
  bool json_only = false;
  std::string sweep_param;
  std::optional<std::string> sweep_values;
};

class Context {
 public:
  Context(const Options& opt, std::ostream& out, std::ostream& err)
      : opt_(opt), out_(out), err_(err), scenario_(load_scenario_file(opt.config)) {}

  const Scenario& scenario() const { return scenario_; }
  const ModelSpec& model() const { return scenario_.model; }
  std::ostream& out() { return out_; }
  const Options& options() const { return opt_; }

  double t_end() const { return opt_.t_end.value_or(scenario_.sim.t_end); }

  fs::path output_dir() const {
    fs::path dir = opt_.out.empty() ? fs::path(scenario_.output.dir) : fs::path(opt_.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("--out", "cannot create '" + dir.string() + "': " + ec.message());
    return dir;
  }

  std::ofstream open(const fs::path& file) const {
    std::ofstream f(file, std::ios::binary);
    if (!f) throw ConfigError("--out", "cannot write '" + file.string() + "'");
    return f;
  }

  void debug(const std::string& msg) const {
    if (log_level() >= 2) err_ << "[debug] " << msg << '\n';
  }

  /// Throws AssumptionError listing every violated condition.
  void require_admissible() const {
    const auto report = validate_assumptions(scenario_.model);
    if (report.passed()) return;
    std::set<std::string> seen;
    std::ostringstream os;
    os << "model violates standing assumptions:";
    for (const auto& v : report.violations) {
      const std::string tag = v.condition + "(" + v.subject + ")";
      if (seen.insert(tag).second) os << ' ' << tag;
    }
    throw AssumptionError(os.str());
  }

 private:
  const Options& opt_;
  std::ostream& out_;
  std::ostream& err_;
  Scenario scenario_;
};

void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

std::vector<double> parse_list(const std::string& s, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(field, "cannot parse number '" + item + "'");
    }
  }
  return out;
}

int cmd_validate(Context& ctx) {
  const auto report = validate_assumptions(ctx.model());
  const json j = to_json(report);
  if (ctx.options().json_only) {
    write_json(ctx.out(), j);
  } else {
    if (report.passed()) {
      ctx.out() << "PASS: all standing assumptions hold on the validation grid\n";
    } else {
      ctx.out() << "FAIL: " << report.violations.size() << " violation(s)\n";
      for (const auto& v : report.violations) {
        ctx.out() << "  (" << v.condition << ") " << v.subject << " at x=" << format_double(v.x) << ":";
        for (double o : v.observed) ctx.out() << ' ' << format_double(o);
        ctx.out() << '\n';
      }
    }
  }
  if (!ctx.options().out.empty()) {
    auto f = ctx.open(ctx.output_dir() / "validation.json");
    write_json(f, j);
  }
  return report.passed() ? kExitOk : kExitAssumption;
}

int cmd_equilibrium(Context& ctx) {
  ctx.require_admissible();
  const auto report = equilibrium(ctx.model());
  const json j = to_json(report);
  if (ctx.options().json_only) {
    write_json(ctx.out(), j);
  } else {
    auto& o = ctx.out();
    o << "regime      " << to_string(report.regime) << '\n';
    o << "R0          " << format_double(report.r0) << '\n';
    o << "P*          " << format_double(report.state.total)
      << (report.nontrivial() ? "" : "  (trivial equilibrium only)") << '\n';
    for (std::size_t i = 0; i < report.state.moments.size(); ++i)
      o << "P" << i << "*" << std::string(i < 10 ? 9 : 8, ' ') << format_double(report.state.moments[i]) << '\n';
    o << "residual    " << format_double(report.residual_inf_norm) << '\n';
  }
  if (!ctx.options().out.empty()) {
    auto f = ctx.open(ctx.output_dir() / "equilibrium.json");
    write_json(f, j);
  }
  return kExitOk;
}

void write_trajectory_csv(std::ostream& os, const ModelSpec& model, const Trajectory& traj) {
  os << "t,P";
  for (std::size_t i = 0; i <= model.order(); ++i) os << ",P" << i;
  os << ",B,Rn_of_P,M\n";
  std::vector<double> row;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto s = traj.state(k);
    row.clear();
    row.push_back(traj.times()[k]);
    row.push_back(s.total);
    row.insert(row.end(), s.moments.begin(), s.moments.end());
    row.push_back(traj.births(k));
    row.push_back(net_reproduction_rate(model, std::max(0.0, s.total)));
    row.push_back(traj.cumulative_mortality(k));
    write_csv_row(os, row);
  }
}

int cmd_simulate(Context& ctx) {
  ctx.require_admissible();
  const auto init = initial_state(ctx.scenario());
  const auto traj = integrate(ctx.model(), init, ctx.t_end(), ctx.scenario().sim.integrator);
  ctx.debug("accepted " + std::to_string(traj.size() - 1) + " steps, rejected " +
            std::to_string(traj.rejected_steps));
  const auto monitors = run_monitors(ctx.model(), traj);

  const auto dir = ctx.output_dir();
  {
    auto f = ctx.open(dir / "trajectory.csv");
    write_trajectory_csv(f, ctx.model(), traj);
  }
  {
    auto f = ctx.open(dir / "monitors.json");
    json j = to_json(monitors);
    j["extinct"] = traj.extinct();
    j["t_final"] = traj.end_time();
    write_json(f, j);
  }

  auto& o = ctx.out();
  o << "nodes       " << traj.size() << '\n';
  o << "t_final     " << format_double(traj.end_time()) << (traj.extinct() ? "  (extinction floor)" : "")
    << '\n';
  o << "P(t_final)  " << format_double(traj.total(traj.size() - 1)) << '\n';
  for (const auto& m : monitors.all()) {
    o << "monitor " << std::left << std::setw(12) << m.name << " hypothesis="
      << (m.hypothesis_held ? "held" : "not-held");
    if (m.conclusion_held) o << " conclusion=" << (*m.conclusion_held ? "held" : "VIOLATED");
    o << '\n';
  }
  o << "wrote " << (dir / "trajectory.csv").string() << '\n';
  return kExitOk;
}

int cmd_reconstruct(Context& ctx) {
  ctx.require_admissible();
  const auto& sc = ctx.scenario();
  if (sc.initial.kind != InitialSpec::Kind::Density)
    throw ConfigError("initial.family", "reconstruction needs an initial age density");
  const auto times = parse_list(ctx.options().times, "--times");
  if (times.empty()) throw ConfigError("--times", "no times given");

  const auto init = initial_state(sc);
  const auto traj = integrate(ctx.model(), init, ctx.t_end(), sc.sim.integrator);
  const auto ages = uniform_age_grid(sc.initial.quadrature.a_max, sc.output.age_points);
  const auto dir = ctx.output_dir();

  json consistency = json::array();
  for (double t : times) {
    const auto grid = reconstruct_density(ctx.model(), traj, *sc.initial.density, ages, t);
    const auto errors = moment_consistency(ctx.model(), grid, traj);
    const std::string name = "density_t" + format_double(t) + ".csv";
    {
      auto f = ctx.open(dir / name);
      f << "a,p,phi\n";
      for (std::size_t k = 0; k < ages.size(); ++k) {
        const double row[] = {grid.ages[k], grid.density[k], grid.profile[k]};
        write_csv_row(f, row);
      }
    }
    const double worst = *std::max_element(errors.begin(), errors.end());
    consistency.push_back({{"t", t},
                           {"file", name},
                           {"relative_errors", errors},
                           {"max_relative_error", worst},
                           {"seam_jump", grid.seam ? json(grid.seam->jump()) : json(nullptr)}});
    ctx.out() << "t=" << format_double(t) << "  max relative moment error " << format_double(worst)
              << "  -> " << name << '\n';
  }
  auto f = ctx.open(dir / "consistency.json");
  write_json(f, consistency);
  return kExitOk;
}

struct SweepRow {
  double value;
  double r0;
  Regime regime;
  std::optional<double> p_star;
  double p_end;
};

SweepRow sweep_point(const json& document, const std::string& parameter, double value,
                     std::optional<double> t_end) {
  const Scenario sc = load_scenario(apply_parameter(document, parameter, value));
  const auto report = validate_assumptions(sc.model);
  if (!report.passed())
    throw AssumptionError("sweep value " + format_double(value) + " gives an inadmissible model (" +
                          report.violations.front().condition + ")");
  const auto eq = equilibrium(sc.model);
  const auto traj = integrate(sc.model, initial_state(sc), t_end.value_or(sc.sim.t_end), sc.sim.integrator);
  SweepRow row{value, eq.r0, eq.regime, std::nullopt, traj.total(traj.size() - 1)};
  if (eq.nontrivial()) row.p_star = eq.state.total;
  return row;
}

int cmd_sweep(Context& ctx) {
  const auto& sc = ctx.scenario();
  SweepSpec spec = sc.sweep.value_or(SweepSpec{"fertility_scale", {}});
  if (!ctx.options().sweep_param.empty()) spec.parameter = ctx.options().sweep_param;
  if (ctx.options().sweep_values)
    spec.values = parse_list(*ctx.options().sweep_values, "--values");
  if (spec.values.empty()) throw ConfigError("sweep.values", "no sweep values given");

  std::vector<std::future<SweepRow>> jobs;
  jobs.reserve(spec.values.size());
  for (double v : spec.values)
    jobs.push_back(std::async(std::launch::async, sweep_point, std::cref(sc.document),
                              std::cref(spec.parameter), v, ctx.options().t_end));
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());  // input order

  const auto dir = ctx.output_dir();
  auto f = ctx.open(dir / "sweep.csv");
  f << "value,R0,regime,P_star,P_at_t_end\n";
  for (const auto& r : rows) {
    f << format_double(r.value) << ',' << format_double(r.r0) << ',' << to_string(r.regime) << ','
      << (r.p_star ? format_double(*r.p_star) : "") << ',' << format_double(r.p_end) << '\n';
    ctx.out() << spec.parameter << '=' << format_double(r.value) << "  R0=" << format_double(r.r0)
              << "  " << to_string(r.regime)
              << (r.p_star ? "  P*=" + format_double(*r.p_star) : std::string()) << '\n';
  }
  return kExitOk;
}

int cmd_compare(Context& ctx) {
  ctx.require_admissible();
  const auto init = initial_state(ctx.scenario());
  auto settings = ctx.scenario().sim.integrator;
  settings.extinction_floor = 0.0;
  const auto nonlinear = integrate(ctx.model(), init, ctx.t_end(), settings);
  const auto frozen = comparison_trajectory(ctx.model(), init, ctx.t_end(), settings);
  const auto check = compare_bound(nonlinear, frozen);

  const auto dir = ctx.output_dir();
  {
    auto f = ctx.open(dir / "compare.csv");
    f << "t,P,P_bar\n";
    for (double t : merged_times(nonlinear, frozen)) {
      const double row[] = {t, nonlinear.total_at(t), frozen.total_at(t)};
      write_csv_row(f, row);
    }
  }
  {
    auto f = ctx.open(dir / "compare.json");
    write_json(f, to_json(check));
  }
  ctx.out() << "bound P(t) <= P_bar(t): " << (check.holds ? "true" : "false");
  if (check.first_violation_time)
    ctx.out() << "  (first violation at t=" << format_double(*check.first_violation_time) << ")";
  ctx.out() << '\n';
  return kExitOk;
}

int cmd_oracle_pde(Context& ctx) {
  ctx.require_admissible();
  const auto& sc = ctx.scenario();
  if (sc.initial.kind != InitialSpec::Kind::Density)
    throw ConfigError("initial.family", "the PDE oracle needs an initial age density");
  const double t_end = ctx.t_end();
  const auto run = pde_solve(ctx.model(), *sc.initial.density, sc.initial.quadrature.a_max,
                             ctx.options().dt, t_end);
  auto settings = sc.sim.integrator;
  settings.extinction_floor = 0.0;
  const auto traj = integrate(ctx.model(), initial_state(sc), t_end, settings);

  const auto dir = ctx.output_dir();
  auto f = ctx.open(dir / "oracle_pde.csv");
  f << "t,P_ode,P_pde,rel_err\n";
  double worst = 0.0;
  for (std::size_t m = 0; m < run.times.size(); ++m) {
    const double p_ode = traj.total_at(run.times[m]);
    const double rel = std::abs(run.totals[m] - p_ode) / std::abs(p_ode);
    worst = std::max(worst, rel);
    const double row[] = {run.times[m], p_ode, run.totals[m], rel};
    write_csv_row(f, row);
  }
  ctx.out() << "dt=" << format_double(ctx.options().dt) << "  max rel_err " << format_double(worst)
            << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Age-structured logistic population model: moment-reduced simulation and checks"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Scenario JSON file")->required();
    sub->add_option("--out", opt.out, "Output directory (default: output.dir from the scenario)");
  };
  auto* validate = app.add_subcommand("validate", "Check the model's standing assumptions");
  add_common(validate);
  validate->add_flag("--json", opt.json_only, "Print the JSON report instead of the summary");

  auto* eq = app.add_subcommand("equilibrium", "Classify by R0 and compute the equilibrium");
  add_common(eq);
  eq->add_flag("--json", opt.json_only, "Print the JSON report instead of the table");

  auto* simulate = app.add_subcommand("simulate", "Integrate the moment system and run monitors");
  add_common(simulate);
  simulate->add_option("--t-end", opt.t_end, "Final time (overrides sim.t_end)");

  auto* reconstruct = app.add_subcommand("reconstruct", "Rebuild the age density at given times");
  add_common(reconstruct);
  reconstruct->add_option("--t-end", opt.t_end, "Final time (overrides sim.t_end)");
  reconstruct->add_option("--times", opt.times, "Comma-separated times");

  auto* sweep = app.add_subcommand("sweep", "R0 and equilibrium over a parameter family");
  add_common(sweep);
  sweep->add_option("--t-end", opt.t_end, "Final time (overrides sim.t_end)");
  sweep->add_option("--param", opt.sweep_param, "Parameter path (default fertility_scale)");
  sweep->add_option("--values", opt.sweep_values, "Comma-separated values");

  auto* compare = app.add_subcommand("compare", "Bound against the frozen-coefficient system");
  add_common(compare);
  compare->add_option("--t-end", opt.t_end, "Final time (overrides sim.t_end)");

  auto* oracle = app.add_subcommand("oracle-pde", "Compare against a direct PDE solve");
  add_common(oracle);
  oracle->add_option("--t-end", opt.t_end, "Final time (overrides sim.t_end)");
  oracle->add_option("--dt", opt.dt, "Time and age step");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (opt.t_end && !(*opt.t_end >= 0.0)) throw ConfigError("--t-end", "must be >= 0");
    Context ctx(opt, out, err);
    if (validate->parsed()) return cmd_validate(ctx);
    if (eq->parsed()) return cmd_equilibrium(ctx);
    if (simulate->parsed()) return cmd_simulate(ctx);
    if (reconstruct->parsed()) return cmd_reconstruct(ctx);
    if (sweep->parsed()) return cmd_sweep(ctx);
    if (compare->parsed()) return cmd_compare(ctx);
    if (oracle->parsed()) return cmd_oracle_pde(ctx);
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const AssumptionError& e) {
    err << "assumption violated: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace agestruct
