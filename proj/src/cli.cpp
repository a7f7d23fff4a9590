#include "rgg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "rgg/experiments.hpp"
#include "rgg/geometry.hpp"
#include "rgg/theory.hpp"

namespace rgg::cli {

namespace {

// Raised for flag combinations CLI11 cannot express; reported with usage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct XiArgs {
  int dim = 3;
  int k = 1;
  double c = 0.0;
  std::optional<double> area;
  std::optional<double> perimeter;
};

struct RadiusArgs {
  int dim = 3;
  std::string n;
  int k = 1;
  std::optional<double> xi;
  std::optional<double> c;
  std::optional<double> area;
  std::optional<double> perimeter;
};

struct IntegralArgs {
  std::string region = "cube";
  std::string n;
  int k = 1;
  double c = 0.0;
  std::string estimator = "layer";
  std::string samples = "200000";
  std::uint64_t seed = 1;
};

struct SimulateArgs {
  std::string region = "cube";
  std::string n = "2000";
  int k = 1;
  double c = 0.0;
  std::string process = "binomial";
  std::string trials = "100";
  std::uint64_t seed = 42;
  int workers = 1;
  std::string out;
};

int cmd_xi(const XiArgs& a, std::ostream& out) {
  if (a.dim == 3) {
    if (a.k < 1) throw UsageError("k >= 1 required in 3D");
    if (!a.area) throw UsageError("--area is required with --dim 3");
    out << format12(theory::solve_xi_3d(a.c, a.k, *a.area)) << '\n';
    return 0;
  }
  if (a.k < 1) throw UsageError("k >= 1 required for xi in 2D (k = 0 uses c directly)");
  if (!a.perimeter) throw UsageError("--perimeter is required with --dim 2");
  out << format12(theory::solve_xi_2d(a.c, a.k, *a.perimeter)) << '\n';
  return 0;
}

int cmd_radius(const RadiusArgs& a, std::ostream& out) {
  const double n = parse_count(a.n);
  if (a.dim == 3) {
    if (a.k < 1) throw UsageError("k >= 1 required in 3D");
    double xi = 0.0;
    if (a.xi) {
      xi = *a.xi;
    } else if (a.c && a.area) {
      xi = theory::solve_xi_3d(*a.c, a.k, *a.area);
    } else {
      throw UsageError("3D radius needs --xi, or --c together with --area");
    }
    out << format12(theory::radius_3d(n, a.k, xi)) << '\n';
    return 0;
  }
  if (a.k == 0) {
    if (!a.c) throw UsageError("2D radius with k = 0 needs --c");
    out << format12(theory::radius_2d(n, 0, *a.c)) << '\n';
    return 0;
  }
  double xi = 0.0;
  if (a.xi) {
    xi = *a.xi;
  } else if (a.c && a.perimeter) {
    xi = theory::solve_xi_2d(*a.c, a.k, *a.perimeter);
  } else {
    throw UsageError("2D radius with k >= 1 needs --xi, or --c together with --perimeter");
  }
  out << format12(theory::radius_2d(n, a.k, xi)) << '\n';
  return 0;
}

int cmd_integral(const IntegralArgs& a, std::ostream& out) {
  const ConvexRegion region = normalize_unit_volume(parse_region_spec(a.region));
  const double n = parse_count(a.n);
  const double target = std::exp(-a.c);
  const theory::TheoryParams params = theory::make_params(n, a.k, a.c, region.surface_area());

  if (a.estimator == "1d") {
    const theory::IntegralReport rep = theory::boundary_layer_integral(n, a.k, params.xi);
    const double asymptote = theory::boundary_layer_asymptote(a.k, params.xi);
    const double ratio = rep.value / asymptote;
    out << "estimator: " << theory::to_string(rep.estimator) << '\n'
        << "xi: " << format12(params.xi) << '\n'
        << "r_n: " << format12(params.r_n) << '\n'
        << "value: " << format12(rep.value) << '\n'
        << "error: " << format12(rep.error) << '\n'
        << "asymptote: " << format12(asymptote) << '\n'
        << "ratio_to_asymptote: " << format12(ratio) << '\n'
        << "area_times_value: " << format12(region.surface_area() * rep.value) << '\n'
        << "target: " << format12(target) << '\n';
    out << "estimator,n,k,c,value,error,asymptote,ratio,target\n"
        << theory::to_string(rep.estimator) << ',' << format12(n) << ',' << a.k << ',' << format12(a.c) << ','
        << format12(rep.value) << ',' << format12(rep.error) << ',' << format12(asymptote) << ','
        << format12(ratio) << ',' << format12(target) << '\n';
    return 0;
  }

  theory::PsiIntegralOptions opt;
  if (a.estimator == "layer") {
    opt.estimator = theory::Estimator::kLayered;
  } else if (a.estimator == "mc") {
    opt.estimator = theory::Estimator::kMonteCarlo;
  } else {
    throw UsageError("--estimator must be layer, mc, or 1d");
  }
  opt.mc_samples = static_cast<std::size_t>(parse_count(a.samples));
  opt.seed = a.seed;
  const theory::IntegralReport rep = theory::psi_integral_over_region(region, params, opt);
  out << "estimator: " << theory::to_string(rep.estimator) << '\n'
      << "xi: " << format12(params.xi) << '\n'
      << "r_n: " << format12(params.r_n) << '\n'
      << "value: " << format12(rep.value) << '\n'
      << "error: " << format12(rep.error) << '\n'
      << "target: " << format12(target) << '\n'
      << "abs_diff_to_target: " << format12(std::abs(rep.value - target)) << '\n';
  out << "estimator,n,k,c,value,error,target\n"
      << theory::to_string(rep.estimator) << ',' << format12(n) << ',' << a.k << ',' << format12(a.c) << ','
      << format12(rep.value) << ',' << format12(rep.error) << ',' << format12(target) << '\n';
  return 0;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.region = a.region;
  cfg.n = static_cast<std::uint64_t>(parse_count(a.n));
  cfg.k = a.k;
  cfg.c = a.c;
  cfg.process = parse_process_kind(a.process);
  cfg.trials = static_cast<std::uint64_t>(parse_count(a.trials));
  cfg.master_seed = a.seed;
  cfg.workers = a.workers;
  cfg.output_path = a.out;
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const ExperimentResult result = run_experiment(cfg);
  save_result(result, a.out);
  const auto& g = result.aggregates;
  out << "trials=" << result.records.size() << " r_n=" << format12(result.theory.r_n)
      << " p_hat_delta=" << format12(g.p_hat_delta) << " (se " << format12(g.se_delta) << ")"
      << " p_hat_kappa=" << format12(g.p_hat_kappa) << " (se " << format12(g.se_kappa) << ")"
      << " equality_rate=" << format12(g.equality_rate) << " theory_limit=" << format12(result.theory_limit)
      << '\n'
      << "wrote " << a.out << " and " << summary_path_for(a.out) << '\n';
  return 0;
}

int cmd_analyze(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "error: cannot open `" << path << "`\n";
    return 1;
  }
  std::vector<TrialRecord> records;
  try {
    records = read_results_csv(in);
  } catch (const CsvError& e) {
    err << "error: " << path << ": " << e.what() << '\n';
    return 1;
  }
  const Aggregates g = aggregate(records);
  out << "trials: " << records.size() << '\n'
      << "p_hat_delta: " << format12(g.p_hat_delta) << '\n'
      << "p_hat_kappa: " << format12(g.p_hat_kappa) << '\n'
      << "se_delta: " << format12(g.se_delta) << '\n'
      << "se_kappa: " << format12(g.se_kappa) << '\n'
      << "equality_rate: " << format12(g.equality_rate) << '\n';
  const auto problems = check_records(records);
  for (const auto& p : problems) err << "invariant violation: " << p << '\n';
  return problems.empty() ? 0 : 2;
}

}  // namespace

std::string format12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double parse_count(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v) || v < 0.0) {
    throw UsageError("expected a nonnegative count, got `" + text + "`");
  }
  return std::trunc(v);
}

// Fills options that neither the command line nor the environment set, so
// precedence is flag > environment > file.
static void apply_config_file(CLI::App& cmd, const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("cannot read config file `" + path + "`");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw UsageError("config file `" + path + "`: " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && item.parents != std::vector<std::string>{cmd.get_name()}) continue;
    CLI::Option* opt = nullptr;
    try {
      opt = cmd.get_option("--" + item.name);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError("config file `" + path + "`: unknown key `" + item.name + "`");
    }
    if (item.name == "config" || item.name == "help") {
      throw UsageError("config file `" + path + "`: key `" + item.name + "` not allowed");
    }
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config file `" + path + "`: " + item.name + ": " + e.what());
    }
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Critical transmission radii of 3D random geometric graphs", "rgg"};
  app.require_subcommand(1);

  XiArgs xi;
  auto* xi_cmd = app.add_subcommand("xi", "Solve for xi given c, k and the boundary size");
  xi_cmd->add_option("--dim", xi.dim, "Dimension (2 or 3)")->check(CLI::IsMember({2, 3}));
  xi_cmd->add_option("--k", xi.k, "Degree/connectivity offset k")->required();
  xi_cmd->add_option("--c", xi.c, "Tail parameter c");
  xi_cmd->add_option("--area", xi.area, "Boundary surface area (3D)");
  xi_cmd->add_option("--perimeter", xi.perimeter, "Boundary length (2D)");

  RadiusArgs rad;
  auto* rad_cmd = app.add_subcommand("radius", "Critical radius estimate r_n");
  rad_cmd->add_option("--dim", rad.dim, "Dimension (2 or 3)")->check(CLI::IsMember({2, 3}));
  rad_cmd->add_option("--n", rad.n, "Number of points (scientific notation accepted)")->required();
  rad_cmd->add_option("--k", rad.k, "Degree/connectivity offset k")->required();
  rad_cmd->add_option("--xi", rad.xi, "xi");
  rad_cmd->add_option("--c", rad.c, "Tail parameter c");
  rad_cmd->add_option("--area", rad.area, "Boundary surface area (3D, with --c)");
  rad_cmd->add_option("--perimeter", rad.perimeter, "Boundary length (2D, with --c)");

  IntegralArgs integ;
  auto* int_cmd = app.add_subcommand("integral", "Evaluate the psi integral or its boundary-layer part");
  int_cmd->add_option("--region", integ.region, "ball | cube | box:LX,LY,LZ | ellipsoid:A,B,C | polytope:PATH");
  int_cmd->add_option("--n", integ.n, "Number of points (scientific notation accepted)")->required();
  int_cmd->add_option("--k", integ.k, "Degree/connectivity offset k");
  int_cmd->add_option("--c", integ.c, "Tail parameter c");
  int_cmd->add_option("--estimator", integ.estimator, "layer | mc | 1d");
  int_cmd->add_option("--samples", integ.samples, "Monte Carlo sample count");
  int_cmd->add_option("--seed", integ.seed, "Monte Carlo seed");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the Monte Carlo experiment");
  std::string sim_config;
  sim_cmd->add_option("--config", sim_config, "key=value file with defaults for the flags below");
  sim_cmd->add_option("--region", sim.region, "Region token");
  sim_cmd->add_option("--n", sim.n, "Points per trial (Poisson intensity)");
  sim_cmd->add_option("--k", sim.k, "Offset k: radii for min degree and connectivity >= k + 1");
  sim_cmd->add_option("--c", sim.c, "Tail parameter c");
  sim_cmd->add_option("--process", sim.process, "binomial | poisson");
  sim_cmd->add_option("--trials", sim.trials, "Number of trials");
  sim_cmd->add_option("--seed", sim.seed, "Master seed");
  sim_cmd->add_option("--workers", sim.workers, "Worker threads")->envname("RGG_WORKERS");
  sim_cmd->add_option("--out", sim.out, "Results CSV path (summary JSON written alongside)")->required();

  std::string analyze_path;
  auto* an_cmd = app.add_subcommand("analyze", "Recompute aggregates from a results CSV");
  an_cmd->add_option("path", analyze_path, "Results CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*sim_cmd && !sim_config.empty()) apply_config_file(*sim_cmd, sim_config);
    if (*xi_cmd) return cmd_xi(xi, out);
    if (*rad_cmd) return cmd_radius(rad, out);
    if (*int_cmd) return cmd_integral(integ, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*an_cmd) return cmd_analyze(analyze_path, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* active = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << active->help();
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const TrialError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace rgg::cli
