#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gptrap/asymptotics.hpp"
#include "gptrap/coupling.hpp"
#include "gptrap/error.hpp"
#include "gptrap/gp_solver.hpp"
#include "gptrap/scattering.hpp"
#include "gptrap/tf_solver.hpp"
#include "gptrap/vmc.hpp"

namespace gptrap::cli {

namespace {

using json = nlohmann::ordered_json;

std::string text(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
std::string text(int x) { return std::to_string(x); }
std::string text(long x) { return std::to_string(x); }
std::string text(std::uint64_t x) { return std::to_string(x); }
std::string text(const std::string& x) { return x; }

// Every option of every subcommand, so the resolved configuration can be
// written back out in registration order.
struct Field {
  std::string key;
  std::function<std::string()> value;
};

struct Params {
  // shared
  int dim = 3;
  double s = 2.0;
  double c = 1.0;
  std::string out;
  std::string format = "auto";
  double N = 1.0;
  double g = 0.0;
  double a = 0.0;
  // grids and solver
  double r_max = 0.0;
  int n_points = 0;
  double points_per_length = 100.0;
  double energy_tol = 1e-12;
  double residual_tol = 1e-9;
  int max_iters = 50000;
  // scattering
  std::string scattering_potential = "hard_core:r0=0.1";
  double scattering_r_max = 0.0;
  int scattering_points = 1601;
  // coupling
  double tol = 1e-10;
  int fixed_point_iters = 100;
  std::string density = "gp";
  // vmc
  std::string vmc_potential = "soft_sphere:v0=800,r0=0.1";
  double b_multiplier = 1.0;
  long steps = 100000;
  double step_size = 0.5;
  std::uint64_t seed = 1;
  int chains = 1;
  int bins = 32;
  double hist_r_max = 0.0;
  int measure_every = 1;
  double burn_in = 0.1;
  double h_d = 1e-4;
  std::string order = "input";
  // sweep
  std::string Ng = "10,100,1000,10000";
};

struct Command {
  CLI::App* app = nullptr;
  std::vector<Field> fields;

  template <class T>
  void add(const std::string& key, T& var, const std::string& help) {
    app->add_option("--" + key, var, help)->capture_default_str()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    fields.push_back({key, [&var] { return text(var); }});
  }
};

struct Output {
  json result;
  std::optional<std::uint64_t> seed;
};

void require(bool ok, const std::string& key, const std::string& message, const std::string& code = "out-of-range") {
  if (!ok) throw_invalid(code, key, message);
}

void check_common(const Params& p) {
  require(p.dim == 2 || p.dim == 3, "dim", "dimension must be 2 or 3", "invalid-dimension");
  require(p.s > 0.0 && std::isfinite(p.s), "s", "trap order must be positive", "non-positive");
  require(p.c > 0.0 && std::isfinite(p.c), "c", "trap coefficient must be positive", "non-positive");
  require(p.format == "auto" || p.format == "json" || p.format == "csv", "format", "format must be auto, json or csv",
          "bad-choice");
}

void check_n(const Params& p) { require(p.N > 0.0 && std::isfinite(p.N), "N", "particle number must be positive", "non-positive"); }

GpOptions gp_options(const Params& p) {
  require(p.energy_tol > 0.0, "energy-tol", "tolerance must be positive", "non-positive");
  require(p.residual_tol > 0.0, "residual-tol", "tolerance must be positive", "non-positive");
  require(p.max_iters > 0, "max-iters", "iteration cap must be positive", "non-positive");
  GpOptions o;
  o.energy_tol = p.energy_tol;
  o.residual_tol = p.residual_tol;
  o.max_iters = p.max_iters;
  return o;
}

GridPolicy grid_policy(const Params& p) {
  require(p.points_per_length > 0.0, "points-per-length", "grid density must be positive", "non-positive");
  GridPolicy g;
  g.points_per_length = p.points_per_length;
  return g;
}

RadialGrid gp_grid(const Params& p, const TrapPotential& trap, double g) {
  require(p.r_max >= 0.0, "r-max", "r-max must be nonnegative (0 selects the policy grid)", "negative");
  require(p.n_points >= 0, "n-points", "n-points must be nonnegative (0 selects the policy grid)", "negative");
  if (p.r_max == 0.0 && p.n_points == 0) return policy_grid(trap, p.dim, p.N, g, grid_policy(p));
  require(p.r_max > 0.0, "r-max", "r-max is required with n-points", "missing");
  require(p.n_points > 0, "n-points", "n-points is required with r-max", "missing");
  require(p.n_points % 2 == 1, "n-points", "n-points must be odd", "even-point-count");
  try {
    return build_radial_grid(p.dim, p.r_max, p.n_points);
  } catch (const Error& e) {
    throw Error(e.kind(), e.code(), e.code() == "too-few-points" ? "n-points" : "r-max", e.what());
  }
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used > 0 && item.find_first_not_of(" \t", used) == std::string::npos, key, "'" + item + "' is not a number",
            "not-a-number");
    out.push_back(x);
  }
  require(!out.empty(), key, "list is empty", "empty-list");
  return out;
}

PairPotential potential_arg(const std::string& spec, const std::string& key) {
  try {
    return parse_pair_potential(spec);
  } catch (const Error& e) {
    throw Error(e.kind(), e.code(), key, e.what());
  }
}

json state_json(const GpState& st) {
  json j;
  j["energy"] = st.energy_total;
  j["energy_kinetic"] = st.energy_kinetic;
  j["energy_trap"] = st.energy_trap;
  j["energy_interaction"] = st.energy_interaction;
  j["chemical_potential"] = st.chemical_potential;
  j["mean_density"] = mean_gp_density(st);
  j["residual"] = st.residual;
  j["iterations"] = st.iterations;
  j["rejected_steps"] = st.rejected_steps;
  j["boundary_ratio"] = st.boundary_ratio;
  j["r_max"] = st.grid.r_max();
  j["n_points"] = st.grid.size();
  return j;
}

json header(const Params& p) {
  json j;
  j["dim"] = p.dim;
  j["s"] = p.s;
  j["c"] = p.c;
  return j;
}

Output solve_gp(const Params& p) {
  check_common(p);
  check_n(p);
  require(p.g >= 0.0 && std::isfinite(p.g), "g", "coupling must be nonnegative", "negative");
  const auto trap = TrapPotential::homogeneous(p.s, p.c);
  const auto grid = gp_grid(p, trap, p.g);
  const auto st = minimize_gp(trap, p.N, p.g, grid, gp_options(p));
  json r = header(p);
  r["N"] = p.N;
  r["g"] = p.g;
  r.update(state_json(st));
  r["profile"] = {{"r", std::vector<double>(grid.nodes().begin(), grid.nodes().end())}, {"phi", st.phi}};
  return {r, std::nullopt};
}

Output solve_tf_cmd(const Params& p) {
  check_common(p);
  check_n(p);
  require(p.g > 0.0 && std::isfinite(p.g), "g", "TF needs a positive coupling", "non-positive");
  const auto st = solve_tf(TrapPotential::homogeneous(p.s, p.c), p.N, p.g, p.dim);
  json r = header(p);
  r["N"] = p.N;
  r["g"] = p.g;
  r["chemical_potential"] = st.chemical_potential;
  r["chemical_potential_closed_form"] = st.chemical_potential_closed_form.value_or(std::nan(""));
  r["support_radius"] = st.support_radius;
  r["energy"] = st.energy;
  r["mean_density"] = st.mean_density();
  r["bisection_iterations"] = st.bisection_iterations;
  return {r, std::nullopt};
}

Output scattering_cmd(const Params& p) {
  require(p.dim == 2 || p.dim == 3, "dim", "dimension must be 2 or 3", "invalid-dimension");
  require(p.format == "auto" || p.format == "json" || p.format == "csv", "format", "format must be auto, json or csv",
          "bad-choice");
  const auto v = potential_arg(p.scattering_potential, "potential");
  require(p.scattering_r_max >= 0.0, "r-max", "r-max must be nonnegative (0 selects 4x the range)", "negative");
  const double r_max = p.scattering_r_max > 0.0 ? p.scattering_r_max : 4.0 * v.range();
  ScatteringSolution sol;
  try {
    sol = zero_energy_profile(v, p.dim, r_max, p.scattering_points);
  } catch (const Error& e) {
    throw Error(e.kind(), e.code(), e.key() == "n_points" ? "n-points" : e.key() == "r_max" ? "r-max" : e.key(), e.what());
  }
  json r;
  r["dim"] = p.dim;
  r["potential"] = v.describe();
  r["scattering_length"] = sol.scattering_length;
  r["amplitude"] = sol.amplitude;
  r["match_radius"] = sol.match_radius;
  r["fit_residual"] = sol.fit_residual;
  r["r_max"] = r_max;
  r["n_points"] = static_cast<int>(sol.radii.size());
  r["profile"] = {{"r", sol.radii}, {"f0", sol.profile}};
  return {r, std::nullopt};
}

Output coupling_cmd(const Params& p) {
  check_common(p);
  check_n(p);
  require(p.a > 0.0 && std::isfinite(p.a), "a", "scattering length must be positive", "non-positive");
  require(p.tol > 0.0, "tol", "tolerance must be positive", "non-positive");
  require(p.fixed_point_iters > 0, "max-iters", "iteration cap must be positive", "non-positive");
  require(p.density == "gp" || p.density == "tf", "density", "density must be gp or tf", "bad-choice");
  CouplingOptions o;
  o.tol = p.tol;
  o.max_iters = p.fixed_point_iters;
  o.density = p.density == "tf" ? DensitySource::thomas_fermi : DensitySource::gp;
  o.grid = grid_policy(p);
  const auto rep = coupling_constant(p.dim, p.a, TrapPotential::homogeneous(p.s, p.c), p.N, o);
  json r = header(p);
  r["N"] = p.N;
  r["a"] = p.a;
  r["g"] = rep.g;
  r["Ng"] = rep.Ng;
  r["mean_density"] = rep.mean_density;
  r["diluteness"] = rep.diluteness;
  r["iterations"] = rep.iterations;
  r["fixed_point_residual"] = rep.fixed_point_residual;
  r["damped"] = rep.damped;
  r["density_source"] = p.density;
  return {r, std::nullopt};
}

Output vmc_cmd(const Params& p) {
  check_common(p);
  check_n(p);
  require(p.N == std::floor(p.N) && p.N <= 1000, "N", "VMC needs an integer particle number up to 1000", "not-an-integer");
  require(p.order == "input" || p.order == "reversed", "order", "order must be input or reversed", "bad-choice");
  require(p.steps >= 10000, "steps", "VMC needs at least 1e4 sweeps", "too-few-steps");
  require(p.step_size > 0.0, "step-size", "step size must be positive", "non-positive");
  require(p.chains >= 1, "chains", "need at least one chain", "non-positive");
  require(p.bins >= 1, "bins", "need at least one bin", "non-positive");
  require(p.measure_every >= 1, "measure-every", "measurement interval must be positive", "non-positive");
  require(p.burn_in >= 0.0 && p.burn_in < 1.0, "burn-in", "burn-in fraction must lie in [0, 1)");
  require(p.hist_r_max >= 0.0, "hist-r-max", "histogram radius must be nonnegative", "negative");
  require(p.h_d > 0.0, "h-d", "finite-difference step must be positive", "non-positive");
  require(p.b_multiplier > 0.0, "b-multiplier", "cutoff multiplier must be positive", "non-positive");
  require(p.a >= 0.0, "a", "scattering length must be nonnegative (0 keeps the potential as given)", "negative");
  const auto trap = TrapPotential::homogeneous(p.s, p.c);
  const int N = static_cast<int>(p.N);

  json r = header(p);
  r["N"] = N;
  std::optional<PairPotential> v;
  std::optional<ScatteringSolution> sc;
  double g = p.g;
  if (p.vmc_potential == "none") {
    require(p.g >= 0.0, "g", "coupling must be nonnegative", "negative");
    r["potential"] = "none";
  } else {
    const auto v1 = potential_arg(p.vmc_potential, "potential");
    const auto s1 = zero_energy_profile(v1, p.dim, 4.0 * v1.range(), 1601);
    v = p.a > 0.0 ? scale_pair_potential(v1, s1.scattering_length, p.a) : v1;
    sc = zero_energy_profile(*v, p.dim, 4.0 * v->range(), 1601);
    const double a = sc->scattering_length;
    g = p.dim == 3 ? a : coupling_constant(2, a, trap, p.N).g;
    r["potential"] = v->describe();
    r["a"] = a;
  }
  const auto gp = minimize_gp(trap, p.N, g, policy_grid(trap, p.dim, p.N, g, grid_policy(p)), gp_options(p));
  const auto trial = sc ? TrialFunction::dyson_scaled(gp, *sc, p.b_multiplier) : TrialFunction::product(gp);
  auto cfg = initial_configuration(trial, N, p.seed);
  if (p.order == "reversed") {
    Configuration rev = cfg;
    for (int i = 0; i < N; ++i) std::copy_n(cfg.particle(N - 1 - i).begin(), p.dim, rev.particle(i).begin());
    cfg = rev;
  }
  VmcOptions o;
  o.steps = p.steps;
  o.step_size = p.step_size;
  o.seed = p.seed;
  o.chains = p.chains;
  o.n_bins = p.bins;
  o.hist_r_max = p.hist_r_max;
  o.measure_every = p.measure_every;
  o.burn_in_fraction = p.burn_in;
  o.h_d = p.h_d;
  const auto res = run_vmc(trial, trap, v ? &*v : nullptr, cfg, o);

  r["g"] = g;
  r["b"] = trial.has_pair_factor() ? trial.cutoff() : 0.0;
  r["b_multiplier"] = trial.has_pair_factor() ? p.b_multiplier : 0.0;
  r["energy_gp"] = gp.energy_total;
  r["energy_mean"] = res.energy_mean;
  r["energy_stderr"] = res.energy_stderr;
  r["energy_ratio"] = res.energy_mean / gp.energy_total;
  r["acceptance_rate"] = res.acceptance_rate;
  r["n_samples"] = res.n_samples;
  r["burn_in"] = res.burn_in;
  r["step_size"] = res.step_size;
  r["skipped"] = res.skipped;
  r["chains"] = res.chains;
  r["rng_seed"] = res.rng_seed;
  r["histogram"] = {{"edges", res.histogram.edges},
                    {"density", res.histogram.density},
                    {"stderr", res.histogram.standard_error},
                    {"total", res.histogram.total()}};
  return {r, p.seed};
}

Output sweep_cmd(const Params& p) {
  check_common(p);
  check_n(p);
  const auto list = parse_list(p.Ng, "Ng");
  const auto recs = gp_tf_sweep(TrapPotential::homogeneous(p.s, p.c), p.dim, list, p.N, grid_policy(p), gp_options(p));
  json r = header(p);
  r["records"] = json::array();
  for (const auto& rec : recs) {
    json j;
    j["parameter"] = rec.parameter;
    j["N"] = rec.N;
    j["g"] = rec.g;
    j["E_gp"] = rec.E_gp;
    j["E_tf"] = rec.E_tf;
    j["ratio"] = rec.ratio;
    j["mu_gp"] = rec.mu_gp;
    j["mu_tf"] = rec.mu_tf;
    j["rho_bar"] = rec.rho_bar;
    j["diluteness"] = rec.diluteness;
    j["r_max"] = rec.r_max;
    j["n_points"] = rec.n_points;
    j["iterations"] = rec.iterations;
    r["records"].push_back(j);
  }
  const auto sum = summarize_sweep(recs);
  r["summary"] = {{"ratio_strictly_decreasing", sum.ratio_strictly_decreasing},
                  {"ratio_above_one", sum.ratio_above_one},
                  {"tf_below_gp", sum.tf_below_gp},
                  {"final_excess", sum.final_excess},
                  {"empirical_rate", sum.empirical_rate}};
  return {r, std::nullopt};
}

std::string csv_cell(const json& v) {
  if (v.is_number_float()) return text(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return v.dump();
}

// Scalars of each row object become columns; arrays and objects are JSON-only.
std::string to_csv(const std::vector<json>& rows) {
  std::string out = "schema_version";
  for (const auto& [k, v] : rows.front().items())
    if (v.is_primitive()) out += "," + k;
  out += "\n";
  for (const auto& row : rows) {
    out += std::to_string(schema_version);
    for (const auto& [k, v] : row.items())
      if (v.is_primitive()) out += "," + csv_cell(v);
    out += "\n";
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot-open", "out", "cannot open '" + path + "' for writing");
  f << content;
  f.close();
  if (!f) throw Error(ErrorKind::io, "write-failed", "out", "failed writing '" + path + "'");
}

std::string error_record(const std::string& kind, const std::string& code, const std::string& key,
                         const std::string& message) {
  json e;
  e["schema_version"] = schema_version;
  e["error"] = {{"kind", kind}, {"code", code}, {"key", key}, {"message", message}};
  return e.dump();
}

std::string offending_key(const std::string& message) {
  static const std::regex flag("--([A-Za-z][A-Za-z0-9_-]*)");
  std::smatch m;
  return std::regex_search(message, m, flag) ? m[1].str() : "";
}

std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot-open", "config", "cannot read config '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string content = buf.str();
  std::vector<std::pair<std::string, std::string>> out;

  if (trim(content).starts_with("{")) {
    json j;
    try {
      j = json::parse(content);
    } catch (const json::exception& e) {
      throw_invalid("bad-config", "config", std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.contains("reproducibility") || !j["reproducibility"].contains("config"))
      throw_invalid("bad-config", "config", "JSON config lacks reproducibility.config");
    const auto& cfg = j["reproducibility"]["config"];
    if (j["reproducibility"].contains("command")) out.emplace_back("command", j["reproducibility"]["command"].get<std::string>());
    for (const auto& [k, v] : cfg.items()) out.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
    return out;
  }

  std::istringstream lines(content);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw_invalid("bad-config", "config", "line " + std::to_string(lineno) + " is not 'key = value'");
    out.emplace_back(normalize_key(trim(line.substr(0, eq))), trim(line.substr(eq + 1)));
  }
  return out;
}

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  Params p;
  CLI::App app{"Gross-Pitaevskii / Thomas-Fermi solvers for trapped Bose gases"};
  app.set_version_flag("--version", GPTRAP_VERSION);
  app.require_subcommand(1);

  std::vector<std::pair<std::string, Command>> commands;
  auto make = [&](const std::string& name, const std::string& help) -> Command& {
    commands.emplace_back(name, Command{app.add_subcommand(name, help), {}});
    return commands.back().second;
  };
  auto common = [&](Command& c, bool trap = true) {
    c.add("dim", p.dim, "spatial dimension (2 or 3)");
    if (trap) {
      c.add("s", p.s, "trap order s in V = c r^s");
      c.add("c", p.c, "trap coefficient c");
    }
    c.add("out", p.out, "result file (stdout when empty)");
    c.add("format", p.format, "auto, json or csv (auto: from the file extension)");
  };
  auto solver = [&](Command& c) {
    c.add("points-per-length", p.points_per_length, "policy grid density");
    c.add("energy-tol", p.energy_tol, "relative energy change at convergence");
    c.add("residual-tol", p.residual_tol, "relative Euler-Lagrange residual at convergence");
    c.add("max-iters", p.max_iters, "gradient-flow iteration cap");
  };

  commands.reserve(6);
  {
    auto& c = make("solve-gp", "minimize the GP functional");
    common(c);
    c.add("N", p.N, "particle number");
    c.add("g", p.g, "coupling constant");
    c.add("r-max", p.r_max, "grid extent (0: policy grid)");
    c.add("n-points", p.n_points, "odd grid point count (0: policy grid)");
    solver(c);
  }
  {
    auto& c = make("solve-tf", "Thomas-Fermi minimizer");
    common(c);
    c.add("N", p.N, "particle number");
    c.add("g", p.g, "coupling constant");
  }
  {
    auto& c = make("scattering", "zero-energy scattering length");
    common(c, false);
    c.add("potential", p.scattering_potential, "pair potential, e.g. soft_sphere:v0=100,r0=0.2");
    c.add("r-max", p.scattering_r_max, "integration extent (0: 4x the range)");
    c.add("n-points", p.scattering_points, "integration grid points");
  }
  {
    auto& c = make("coupling", "coupling constant from the scattering length");
    common(c);
    c.add("N", p.N, "particle number");
    c.add("a", p.a, "scattering length");
    c.add("tol", p.tol, "relative fixed-point tolerance (2D)");
    c.add("max-iters", p.fixed_point_iters, "fixed-point iteration cap (2D)");
    c.add("density", p.density, "gp or tf mean density inside the logarithm");
    c.add("points-per-length", p.points_per_length, "policy grid density");
  }
  {
    auto& c = make("vmc", "variational Monte Carlo with the Dyson trial function");
    common(c);
    c.add("N", p.N, "particle number");
    c.add("potential", p.vmc_potential, "pair potential shape, or none");
    c.add("a", p.a, "target scattering length (0: potential as given)");
    c.add("g", p.g, "coupling when potential = none");
    c.add("b-multiplier", p.b_multiplier, "cutoff b in units of rho-bar^{-1/D}");
    c.add("steps", p.steps, "Metropolis sweeps per chain");
    c.add("step-size", p.step_size, "initial proposal width");
    c.add("seed", p.seed, "random seed");
    c.add("chains", p.chains, "independent chains");
    c.add("bins", p.bins, "radial histogram bins");
    c.add("hist-r-max", p.hist_r_max, "histogram extent (0: GP grid extent)");
    c.add("measure-every", p.measure_every, "sweeps between measurements");
    c.add("burn-in", p.burn_in, "fraction of sweeps discarded");
    c.add("h-d", p.h_d, "finite-difference step of the local energy");
    c.add("order", p.order, "particle ordering of the initial configuration: input or reversed");
    solver(c);
  }
  {
    auto& c = make("sweep", "GP versus TF energies over Ng");
    common(c);
    c.add("N", p.N, "particle number (g = Ng/N)");
    c.add("Ng", p.Ng, "comma-separated increasing Ng values");
    solver(c);
  }

  try {
    // Split off --config and the command name, then place config entries
    // before the command-line options so the latter take precedence.
    std::vector<std::string> rest;
    std::string config_path;
    for (std::size_t k = 0; k < args_in.size(); ++k) {
      const auto& a = args_in[k];
      if (a == "--config") {
        if (k + 1 >= args_in.size()) throw_invalid("missing-value", "config", "--config needs a file");
        config_path = args_in[++k];
      } else if (a.starts_with("--config=")) {
        config_path = a.substr(9);
      } else {
        rest.push_back(a);
      }
    }
    std::string command;
    if (!rest.empty() && !rest.front().starts_with("-")) {
      command = rest.front();
      rest.erase(rest.begin());
    }
    std::vector<std::pair<std::string, std::string>> cfg;
    if (!config_path.empty()) {
      cfg = read_config(config_path);
      for (const auto& [k, v] : cfg)
        if (k == "command" && command.empty()) command = v;
    }
    std::vector<std::string> argv;
    if (!command.empty()) {
      const auto it = std::find_if(commands.begin(), commands.end(), [&](const auto& c) { return c.first == command; });
      if (it == commands.end()) throw_invalid("unknown-command", "command", "unknown command '" + command + "'");
      argv.push_back(command);
      for (const auto& [k, v] : cfg) {
        if (k == "command") continue;
        if (it->second.app->get_option_no_throw("--" + k) == nullptr)
          throw_invalid("unknown-key", k, "unknown key '" + k + "' for command " + command);
        argv.push_back("--" + k);
        argv.push_back(v);
      }
    } else if (!cfg.empty()) {
      throw_invalid("missing-command", "command", "config does not name a command");
    }
    argv.insert(argv.end(), rest.begin(), rest.end());
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_record("validation", "parse-error", offending_key(e.what()), e.what()) << "\n";
    return exit_validation;
  } catch (const Error& e) {
    err << error_record(to_string(e.kind()), e.code(), e.key(), e.what()) << "\n";
    return e.kind() == ErrorKind::io ? exit_io : exit_validation;
  }

  const Command* active = nullptr;
  std::string name;
  for (const auto& [n, c] : commands)
    if (c.app->parsed()) {
      active = &c;
      name = n;
    }

  try {
    Output res;
    if (name == "solve-gp") res = solve_gp(p);
    else if (name == "solve-tf") res = solve_tf_cmd(p);
    else if (name == "scattering") res = scattering_cmd(p);
    else if (name == "coupling") res = coupling_cmd(p);
    else if (name == "vmc") res = vmc_cmd(p);
    else res = sweep_cmd(p);

    json stanza;
    stanza["version"] = GPTRAP_VERSION;
    stanza["command"] = name;
    if (res.seed) stanza["seed"] = *res.seed;
    stanza["config"] = json::object();
    std::string flat = "# gptrap " + std::string(GPTRAP_VERSION) + " resolved configuration\ncommand = " + name + "\n";
    for (const auto& f : active->fields) {
      const auto v = f.value();
      stanza["config"][f.key] = v;
      flat += f.key + " = " + v + "\n";
    }

    const bool csv = p.format == "csv" || (p.format == "auto" && p.out.ends_with(".csv"));
    std::string body;
    if (csv) {
      std::vector<json> rows;
      if (res.result.contains("records")) {
        for (const auto& rec : res.result["records"]) rows.push_back(rec);
      } else {
        rows.push_back(res.result);
      }
      body = to_csv(rows);
    } else {
      json doc;
      doc["schema_version"] = schema_version;
      doc["command"] = name;
      doc["result"] = res.result;
      doc["reproducibility"] = stanza;
      body = doc.dump(2) + "\n";
    }
    if (p.out.empty()) {
      out << body;
    } else {
      write_file(p.out, body);
      write_file(p.out + ".cfg", flat);
    }
    return exit_ok;
  } catch (const Error& e) {
    err << error_record(to_string(e.kind()), e.code(), e.key(), e.what()) << "\n";
    switch (e.kind()) {
      case ErrorKind::invalid_argument: return exit_validation;
      case ErrorKind::io: return exit_io;
      default: return exit_solver;
    }
  } catch (const std::exception& e) {
    err << error_record("internal", "exception", "", e.what()) << "\n";
    return exit_internal;
  }
}

}  // namespace gptrap::cli
