#include "kgelab/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace kgelab {

namespace fs = std::filesystem;

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::gaussian_bumps: return "gaussian_bumps";
    case InitialKind::gamma_perturbed: return "gamma_perturbed";
    case InitialKind::file: return "file";
    case InitialKind::zero_energy_construct: return "zero_energy_construct";
    case InitialKind::negative_energy_construct: return "negative_energy_construct";
    case InitialKind::thm61_construct: return "thm61_construct";
  }
  return "gaussian_bumps";
}

InitialKind initial_kind_from_string(const std::string& name) {
  for (auto k : {InitialKind::gaussian_bumps, InitialKind::gamma_perturbed, InitialKind::file,
                 InitialKind::zero_energy_construct, InitialKind::negative_energy_construct,
                 InitialKind::thm61_construct}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("config: unknown initial.kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// ScenarioConfig

namespace {

std::vector<std::string> split_paths(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <class Seq, class Fmt>
std::string join(const Seq& seq, Fmt fmt) {
  std::string out;
  for (const auto& x : seq) {
    if (!out.empty()) out += ',';
    out += fmt(x);
  }
  return out;
}

void require_file(const std::string& path, const std::string& key) {
  if (!fs::exists(path)) throw ConfigError("config: " + key + " refers to missing file '" + path + "'");
}

}  // namespace

ScenarioConfig ScenarioConfig::from_config(const Config& cfg) {
  ScenarioConfig s;
  s.m1 = cfg.get_double("model.m1");
  s.m2 = cfg.get_double("model.m2");
  s.a1 = cfg.get_double("model.a1");
  s.a2 = cfg.get_double("model.a2");
  s.p = cfg.get_double("model.p");
  s.q = cfg.get_double("model.q");
  s.options.linear_test_mode = cfg.get_bool("model.linear_test_mode", false);
  s.options.outside_theorem_range = cfg.get_bool("model.outside_theorem_range", false);

  s.points = cfg.get_ints("grid.points");
  s.lengths = cfg.get_doubles("grid.lengths");
  const long dim = cfg.get_int("grid.dim", static_cast<long>(s.points.size()));
  if (dim < 1 || dim > 3) throw ConfigError("config: grid.dim must be 1, 2 or 3");
  if (s.points.size() == 1) s.points.assign(dim, s.points.front());
  if (s.lengths.size() == 1) s.lengths.assign(dim, s.lengths.front());
  if (static_cast<long>(s.points.size()) != dim || static_cast<long>(s.lengths.size()) != dim)
    throw ConfigError("config: grid.points and grid.lengths need grid.dim entries");

  try {
    s.potential_kind = potential_kind_from_string(cfg.get_string("potential.kind", "zero"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: potential.kind: ") + e.what());
  }
  if (cfg.has("potential.file")) s.potential_files = split_paths(cfg.get_string("potential.file"));
  s.strength1 = cfg.get_double("potential.strength1", 0.0);
  s.strength2 = cfg.get_double("potential.strength2", s.strength1);
  s.depth1 = cfg.get_double("potential.depth1", 0.0);
  s.depth2 = cfg.get_double("potential.depth2", s.depth1);
  s.well_width = cfg.get_double("potential.width", 1.0);
  if (s.potential_kind == PotentialKind::file) {
    if (s.potential_files.empty() || s.potential_files.size() > 2)
      throw ConfigError("config: potential.file needs one or two snapshot paths");
    for (const auto& f : s.potential_files) require_file(f, "potential.file");
  }

  const std::string dt = cfg.get_string("integrator.dt", "auto");
  if (dt != "auto") s.integrator.dt = cfg.get_double("integrator.dt");
  s.integrator.t_end = cfg.get_double("integrator.t_end", 10.0);
  s.integrator.cfl_safety = cfg.get_double("integrator.cfl_safety", 0.5);
  s.integrator.blowup_threshold = cfg.get_double("integrator.blowup_threshold", 1e8);
  s.integrator.sample_every = static_cast<int>(cfg.get_int("integrator.sample_every", 10));
  s.integrator.drift_tol = cfg.get_double("integrator.drift_tol", 1e-5);
  const std::string aux = cfg.get_string("integrator.aux", "auto");
  if (aux != "auto" && aux != "none") throw ConfigError("config: integrator.aux must be auto or none");
  s.aux_auto = aux == "auto";

  s.initial_kind = initial_kind_from_string(cfg.get_string("initial.kind", "gaussian_bumps"));
  s.amp_u = cfg.get_double("initial.amp_u", 0.1);
  s.amp_v = cfg.get_double("initial.amp_v", s.amp_u);
  s.width = cfg.get_double("initial.width", 0.0);
  s.vel_u = cfg.get_double("initial.vel_u", 0.0);
  s.vel_v = cfg.get_double("initial.vel_v", 0.0);
  s.gamma = cfg.get_double("initial.gamma", 1.1);
  if (cfg.has("initial.files")) s.initial_files = split_paths(cfg.get_string("initial.files"));
  s.ground_state_dir = cfg.get_string("initial.ground_state_dir", "");
  if (s.initial_kind == InitialKind::file) {
    if (s.initial_files.size() != 4)
      throw ConfigError("config: initial.files needs four snapshots (u, ut, v, vt)");
    for (const auto& f : s.initial_files) require_file(f, "initial.files");
  }
  if (s.initial_kind == InitialKind::gamma_perturbed && !(s.gamma > 1.0))
    throw ConfigError("config: initial.gamma must exceed 1");
  if (!s.ground_state_dir.empty()) {
    require_file((fs::path(s.ground_state_dir) / "Phi.snap").string(), "initial.ground_state_dir");
    require_file((fs::path(s.ground_state_dir) / "Psi.snap").string(), "initial.ground_state_dir");
  }

  s.ground_state.tol_residual = cfg.get_double("groundstate.tol_residual", 1e-6);
  s.ground_state.max_iters = static_cast<int>(cfg.get_int("groundstate.max_iters", 5000));
  s.starts = static_cast<int>(cfg.get_int("groundstate.starts", 3));
  if (s.starts < 1) throw ConfigError("config: groundstate.starts must be >= 1");

  s.out_dir = cfg.get_string("output.dir", "kgelab-out");
  s.csv = cfg.get_string("output.csv", "diagnostics.csv");
  s.snapshot_every = cfg.get_int("output.snapshot_every", 0);
  s.seed = cfg.get_int("seed", 0);

  // Module validators run here so that nothing is computed on a bad config.
  try {
    const Grid g = s.grid();
    (void)s.model();
    (void)s.potential(g);
    s.integrator.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return s;
}

Config ScenarioConfig::to_config() const {
  Config c;
  c.set("model.m1", format_double(m1));
  c.set("model.m2", format_double(m2));
  c.set("model.a1", format_double(a1));
  c.set("model.a2", format_double(a2));
  c.set("model.p", format_double(p));
  c.set("model.q", format_double(q));
  c.set("model.linear_test_mode", options.linear_test_mode ? "true" : "false");
  c.set("model.outside_theorem_range", options.outside_theorem_range ? "true" : "false");
  c.set("grid.dim", std::to_string(dim()));
  c.set("grid.points", join(points, [](int x) { return std::to_string(x); }));
  c.set("grid.lengths", join(lengths, [](double x) { return format_double(x); }));
  c.set("potential.kind", to_string(potential_kind));
  if (!potential_files.empty())
    c.set("potential.file", join(potential_files, [](const std::string& x) { return x; }));
  c.set("potential.strength1", format_double(strength1));
  c.set("potential.strength2", format_double(strength2));
  c.set("potential.depth1", format_double(depth1));
  c.set("potential.depth2", format_double(depth2));
  c.set("potential.width", format_double(well_width));
  c.set("integrator.dt", integrator.dt ? format_double(*integrator.dt) : "auto");
  c.set("integrator.t_end", format_double(integrator.t_end));
  c.set("integrator.cfl_safety", format_double(integrator.cfl_safety));
  c.set("integrator.blowup_threshold", format_double(integrator.blowup_threshold));
  c.set("integrator.sample_every", std::to_string(integrator.sample_every));
  c.set("integrator.drift_tol", format_double(integrator.drift_tol));
  c.set("integrator.aux", aux_auto ? "auto" : "none");
  c.set("initial.kind", to_string(initial_kind));
  c.set("initial.amp_u", format_double(amp_u));
  c.set("initial.amp_v", format_double(amp_v));
  c.set("initial.width", format_double(width));
  c.set("initial.vel_u", format_double(vel_u));
  c.set("initial.vel_v", format_double(vel_v));
  c.set("initial.gamma", format_double(gamma));
  if (!initial_files.empty())
    c.set("initial.files", join(initial_files, [](const std::string& x) { return x; }));
  if (!ground_state_dir.empty()) c.set("initial.ground_state_dir", ground_state_dir);
  c.set("groundstate.tol_residual", format_double(ground_state.tol_residual));
  c.set("groundstate.max_iters", std::to_string(ground_state.max_iters));
  c.set("groundstate.starts", std::to_string(starts));
  c.set("output.dir", out_dir);
  c.set("output.csv", csv);
  c.set("output.snapshot_every", std::to_string(snapshot_every));
  c.set("seed", std::to_string(seed));
  return c;
}

ModelParams ScenarioConfig::model() const {
  return ModelParams::make(m1, m2, a1, a2, p, q, dim(), options);
}

Grid ScenarioConfig::grid() const { return Grid(points, lengths); }

PotentialPair ScenarioConfig::potential(const Grid& g) const {
  switch (potential_kind) {
    case PotentialKind::zero: return PotentialPair::zero(g);
    case PotentialKind::harmonic: return PotentialPair::harmonic(g, strength1, strength2);
    case PotentialKind::gaussian_well:
      return PotentialPair::gaussian_well(g, depth1, depth2, well_width);
    case PotentialKind::file: {
      const auto& second = potential_files.size() > 1 ? potential_files[1] : potential_files[0];
      PotentialPair pot = PotentialPair::from_files(potential_files[0], second);
      if (!(pot.K1().grid() == g))
        throw ConfigError("config: potential snapshots do not match the configured grid");
      return pot;
    }
  }
  return PotentialPair::zero(g);
}

double ScenarioConfig::bump_width() const {
  if (width > 0.0) return width;
  return *std::min_element(lengths.begin(), lengths.end()) / 10.0;
}

// ---------------------------------------------------------------------------
// Ground state

namespace {

std::pair<ScalarField, ScalarField> start_guess(const Grid& grid, double w0, int start,
                                                long seed) {
  if (start == 0) {
    auto s = gaussian_bumps(grid, 1.0, 1.0, w0);
    return {s.u, s.v};
  }
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 1000003ULL + start);
  std::uniform_real_distribution<double> width_factor(0.6, 1.5);
  std::uniform_real_distribution<double> log_ratio(std::log(0.5), std::log(2.0));
  const double w1 = w0 * width_factor(rng);
  const double w2 = w0 * width_factor(rng);
  const double ratio = std::exp(log_ratio(rng));
  auto a = gaussian_bumps(grid, 1.0, 1.0, w1);
  auto b = gaussian_bumps(grid, ratio, ratio, w2);
  return {a.u, b.v};
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setw(2) << j << '\n';
}

}  // namespace

GroundStateRun run_ground_state(const ScenarioConfig& cfg, std::ostream& log) {
  const ModelParams params = cfg.model();
  if (!params.options.outside_theorem_range) {
    const auto verdict = validate_exponents(params.p, params.q, params.n);
    if (!verdict.ground_state_ok) throw ConfigError("ground-state: refused, " + verdict.reason);
  }
  const Grid grid = cfg.grid();
  const PotentialPair pot = cfg.potential(grid);
  const double w0 = cfg.bump_width();

  GroundStateRun run;
  for (int k = 0; k < cfg.starts; ++k) {
    auto res = minimize_ground_state(start_guess(grid, w0, k, cfg.seed), params, pot,
                                     cfg.ground_state);
    log << "start " << k << ": d=" << std::setprecision(12) << res.d
        << " residual=" << res.residual << " iterations=" << res.iterations
        << " converged=" << (res.converged ? "true" : "false") << '\n';
    run.all.push_back(std::move(res));
  }
  for (int k = 0; k < cfg.starts; ++k) {
    const auto& r = run.all[k];
    if (r.converged && (run.best_start < 0 || r.d < run.all[run.best_start].d)) run.best_start = k;
  }
  if (run.best_start < 0) {
    log << "no start converged within " << cfg.ground_state.max_iters << " iterations\n";
    run.exit = exit_code::not_converged;
    return run;
  }
  const GroundStateResult& best = run.best();

  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  save_snapshot((dir / "Phi.snap").string(), best.Phi);
  save_snapshot((dir / "Psi.snap").string(), best.Psi);
  nlohmann::json j = best;
  j["start"] = run.best_start;
  j["starts"] = cfg.starts;
  j["seed"] = cfg.seed;
  write_json(dir / "groundstate.json", j);
  log << "d = " << std::setprecision(12) << best.d << "  residual = " << best.residual
      << '\n';
  return run;
}

double read_d_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open d file '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
    return j.at("d").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("d file '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Initial data

StateVector build_initial_state(const ScenarioConfig& cfg, std::ostream& log,
                                std::optional<double>* d) {
  const ModelParams params = cfg.model();
  const Grid grid = cfg.grid();
  const PotentialPair pot = cfg.potential(grid);
  const double w = cfg.bump_width();

  switch (cfg.initial_kind) {
    case InitialKind::gaussian_bumps:
      return gaussian_bumps(grid, cfg.amp_u, cfg.amp_v, w, cfg.vel_u, cfg.vel_v);
    case InitialKind::negative_energy_construct:
      return negative_energy_construct(grid, params, pot, w);
    case InitialKind::zero_energy_construct:
      return zero_energy_construct(grid, params, pot, w);
    case InitialKind::thm61_construct:
      return thm61_construct(grid, params, pot, w);
    case InitialKind::file: {
      StateVector s{load_snapshot(cfg.initial_files[0]), load_snapshot(cfg.initial_files[1]),
                    load_snapshot(cfg.initial_files[2]), load_snapshot(cfg.initial_files[3]), 0.0};
      s.check_grids();
      if (!(s.grid() == grid)) throw ConfigError("initial.files do not match the configured grid");
      return s;
    }
    case InitialKind::gamma_perturbed: {
      ScalarField Phi(grid), Psi(grid);
      std::optional<double> level;
      if (!cfg.ground_state_dir.empty()) {
        const fs::path dir(cfg.ground_state_dir);
        Phi = load_snapshot((dir / "Phi.snap").string());
        Psi = load_snapshot((dir / "Psi.snap").string());
        if (fs::exists(dir / "groundstate.json"))
          level = read_d_file((dir / "groundstate.json").string());
      } else {
        auto res = minimize_ground_state(start_guess(grid, w, 0, cfg.seed), params, pot,
                                         cfg.ground_state);
        if (!res.converged) throw std::runtime_error("gamma_perturbed: ground state did not converge");
        log << "ground state computed: d=" << std::setprecision(12) << res.d << '\n';
        Phi = std::move(res.Phi);
        Psi = std::move(res.Psi);
        level = res.d;
      }
      if (d) *d = level;
      return gamma_perturbed_data(Phi, Psi, cfg.gamma);
    }
  }
  throw ConfigError("unsupported initial.kind");
}

// ---------------------------------------------------------------------------
// Simulation, classification, certification

SimulateRun run_simulate(const ScenarioConfig& cfg, std::ostream& log, std::optional<double> d) {
  const ModelParams params = cfg.model();
  const Grid grid = cfg.grid();
  const PotentialPair pot = cfg.potential(grid);

  std::optional<double> built_d;
  const StateVector state0 = build_initial_state(cfg, log, &built_d);
  if (!d) d = built_d;

  SimulateRun run;
  run.classification = classify_initial_data(state0, params, pot, d);
  const std::optional<AuxiliaryParams> aux =
      cfg.aux_auto ? run.classification.aux : std::optional<AuxiliaryParams>{};

  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  std::ofstream csv(dir / cfg.csv);
  if (!csv) throw std::runtime_error("cannot write " + (dir / cfg.csv).string());
  csv << diagnostics_csv_header() << '\n' << std::flush;

  SimulationHooks hooks;
  hooks.on_sample = [&csv](const TrajectorySample& s) {
    csv << diagnostics_csv_row(s) << '\n' << std::flush;
  };
  hooks.checkpoint_every = cfg.snapshot_every;
  hooks.on_checkpoint = [&dir](const StateVector& s, long step) {
    const std::string tag = "step" + std::to_string(step);
    save_snapshot((dir / (tag + "_u.snap")).string(), s.u);
    save_snapshot((dir / (tag + "_ut.snap")).string(), s.ut);
    save_snapshot((dir / (tag + "_v.snap")).string(), s.v);
    save_snapshot((dir / (tag + "_vt.snap")).string(), s.vt);
  };

  run.trajectory = simulate(state0, cfg.integrator, params, pot, aux, hooks);
  const auto& traj = run.trajectory;

  nlohmann::json summary{{"terminal", to_string(traj.terminal)},
                         {"t_final", traj.t_final},
                         {"E_drift", traj.max_drift},
                         {"dt", traj.dt},
                         {"steps", traj.steps},
                         {"samples", traj.samples.size()}};
  summary["crossing_time"] =
      traj.crossing_time ? nlohmann::json(*traj.crossing_time) : nlohmann::json(nullptr);
  summary["tmax_bound"] = run.classification.tmax_bound
                              ? nlohmann::json(*run.classification.tmax_bound)
                              : nlohmann::json(nullptr);
  summary["blowup_estimate"] = nullptr;
  if (traj.samples.size() >= 10 &&
      (traj.terminal == Terminal::blowup_detected || traj.terminal == Terminal::overflow)) {
    run.detection = detect_blowup(traj, params);
    if (run.detection->estimated_time) summary["blowup_estimate"] = *run.detection->estimated_time;
    summary["detection"] = *run.detection;
  }
  summary["classification"] = run.classification;
  write_json(dir / "summary.json", summary);

  log << "terminal=" << to_string(traj.terminal) << " t_final=" << traj.t_final
      << " E_drift=" << traj.max_drift << '\n';
  switch (traj.terminal) {
    case Terminal::completed: run.exit = exit_code::ok; break;
    case Terminal::blowup_detected:
    case Terminal::overflow: run.exit = exit_code::blowup; break;
    case Terminal::unstable: run.exit = exit_code::unstable; break;
  }
  return run;
}

ClassificationReport run_classify(const ScenarioConfig& cfg, std::optional<double> d,
                                  std::ostream& log) {
  const ModelParams params = cfg.model();
  const Grid grid = cfg.grid();
  const PotentialPair pot = cfg.potential(grid);
  std::optional<double> built_d;
  const StateVector state0 = build_initial_state(cfg, log, &built_d);
  if (!d) d = built_d;
  if (!d) log << "warning: no ground-state level supplied; Gamma-set verdicts are unknown\n";
  ClassificationReport r = classify_initial_data(state0, params, pot, d);
  fs::create_directories(cfg.out_dir);
  write_json(fs::path(cfg.out_dir) / "classification.json", r);
  log << nlohmann::json(r).dump(2) << '\n';
  return r;
}

Trajectory read_trajectory_csv(const std::string& path, double blowup_threshold) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open diagnostics CSV '" + path + "'");
  std::string line;
  std::getline(is, line);
  if (line != diagnostics_csv_header())
    throw ConfigError("'" + path + "' is not a diagnostics CSV");
  Trajectory traj;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> c;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) c.push_back(std::strtod(item.c_str(), nullptr));
    if (c.size() != 13) throw ConfigError("malformed diagnostics row in '" + path + "'");
    TrajectorySample s;
    s.t = c[0];
    s.report.E = c[1];
    s.report.J = c[2];
    s.report.I = c[3];
    s.report.Q = c[4];
    s.report.N = c[5];
    s.report.kinetic = c[6];
    s.g = {c[7], c[8], c[9]};
    s.report.l2_weighted = c[10];
    s.sup_u = c[11];
    s.sup_v = c[12];
    s.report.overflowed = !std::isfinite(s.report.E);
    traj.samples.push_back(s);
  }
  if (traj.samples.empty()) throw ConfigError("diagnostics CSV '" + path + "' has no rows");
  traj.t_final = traj.samples.back().t;

  const fs::path summary = fs::path(path).parent_path() / "summary.json";
  bool tagged = false;
  if (fs::exists(summary)) {
    std::ifstream js(summary);
    nlohmann::json j;
    js >> j;
    const std::string term = j.value("terminal", "");
    for (auto t : {Terminal::completed, Terminal::blowup_detected, Terminal::overflow,
                   Terminal::unstable}) {
      if (to_string(t) == term) {
        traj.terminal = t;
        tagged = true;
      }
    }
  }
  if (!tagged) {
    const auto& last = traj.samples.back();
    const double sup = std::max(last.sup_u, last.sup_v);
    traj.terminal = !std::isfinite(sup)          ? Terminal::overflow
                    : sup > blowup_threshold     ? Terminal::blowup_detected
                                                 : Terminal::completed;
  }
  return traj;
}

CertifyRun run_certify(const ScenarioConfig& cfg, const std::string& csv_path, std::ostream& log) {
  const ModelParams params = cfg.model();
  CertifyRun run;
  Trajectory traj;
  if (csv_path.empty()) {
    SimulateRun sim = run_simulate(cfg, log);
    traj = std::move(sim.trajectory);
    run.tmax_bound = sim.classification.tmax_bound;
  } else {
    traj = read_trajectory_csv(csv_path, cfg.integrator.blowup_threshold);
  }
  if (traj.samples.size() < 10) {
    log << "trajectory has " << traj.samples.size()
        << " samples; certification needs at least 10 (lower integrator.sample_every)\n";
    run.exit = exit_code::not_certified;
    return run;
  }
  run.detection = detect_blowup(traj, params);
  nlohmann::json j = run.detection;
  j["tmax_bound"] = run.tmax_bound ? nlohmann::json(*run.tmax_bound) : nlohmann::json(nullptr);
  fs::create_directories(cfg.out_dir);
  write_json(fs::path(cfg.out_dir) / "certify.json", j);
  log << run.detection.summary << '\n';
  run.exit = run.detection.consistent_with_blowup ? exit_code::ok : exit_code::not_certified;
  return run;
}

}  // namespace kgelab
