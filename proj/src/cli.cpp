#include "vortexlab/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "vortexlab/config.hpp"
#include "vortexlab/io.hpp"
#include "vortexlab/optimal_transport.hpp"
#include "vortexlab/parallel.hpp"
#include "vortexlab/transport.hpp"

namespace vortexlab {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool deterministic = false;
};

/// A run that finished its outputs but should exit with a runtime failure.
struct RunOutcome {
  bool ok = true;
  std::string message;
};

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json point(const Vec2d& x) { return json::array({x.x(), x.y()}); }

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

PointVortexState<double> pv_start(const InitialDataSpec& spec) {
  PointVortexState<double> s;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    s.positions.push_back(spec.pv_start(i));
    s.intensities.push_back(spec.intensities[i]);
  }
  return s;
}

std::size_t cadence_steps(const NumericsConfig& n, double dt) {
  return static_cast<std::size_t>(std::max(1LL, std::llround(n.cadence / dt)));
}

RunOutcome run_pointvortex(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  const NumericsConfig& n = cfg.numerics;
  const double floor = n.collision_floor.value_or(cfg.spec.separation / 4.0);
  const auto traj = pv_integrate<double>(pv_start(cfg.spec), n.dt, n.horizon, cadence_steps(n, n.dt), floor);
  write_trajectory_csv(traj, dir / "trajectory.csv");
  write_invariants_csv(traj, dir / "invariants.csv");
  out << "snapshots=" << traj.times.size() << '\n';
  if (traj.collision) {
    const auto& c = *traj.collision;
    return {false, "vortices " + std::to_string(c.first) + " and " + std::to_string(c.second) +
                       " came within the collision floor at t=" + format_double(c.t)};
  }
  return {};
}

json run_summary(const PairingRun& run) {
  json doc;
  doc["dt"] = run.dt;
  doc["pitch"] = run.pitch;
  doc["blob_radius"] = run.blob_radius;
  doc["particles"] = run.particles;
  doc["horizon"] = run.horizon;
  doc["t_run"] = run.t_run;
  doc["records"] = run.records.size();
  doc["separation_time"] = number_or_null(run.separation_time);
  doc["pv_separation_time"] = number_or_null(run.pv_separation_time);
  doc["failure"] = run.failure ? json(*run.failure) : json(nullptr);
  json tail = json::array();
  for (const auto& s : run.tail)
    tail.push_back({{"t", s.t}, {"component", s.component}, {"i2", s.i2}, {"bound_rhs", s.bound_rhs}});
  doc["tail"] = tail;
  return doc;
}

RunOutcome run_simulate(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  const PairingRun run = run_pairing(cfg.spec, cfg.numerics);
  write_diagnostics_csv(run.records, dir / "diagnostics.csv");
  write_cloud_csv(run.initial_cloud, dir / "cloud_initial.csv");
  write_cloud_csv(run.final_cloud, dir / "cloud_final.csv");
  write_json(dir / "summary.json", run_summary(run));
  out << "particles=" << run.particles << " records=" << run.records.size() << " t_run=" << format_double(run.t_run)
      << '\n';
  if (run.failure) return {false, *run.failure};
  return {};
}

RunOutcome run_sweep_mode(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  InitialDataSpec base = cfg.spec;
  const SweepResult sweep = run_sweep(base, cfg.epsilons, cfg.numerics, [&](std::size_t k, const SweepMember& m) {
    out << "eps=" << format_double(m.epsilon) << (m.failed ? " failed: " + m.failure : " done") << '\n';
    out.flush();
    (void)k;
  });

  json doc;
  doc["epsilons"] = sweep.epsilons;
  json members = json::array();
  for (std::size_t k = 0; k < sweep.members.size(); ++k) {
    const SweepMember& m = sweep.members[k];
    json mj = run_summary(m.run);
    mj["epsilon"] = m.epsilon;
    mj["failed"] = m.failed;
    mj["failure_reason"] = m.failed ? json(m.failure) : json(nullptr);
    mj["sup_w1"] = m.sup_w1;
    json sups = json::array();
    for (const auto& s : m.sup) {
      json sj = {{"w2_pv", s.w2_pv}, {"w2_center", s.w2_center}, {"center_gap", s.center_gap}, {"vel_gap", s.vel_gap}};
      sj["tail_ratio"] = number_or_null(s.tail_ratio);
      sj["gronwall"] = s.gronwall ? json{{"C", s.gronwall->C}, {"prefactor", s.gronwall->prefactor},
                                         {"residual", s.gronwall->residual}}
                                  : json(nullptr);
      sj["threshold_crossing"] = number_or_null(s.threshold_crossing);
      sups.push_back(sj);
    }
    mj["components"] = sups;
    members.push_back(mj);
    write_diagnostics_csv(m.run.records, dir / ("diagnostics_eps_" + std::to_string(k) + ".csv"));
  }
  doc["members"] = members;
  json fits = json::array();
  for (const auto& f : sweep.fits) {
    json fj = {{"family", f.family}, {"component", f.component}};
    if (f.fit)
      fj["fit"] = {{"slope", f.fit->slope}, {"intercept", f.fit->intercept}, {"residual", f.fit->residual}};
    else
      fj["fit"] = nullptr;
    fits.push_back(fj);
    if (f.fit)
      out << "fit " << f.family << (f.component >= 0 ? "[" + std::to_string(f.component) + "]" : "")
          << " slope=" << format_double(f.fit->slope) << '\n';
  }
  doc["fits"] = fits;
  write_json(dir / "sweep.json", doc);

  std::size_t done = 0;
  for (const auto& m : sweep.members)
    if (!m.failed && !m.run.records.empty()) ++done;
  if (done >= 2) emit_svg_plots(sweep, dir / "sweep.svg");
  if (done < sweep.members.size()) return {false, "some sweep members failed"};
  return {};
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

RunOutcome run_metrics(const RunConfig& cfg, const fs::path& config_dir, const fs::path& dir, std::ostream& out) {
  const MetricsConfig& mc = cfg.metrics;
  json doc;
  if (mc.measures.size() == 2) {
    const AtomicMeasure f = read_measure_csv(resolve(config_dir, mc.measures[0]));
    const AtomicMeasure g = read_measure_csv(resolve(config_dir, mc.measures[1]));
    bool nonnegative = true;
    for (double m : f.masses) nonnegative = nonnegative && m >= 0.0;
    for (double m : g.masses) nonnegative = nonnegative && m >= 0.0;
    const double w1 = nonnegative ? w1_exact(f, g).first : w1_signed(f, g);
    doc["w1"] = w1;
    out << "w1=" << format_double(w1) << '\n';
  }
  if (mc.cloud) {
    ParticleCloud cloud = read_cloud_csv(resolve(config_dir, *mc.cloud));
    cloud.blob_radius = mc.blob_radius;
    if (!mc.targets.empty() && mc.targets.size() != static_cast<std::size_t>(cloud.components))
      throw ValidationError("metrics.targets", "needs one point per component of the cloud");
    const double rho = mc.rho.value_or(cfg.spec.support_radius);
    const double band = mc.delta_r.value_or(rho / 8.0);
    json comps = json::array();
    std::vector<double> intensities;
    for (int i = 0; i < cloud.components; ++i) {
      const ComponentView view = component_view(cloud, i);
      intensities.push_back(view.intensity);
      const Vec2d X = center_of_vorticity(view);
      const Vec2d V = center_velocity(cloud, i);
      CutoffSpec cut;
      cut.rho = rho;
      cut.band = band;
      cut.center = X;
      json cj = {{"component", i},
                 {"intensity", view.intensity},
                 {"X", point(X)},
                 {"dXdt", point(V)},
                 {"w2_center", w2_to_dirac(view, X)},
                 {"outer_mass", outer_mass(view, rho)},
                 {"smoothed_outer_mass", smoothed_outer_mass(view, cut)}};
      out << "component " << i << " X=(" << format_double(X.x()) << "," << format_double(X.y())
          << ") w2_center=" << format_double(cj["w2_center"].get<double>()) << '\n';
      if (!mc.targets.empty()) {
        const Vec2d& Y = mc.targets[static_cast<std::size_t>(i)];
        cj["w2_target"] = w2_to_dirac(view, Y);
        cj["center_gap"] = (X - Y).norm();
      }
      comps.push_back(cj);
    }
    doc["rho"] = rho;
    doc["delta_r"] = band;
    doc["components"] = comps;
    if (!mc.targets.empty()) {
      const double w1 = w1_signed(cloud_measure(cloud), dirac_measure(mc.targets, intensities));
      doc["w1_total"] = w1;
      out << "w1_total=" << format_double(w1) << '\n';
    }
  }
  write_json(dir / "metrics.json", doc);
  return {};
}

int execute(RunMode mode, const Flags& flags, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(flags.config);
    if (cfg.mode != mode)
      throw ValidationError("mode", "config is for '" + to_string(cfg.mode) + "', not '" + to_string(mode) + "'");
    if (flags.out) cfg.output = *flags.out;
    if (flags.seed) cfg.numerics.seed = *flags.seed;
    if (flags.deterministic) cfg.numerics.deterministic = true;
    cfg.validate();
  } catch (const ConfigParseError& e) {
    err << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }
  if (flags.threads) set_thread_count(*flags.threads);

  const fs::path dir(cfg.output);
  const fs::path config_dir = fs::absolute(fs::path(flags.config)).parent_path();
  ManifestInfo info;
  info.started = utc_now();
  info.config_json = serialize_config(cfg);
  int code = kExitOk;
  try {
    fs::create_directories(dir);
    {
      std::ofstream echo(dir / "config.json", std::ios::binary | std::ios::trunc);
      if (!echo) throw IoError("cannot write " + (dir / "config.json").string());
      echo << info.config_json << '\n';
    }
    RunOutcome outcome;
    switch (mode) {
      case RunMode::pointvortex: outcome = run_pointvortex(cfg, dir, out); break;
      case RunMode::simulate: outcome = run_simulate(cfg, dir, out); break;
      case RunMode::sweep: outcome = run_sweep_mode(cfg, dir, out); break;
      case RunMode::metrics: outcome = run_metrics(cfg, config_dir, dir, out); break;
    }
    if (!outcome.ok) {
      info.status = "failed";
      info.message = outcome.message;
      err << "run failed: " << outcome.message << '\n';
      code = kExitRuntime;
    }
  } catch (const ValidationError& e) {
    info.status = "invalid";
    info.message = e.what();
    err << "invalid input: " << e.what() << '\n';
    code = kExitValidation;
  } catch (const std::exception& e) {
    info.status = "failed";
    info.message = e.what();
    err << "run failed: " << e.what() << '\n';
    code = kExitRuntime;
  }
  info.finished = utc_now();
  try {
    if (fs::is_directory(dir)) write_manifest(dir, info);
  } catch (const std::exception& e) {
    err << "manifest: " << e.what() << '\n';
    return kExitRuntime;
  }
  return code;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vortex particle and point-vortex comparison runs", "vortexlab"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Flags flags;
  std::optional<RunMode> chosen;
  const std::pair<const char*, const char*> commands[] = {
      {"pointvortex", "Integrate the point-vortex system"},
      {"simulate", "Run the particle method next to its point-vortex limit"},
      {"sweep", "Repeat the paired run over a decreasing list of epsilon"},
      {"metrics", "Recompute transport metrics from exported CSV files"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON run configuration")->required();
    sub->add_option("--out", flags.out, "Output directory (overrides the config)");
    sub->add_option("--seed", flags.seed, "Sampling seed (overrides the config)");
    sub->add_option("--threads", flags.threads, "Cap on solver threads")->check(CLI::PositiveNumber);
    sub->add_flag("--deterministic", flags.deterministic, "Fixed-order summation for reproducible output");
    const RunMode mode = run_mode_from_string(name);
    sub->callback([&chosen, mode] { chosen = mode; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }
  if (!chosen) {
    err << app.help();
    return kExitValidation;
  }
  return execute(*chosen, flags, out, err);
}

int cli_dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace vortexlab
