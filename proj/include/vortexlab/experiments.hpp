#ifndef VORTEXLAB_EXPERIMENTS_HPP
#define VORTEXLAB_EXPERIMENTS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/core.hpp"
#include "vortexlab/euler_vpm.hpp"
#include "vortexlab/point_vortex.hpp"

namespace vortexlab {

/// Discretization and run-control knobs shared by paired runs and sweeps.
struct NumericsConfig {
  double dt = 1e-3;
  double horizon = 5.0;
  /// Sampling pitch is epsilon / particles_per_core unless `pitch` is set.
  double particles_per_core = 24.0;
  std::optional<double> pitch;
  double blob_factor = 2.0;  ///< blob radius = blob_factor * pitch
  double theta = 0.5;
  std::size_t crossover = 2000;
  std::size_t leaf_size = 16;
  bool deterministic = false;
  std::uint64_t seed = 0;
  double grid_jitter = 0.0;
  double cadence = 0.05;  ///< time between diagnostics records
  /// When > 0, dt is capped at core_turnover / steps_per_core_turn, where the
  /// core turnover time of the bump is pi^2 eps^2 / |a|.
  double steps_per_core_turn = 0.0;
  /// Point-vortex collision floor; unset means delta / 4.
  std::optional<double> collision_floor;
  bool tail_monitor = false;

  void validate() const;
  bool operator==(const NumericsConfig&) const = default;
};

struct ComponentDiagnostics {
  Vec2d X = Vec2d::Zero();  ///< center of vorticity
  Vec2d Y = Vec2d::Zero();  ///< point vortex
  double w2_pv = 0.0;       ///< W2(omega_i / a_i, delta_Y)
  double w2_center = 0.0;   ///< W2(omega_i / a_i, delta_X)
  double center_gap = 0.0;  ///< |X - Y|
  double vel_gap = 0.0;     ///< |dX/dt - dY/dt|
  double m_R = 0.0;
  double m_2R = 0.0;
  double mu = 0.0;  ///< smoothed outer mass at rho = 2R - R/8, band R/8

  bool operator==(const ComponentDiagnostics&) const = default;
};

struct DiagnosticsRecord {
  double t = 0.0;
  std::vector<ComponentDiagnostics> components;
  double w1_total = 0.0;  ///< W1(omega, sum a_i delta_{Y_i})
  double min_sep_cloud = 0.0;
  double min_sep_pv = 0.0;

  bool operator==(const DiagnosticsRecord&) const = default;
};

/// Velocity tail sample: the far-part integral and its interpolation bound.
struct TailSample {
  double t = 0.0;
  int component = 0;
  double i2 = 0.0;
  double bound_rhs = 0.0;
};

struct PairingRun {
  std::vector<DiagnosticsRecord> records;
  std::vector<TailSample> tail;
  double dt = 0.0;
  double pitch = 0.0;
  double blob_radius = 0.0;
  std::size_t particles = 0;
  double horizon = 0.0;
  /// First time the particle supports came closer than delta/2.
  std::optional<double> separation_time;
  /// First time the point vortices came closer than delta/2.
  std::optional<double> pv_separation_time;
  double t_run = 0.0;  ///< min of the horizon and the two times above
  std::optional<std::string> failure;
  ParticleCloud final_cloud;
  ParticleCloud initial_cloud;
};

using RecordObserver = std::function<void(const DiagnosticsRecord&)>;

/// Initial cloud, point-vortex start and effective dt for a spec.
struct PairingSetup {
  ParticleCloud cloud;
  PointVortexState<double> vortices;
  double dt = 0.0;
};
PairingSetup prepare_pairing(const InitialDataSpec& spec, const NumericsConfig& numerics);

/// Diagnostics of one cloud/point-vortex snapshot pair.
DiagnosticsRecord make_record(const InitialDataSpec& spec, const ParticleCloud& cloud,
                              const PointVortexState<double>& vortices, const KernelParams& kernel);

/// Steps the particle cloud and the point vortices in lockstep with a common
/// dt, recording diagnostics every `cadence`, and stops at the horizon or when
/// either the particle supports or the point vortices come closer than delta/2.
/// Solver errors end the run; records up to the failure are kept.
PairingRun run_pairing(const InitialDataSpec& spec, const NumericsConfig& numerics,
                       const RecordObserver& observer = {});

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< RMS of the log residuals
};

/// Least squares of log(value) against log(eps).
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

struct GronwallFit {
  double C = 0.0;
  double prefactor = 0.0;  ///< exp(intercept)
  double residual = 0.0;
};

/// Least squares of log W2_center_i(t) against t.
GronwallFit fit_gronwall(const std::vector<DiagnosticsRecord>& records, int component);

struct ThresholdMonitor {
  double alpha = 0.0;  ///< p gamma / (p - 2)
  double level = 0.0;  ///< eps^alpha
  std::vector<double> times;
  std::vector<double> m_2R;
  std::vector<double> chebyshev_ceiling;  ///< W2_center^2 / (2R)^2 per record
  std::optional<double> crossing;  ///< first t with m_2R >= eps^alpha
};

ThresholdMonitor threshold_monitor(const std::vector<DiagnosticsRecord>& records,
                                   const InitialDataSpec& spec, int component);

struct ComponentSup {
  double w2_pv = 0.0;
  double w2_center = 0.0;
  double center_gap = 0.0;
  double vel_gap = 0.0;
  std::optional<double> tail_ratio;  ///< sup over records of I2 / bound_rhs
  std::optional<GronwallFit> gronwall;
  std::optional<double> threshold_crossing;
};

struct SweepMember {
  double epsilon = 0.0;
  bool failed = false;
  std::string failure;
  PairingRun run;
  std::vector<ComponentSup> sup;
  double sup_w1 = 0.0;
};

struct FamilyFit {
  std::string family;  ///< w2_pv, w2_center, center_gap, vel_gap or w1_total
  int component = -1;  ///< -1 for global families
  std::optional<RateFit> fit;
};

struct SweepResult {
  std::vector<double> epsilons;
  std::vector<SweepMember> members;
  std::vector<FamilyFit> fits;

  [[nodiscard]] const FamilyFit* find(const std::string& family, int component) const;
};

/// One paired run per eps (h proportional to eps), sup-over-time distances,
/// and log-log fits over the members that completed.
SweepResult run_sweep(const InitialDataSpec& base, const std::vector<double>& epsilons,
                      const NumericsConfig& numerics,
                      const std::function<void(std::size_t, const SweepMember&)>& progress = {});

}  // namespace vortexlab

#endif  // VORTEXLAB_EXPERIMENTS_HPP
