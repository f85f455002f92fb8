#ifndef VORTEXLAB_IO_HPP
#define VORTEXLAB_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "vortexlab/euler_vpm.hpp"
#include "vortexlab/experiments.hpp"
#include "vortexlab/optimal_transport.hpp"
#include "vortexlab/point_vortex.hpp"

namespace vortexlab {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr const char* kDiagnosticsHeader =
    "t,comp,Xx,Xy,Yx,Yy,w2_pv,w2_center,center_gap,vel_gap,m_R,m_2R,mu,w1_total,min_sep_cloud,min_sep_pv";

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& what);

/// One row per (record, component); global columns repeat on each row.
void write_diagnostics_csv(const std::vector<DiagnosticsRecord>& records, const std::filesystem::path& path);
std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::filesystem::path& path);

/// Particle snapshot with header k,x,y,gamma,tag.
void write_cloud_csv(const ParticleCloud& cloud, const std::filesystem::path& path);
/// Reads a snapshot back; the pitch is unknown and the component count is
/// one more than the largest tag.
ParticleCloud read_cloud_csv(const std::filesystem::path& path);

/// Atomic measure with header x,y,mass.
void write_measure_csv(const AtomicMeasure& measure, const std::filesystem::path& path);
AtomicMeasure read_measure_csv(const std::filesystem::path& path);

/// Point-vortex trajectory (t,i,x,y,a) and invariants
/// (t,hamiltonian,impulse_x,impulse_y,angular_impulse,min_sep).
void write_trajectory_csv(const PVTrajectory<double>& traj, const std::filesystem::path& path);
void write_invariants_csv(const PVTrajectory<double>& traj, const std::filesystem::path& path);

/// Log-log panel of sup distances against eps with fitted lines, plus the
/// W2(omega_i/a_i, delta_Y_i) time series of every run. Throws
/// DegenerateInputError (and writes nothing) with fewer than two usable eps.
void emit_svg_plots(const SweepResult& sweep, const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct ManifestInfo {
  std::string config_json;  ///< serialized config echo
  std::string started;      ///< UTC ISO-8601
  std::string finished;
  std::string status = "ok";
  std::string message;
};

/// Writes manifest.json listing every other regular file under `dir`
/// (recursively) with size and checksum.
void write_manifest(const std::filesystem::path& dir, const ManifestInfo& info);

std::string utc_now();

}  // namespace vortexlab

#endif  // VORTEXLAB_IO_HPP
