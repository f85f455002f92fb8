#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "vortexlab/io.hpp"

namespace vortexlab {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  // from_chars rejects a leading '+', which is harmless to accept.
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw IoError("bad number '" + text + "' in " + what);
  return v;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

CsvTable read_table(const std::filesystem::path& path, const std::string& expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) throw IoError(path.string() + ": expected header '" + expected_header + "'");
  t.header = split_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(t.header.size()) + " columns");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

long parse_int(const std::string& text, const std::string& what) {
  long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw IoError("bad integer '" + text + "' in " + what);
  return v;
}

}  // namespace

void write_diagnostics_csv(const std::vector<DiagnosticsRecord>& records, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kDiagnosticsHeader << '\n';
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.components.size(); ++i) {
      const auto& d = r.components[i];
      const double cols[] = {d.X.x(), d.X.y(), d.Y.x(), d.Y.y(), d.w2_pv, d.w2_center, d.center_gap,
                             d.vel_gap, d.m_R, d.m_2R, d.mu, r.w1_total, r.min_sep_cloud, r.min_sep_pv};
      out << format_double(r.t) << ',' << i;
      for (double v : cols) out << ',' << format_double(v);
      out << '\n';
    }
  }
  finish(out, path);
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, kDiagnosticsHeader);
  std::vector<DiagnosticsRecord> records;
  const std::string what = path.string();
  for (const auto& row : t.rows) {
    const double time = parse_double(row[0], what);
    const long comp = parse_int(row[1], what);
    // A component index of 0 opens a new record.
    if (comp == 0 || records.empty()) {
      DiagnosticsRecord r;
      r.t = time;
      r.w1_total = parse_double(row[13], what);
      r.min_sep_cloud = parse_double(row[14], what);
      r.min_sep_pv = parse_double(row[15], what);
      records.push_back(r);
    }
    auto& r = records.back();
    if (comp != static_cast<long>(r.components.size()))
      throw IoError(what + ": component rows out of order");
    ComponentDiagnostics d;
    d.X = Vec2d(parse_double(row[2], what), parse_double(row[3], what));
    d.Y = Vec2d(parse_double(row[4], what), parse_double(row[5], what));
    d.w2_pv = parse_double(row[6], what);
    d.w2_center = parse_double(row[7], what);
    d.center_gap = parse_double(row[8], what);
    d.vel_gap = parse_double(row[9], what);
    d.m_R = parse_double(row[10], what);
    d.m_2R = parse_double(row[11], what);
    d.mu = parse_double(row[12], what);
    r.components.push_back(d);
  }
  return records;
}

void write_cloud_csv(const ParticleCloud& cloud, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "k,x,y,gamma,tag\n";
  for (std::size_t k = 0; k < cloud.size(); ++k)
    out << k << ',' << format_double(cloud.positions[k].x()) << ',' << format_double(cloud.positions[k].y()) << ','
        << format_double(cloud.circulations[k]) << ',' << cloud.tags[k] << '\n';
  finish(out, path);
}

ParticleCloud read_cloud_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, "k,x,y,gamma,tag");
  const std::string what = path.string();
  ParticleCloud cloud;
  int max_tag = -1;
  for (const auto& row : t.rows) {
    cloud.positions.emplace_back(parse_double(row[1], what), parse_double(row[2], what));
    cloud.circulations.push_back(parse_double(row[3], what));
    const long tag = parse_int(row[4], what);
    if (tag < 0) throw IoError(what + ": negative component tag");
    cloud.tags.push_back(static_cast<int>(tag));
    max_tag = std::max(max_tag, static_cast<int>(tag));
  }
  cloud.components = max_tag + 1;
  cloud.validate();
  return cloud;
}

void write_measure_csv(const AtomicMeasure& measure, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "x,y,mass\n";
  for (std::size_t k = 0; k < measure.size(); ++k)
    out << format_double(measure.positions[k].x()) << ',' << format_double(measure.positions[k].y()) << ','
        << format_double(measure.masses[k]) << '\n';
  finish(out, path);
}

AtomicMeasure read_measure_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, "x,y,mass");
  const std::string what = path.string();
  AtomicMeasure m;
  for (const auto& row : t.rows)
    m.add(Vec2d(parse_double(row[0], what), parse_double(row[1], what)), parse_double(row[2], what));
  return m;
}

void write_trajectory_csv(const PVTrajectory<double>& traj, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t,i,x,y,a\n";
  for (std::size_t s = 0; s < traj.times.size(); ++s)
    for (std::size_t i = 0; i < traj.snapshots[s].size(); ++i)
      out << format_double(traj.times[s]) << ',' << i << ',' << format_double(traj.snapshots[s][i].x()) << ','
          << format_double(traj.snapshots[s][i].y()) << ',' << format_double(traj.intensities[i]) << '\n';
  finish(out, path);
}

void write_invariants_csv(const PVTrajectory<double>& traj, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t,hamiltonian,impulse_x,impulse_y,angular_impulse,min_sep\n";
  for (std::size_t s = 0; s < traj.times.size(); ++s)
    out << format_double(traj.times[s]) << ',' << format_double(traj.hamiltonian[s]) << ','
        << format_double(traj.linear_impulse[s].x()) << ',' << format_double(traj.linear_impulse[s].y()) << ','
        << format_double(traj.angular_impulse[s]) << ',' << format_double(traj.min_separation[s]) << '\n';
  finish(out, path);
}

}  // namespace vortexlab
