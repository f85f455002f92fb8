#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "vortexlab/io.hpp"

namespace vortexlab {

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 320.0;
constexpr double kMargin = 60.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double span = hi - lo;
    lo -= 0.05 * span;
    hi += 0.05 * span;
  }
  [[nodiscard]] double map(double v) const { return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo); }
};

Axis empty_axis() {
  Axis a;
  a.lo = std::numeric_limits<double>::infinity();
  a.hi = -a.lo;
  return a;
}

void frame(std::ostringstream& s, double x0, double y0, const std::string& title, const std::string& xlabel,
           const std::string& ylabel) {
  s << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << kPanelW << "\" height=\"" << kPanelH
    << "\" fill=\"none\" stroke=\"#333\"/>\n";
  s << "<text x=\"" << x0 + kPanelW / 2 << "\" y=\"" << y0 - 12 << "\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  s << "<text x=\"" << x0 + kPanelW / 2 << "\" y=\"" << y0 + kPanelH + 36
    << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(xlabel) << "</text>\n";
  s << "<text x=\"" << x0 - 44 << "\" y=\"" << y0 + kPanelH / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
    << "transform=\"rotate(-90 " << x0 - 44 << ' ' << y0 + kPanelH / 2 << ")\">" << escape(ylabel) << "</text>\n";
}

void ticks(std::ostringstream& s, const Axis& ax, const Axis& ay, bool log_scale) {
  const double x_base = ay.pixel_lo;
  const double y_left = ax.pixel_lo;
  for (int k = 0; k <= 4; ++k) {
    const double vx = ax.lo + (ax.hi - ax.lo) * k / 4.0;
    const double vy = ay.lo + (ay.hi - ay.lo) * k / 4.0;
    const std::string lx = log_scale ? "1e" + fixed(vx, 2) : fixed(vx, 2);
    const std::string ly = log_scale ? "1e" + fixed(vy, 2) : fixed(vy, 4);
    s << "<text x=\"" << ax.map(vx) << "\" y=\"" << x_base + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
      << lx << "</text>\n";
    s << "<text x=\"" << y_left - 4 << "\" y=\"" << ay.map(vy) + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
      << ly << "</text>\n";
  }
}

}  // namespace

void emit_svg_plots(const SweepResult& sweep, const std::filesystem::path& path) {
  std::vector<const SweepMember*> usable;
  for (const auto& m : sweep.members)
    if (!m.failed && !m.run.records.empty()) usable.push_back(&m);
  if (usable.size() < 2) throw DegenerateInputError("log-log plots need at least two completed epsilon values");

  struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (log10 eps, log10 value)
    std::optional<RateFit> fit;
  };
  std::vector<Series> series;
  const std::size_t comps = usable.front()->sup.size();
  for (std::size_t i = 0; i < comps; ++i) {
    for (const char* family : {"w2_pv", "center_gap"}) {
      Series s;
      s.label = std::string(family) + "[" + std::to_string(i) + "]";
      for (const auto* m : usable) {
        const double v = std::string(family) == "w2_pv" ? m->sup[i].w2_pv : m->sup[i].center_gap;
        if (v > 0.0) s.points.emplace_back(std::log10(m->epsilon), std::log10(v));
      }
      if (const FamilyFit* f = sweep.find(family, static_cast<int>(i))) s.fit = f->fit;
      series.push_back(std::move(s));
    }
  }
  {
    Series s;
    s.label = "w1_total";
    for (const auto* m : usable)
      if (m->sup_w1 > 0.0) s.points.emplace_back(std::log10(m->epsilon), std::log10(m->sup_w1));
    if (const FamilyFit* f = sweep.find("w1_total", -1)) s.fit = f->fit;
    series.push_back(std::move(s));
  }

  std::ostringstream s;
  const double width = 2 * kPanelW + 3 * kMargin + 80;
  const double height = kPanelH + 2 * kMargin + 40;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  // Left panel: sup-over-time distances against eps on log axes.
  const double x0 = kMargin;
  const double y0 = kMargin;
  Axis ax = empty_axis();
  Axis ay = empty_axis();
  for (const auto& se : series)
    for (const auto& [x, y] : se.points) {
      ax.include(x);
      ay.include(y);
    }
  ax.pad();
  ay.pad();
  ax.pixel_lo = x0;
  ax.pixel_hi = x0 + kPanelW;
  ay.pixel_lo = y0 + kPanelH;
  ay.pixel_hi = y0;
  frame(s, x0, y0, "sup over time vs epsilon", "log10 epsilon", "log10 distance");
  ticks(s, ax, ay, true);
  double legend_y = y0 + 16;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& se = series[k];
    const char* color = kColors[k % std::size(kColors)];
    for (const auto& [x, y] : se.points)
      s << "<circle cx=\"" << ax.map(x) << "\" cy=\"" << ay.map(y) << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    std::string label = se.label;
    if (se.fit) {
      const double ln10 = std::log(10.0);
      const double xa = ax.lo;
      const double xb = ax.hi;
      // log10 v = slope * log10 eps + intercept / ln 10
      const double ya = se.fit->slope * xa + se.fit->intercept / ln10;
      const double yb = se.fit->slope * xb + se.fit->intercept / ln10;
      s << "<line x1=\"" << ax.map(xa) << "\" y1=\"" << ay.map(ya) << "\" x2=\"" << ax.map(xb) << "\" y2=\""
        << ay.map(yb) << "\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\"/>\n";
      label += " slope=" + fixed(se.fit->slope, 2);
    }
    s << "<text x=\"" << x0 + 8 << "\" y=\"" << legend_y << "\" font-size=\"11\" fill=\"" << color << "\">"
      << escape(label) << "</text>\n";
    legend_y += 14;
  }

  // Right panel: W2 to the point vortex over time, one line per run and component.
  const double x1 = x0 + kPanelW + 2 * kMargin;
  Axis tx = empty_axis();
  Axis ty = empty_axis();
  for (const auto* m : usable)
    for (const auto& r : m->run.records) {
      tx.include(r.t);
      for (const auto& d : r.components) ty.include(d.w2_pv);
    }
  tx.pad();
  ty.pad();
  tx.pixel_lo = x1;
  tx.pixel_hi = x1 + kPanelW;
  ty.pixel_lo = y0 + kPanelH;
  ty.pixel_hi = y0;
  frame(s, x1, y0, "W2 to the point vortex over time", "t", "W2");
  ticks(s, tx, ty, false);
  legend_y = y0 + 16;
  for (std::size_t k = 0; k < usable.size(); ++k) {
    const auto* m = usable[k];
    const char* color = kColors[k % std::size(kColors)];
    for (std::size_t i = 0; i < comps; ++i) {
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\""
        << (i > 0 ? " stroke-dasharray=\"5 2\"" : "") << " points=\"";
      for (const auto& r : m->run.records)
        if (i < r.components.size()) s << tx.map(r.t) << ',' << ty.map(r.components[i].w2_pv) << ' ';
      s << "\"/>\n";
    }
    s << "<text x=\"" << x1 + kPanelW + 8 << "\" y=\"" << legend_y << "\" font-size=\"11\" fill=\"" << color
      << "\">eps=" << escape(format_double(m->epsilon)) << "</text>\n";
    legend_y += 14;
  }
  s << "</svg>\n";

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << s.str();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace vortexlab
