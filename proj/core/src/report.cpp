#include "mtl/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mtl/error.hpp"

namespace mtl {

std::string csv_version_line() {
  return std::string("# mtl-asymptotics v") + MTL_ASY_VERSION + " schema=1";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("csv: bad number '" + s + "'");
  }
  return v;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

long long parse_int(const std::string& s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("csv: bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::string sanitize_status(const std::string& text) {
  std::string out = text;
  std::replace(out.begin(), out.end(), ',', ';');
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

std::string format_row(const ResultRow& r) {
  std::ostringstream ss;
  ss << format_number(r.axis_value) << ',' << r.task << ',' << opt(r.theory_err) << ','
     << opt(r.sim_err_mean) << ',' << opt(r.sim_err_stderr) << ',' << opt(r.q_theory)
     << ',' << opt(r.r_theory) << ',' << opt(r.q_emp_mean) << ',' << opt(r.r_emp_mean)
     << ',' << r.trials << ',' << sanitize_status(r.status) << ',' << r.wall_time_ms;
  return ss.str();
}

ParsedCsv parse_result_csv(const std::string& text) {
  ParsedCsv out;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      out.comments.push_back(line.size() > 2 ? line.substr(2) : std::string());
      continue;
    }
    if (!header) {
      if (line != kCsvColumns) throw InvalidArgument("csv: unexpected column header");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 12) throw InvalidArgument("csv: expected 12 fields in '" + line + "'");
    ResultRow r;
    r.axis_value = parse_double(f[0]);
    r.task = static_cast<int>(parse_int(f[1]));
    r.theory_err = parse_opt(f[2]);
    r.sim_err_mean = parse_opt(f[3]);
    r.sim_err_stderr = parse_opt(f[4]);
    r.q_theory = parse_opt(f[5]);
    r.r_theory = parse_opt(f[6]);
    r.q_emp_mean = parse_opt(f[7]);
    r.r_emp_mean = parse_opt(f[8]);
    r.trials = static_cast<int>(parse_int(f[9]));
    r.status = f[10];
    r.wall_time_ms = parse_int(f[11]);
    out.rows.push_back(std::move(r));
  }
  if (!header) throw InvalidArgument("csv: missing column header");
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string render_svg(const PlotSpec& plot) {
  constexpr double width = 720, height = 480;
  constexpr double left = 80, right = 180, top = 50, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double e = i < s.err.size() && std::isfinite(s.err[i]) ? s.err[i] : 0.0;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i] - e);
      ymax = std::max(ymax, s.y[i] + e);
    }
  }
  if (plot.reference_level && std::isfinite(*plot.reference_level)) {
    ymin = std::min(ymin, *plot.reference_level);
    ymax = std::max(ymax, *plot.reference_level);
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
    << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"28\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"16\">" << escape(plot.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\""
    << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    o << "<line x1=\"" << fmt(sx(xv)) << "\" y1=\"" << top + ph << "\" x2=\"" << fmt(sx(xv))
      << "\" y2=\"" << top + ph + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << top + ph + 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << tick_label(xv) << "</text>\n";
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << fmt(sy(yv)) << "\" x2=\"" << left
      << "\" y2=\"" << fmt(sy(yv)) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << left - 8 << "\" y=\"" << fmt(sy(yv) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << tick_label(yv) << "</text>\n";
  }
  o << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << height - 15
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
    << escape(plot.x_label) << "</text>\n";
  o << "<text x=\"20\" y=\"" << fmt(top + ph / 2) << "\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 20 "
    << fmt(top + ph / 2) << ")\">" << escape(plot.y_label) << "</text>\n";

  if (plot.reference_level && std::isfinite(*plot.reference_level)) {
    const double y = sy(*plot.reference_level);
    o << "<line x1=\"" << left << "\" y1=\"" << fmt(y) << "\" x2=\"" << left + pw
      << "\" y2=\"" << fmt(y) << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }

  double legend_y = top + 10;
  auto legend = [&](const std::string& label, const std::string& color, bool line,
                    bool dashed) {
    const double lx = left + pw + 15;
    if (line) {
      o << "<line x1=\"" << lx << "\" y1=\"" << legend_y << "\" x2=\"" << lx + 25
        << "\" y2=\"" << legend_y << "\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    } else {
      o << "<circle cx=\"" << lx + 12 << "\" cy=\"" << legend_y << "\" r=\"4\" fill=\"none\" "
        << "stroke=\"" << color << "\"/>\n";
    }
    o << "<text x=\"" << lx + 32 << "\" y=\"" << legend_y + 4
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(label) << "</text>\n";
    legend_y += 18;
  };

  for (const auto& s : plot.series) {
    if (s.line) {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i])) << ' ';
      }
      o << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        if (i < s.err.size() && std::isfinite(s.err[i]) && s.err[i] > 0) {
          o << "<line x1=\"" << fmt(sx(s.x[i])) << "\" y1=\"" << fmt(sy(s.y[i] - s.err[i]))
            << "\" x2=\"" << fmt(sx(s.x[i])) << "\" y2=\"" << fmt(sy(s.y[i] + s.err[i]))
            << "\" stroke=\"" << s.color << "\"/>\n";
        }
        o << "<circle cx=\"" << fmt(sx(s.x[i])) << "\" cy=\"" << fmt(sy(s.y[i]))
          << "\" r=\"4\" fill=\"none\" stroke=\"" << s.color << "\"/>\n";
      }
    }
    legend(s.label, s.color, s.line, false);
  }
  if (plot.reference_level && std::isfinite(*plot.reference_level)) {
    legend(plot.reference_label.empty() ? "limit" : plot.reference_label, "gray", true, true);
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace mtl
