#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "msrg/error.hpp"
#include "msrg/io/image_io.hpp"

namespace msrg::io {

struct SweepRecord {
  std::string channel;
  int n;
  double shrink;
  double alpha;
  double beta;
  double gamma;
  double d_n;
  double snr_db;
  double wall_time_ms;
};

inline constexpr const char* kSweepHeader = "channel,n,shrink,alpha,beta,gamma,d_n,snr_db,wall_time_ms";

/// Shortest text that parses back to the same double.
inline std::string format_real(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << kSweepHeader << "\r\n";
  for (const auto& r : records) {
    out << csv_field(r.channel) << ',' << r.n << ',' << format_real(r.shrink) << ',' << format_real(r.alpha) << ','
        << format_real(r.beta) << ',' << format_real(r.gamma) << ',' << format_real(r.d_n) << ','
        << format_real(r.snr_db) << ',' << format_real(r.wall_time_ms) << "\r\n";
  }
  return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  detail::ensure_parent_exists(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

/// Single-file SVG line chart of snr_db against shrink, one line per channel.
inline std::string sweep_svg(const std::vector<SweepRecord>& records) {
  constexpr double width = 640, height = 400, margin = 56;
  double y_lo = 1e300, y_hi = -1e300;
  for (const auto& r : records) {
    if (!std::isfinite(r.snr_db)) continue;
    y_lo = std::min(y_lo, r.snr_db);
    y_hi = std::max(y_hi, r.snr_db);
  }
  if (y_lo > y_hi) y_lo = 0, y_hi = 1;
  y_lo = std::floor(y_lo - 0.5);
  y_hi = std::ceil(y_hi + 0.5);
  auto px = [&](double shrink) { return margin + shrink * (width - 2 * margin); };
  auto py = [&](double snr) { return height - margin - (snr - y_lo) / (y_hi - y_lo) * (height - 2 * margin); };

  std::map<std::string, std::vector<const SweepRecord*>> by_channel;
  std::vector<std::string> order;
  for (const auto& r : records) {
    if (!by_channel.count(r.channel)) order.push_back(r.channel);
    by_channel[r.channel].push_back(&r);
  }
  const std::map<std::string, std::string> palette = {
      {"red", "#d62728"}, {"green", "#2ca02c"}, {"blue", "#1f77b4"}, {"gray", "#333333"}};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double s = 0.25 * i;
    svg << "<text x=\"" << px(s) << "\" y=\"" << height - margin + 18 << "\" font-size=\"12\" text-anchor=\"middle\">"
        << s << "</text>\n";
    const double v = y_lo + (y_hi - y_lo) * i / 4.0;
    svg << "<text x=\"" << margin - 6 << "\" y=\"" << py(v) + 4 << "\" font-size=\"12\" text-anchor=\"end\">"
        << format_real(std::round(v * 100) / 100) << "</text>\n";
  }
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" font-size=\"13\" text-anchor=\"middle\">1 - n/N</text>\n";
  svg << "<text x=\"16\" y=\"" << height / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << height / 2 << ")\">SNR [dB]</text>\n";
  for (const auto& name : order) {
    const auto it = palette.find(name);
    const std::string colour = it != palette.end() ? it->second : "#9467bd";
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
    for (const auto* r : by_channel[name])
      if (std::isfinite(r->snr_db)) svg << px(r->shrink) << ',' << py(r->snr_db) << ' ';
    svg << "\"/>\n";
    for (const auto* r : by_channel[name])
      if (std::isfinite(r->snr_db))
        svg << "<circle cx=\"" << px(r->shrink) << "\" cy=\"" << py(r->snr_db) << "\" r=\"3\" fill=\"" << colour
            << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace msrg::io
