#include "unlearn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "unlearn/errors.hpp"

namespace unlearn {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

void write_svg_plot(const std::string& path, const SvgPlotOptions& opt,
                    const std::vector<SvgSeries>& series) {
  const double ml = 70, mr = 20, mt = 36, mb = 50;
  const double pw = opt.width - ml - mr;
  const double ph = opt.height - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (opt.log_x && x <= 0.0) throw ConfigError("svg: nonpositive x on log axis");
      if (opt.log_y && y <= 0.0) throw ConfigError("svg: nonpositive y on log axis");
      const double tx = opt.log_x ? std::log10(x) : x;
      const double ty = opt.log_y ? std::log10(y) : y;
      xmin = std::min(xmin, tx), xmax = std::max(xmax, tx);
      ymin = std::min(ymin, ty), ymax = std::max(ymax, ty);
    }
  }
  if (!(xmin <= xmax)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
  if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
  if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
  const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad, xmax += xpad, ymin -= ypad, ymax += ypad;

  const auto px = [&](double x) {
    const double t = opt.log_x ? std::log10(x) : x;
    return ml + (t - xmin) / (xmax - xmin) * pw;
  };
  const auto py = [&](double y) {
    const double t = opt.log_y ? std::log10(y) : y;
    return mt + ph - (t - ymin) / (ymax - ymin) * ph;
  };

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write svg file: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
      << "\" height=\"" << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" "
         "font-size=\"14\">" << opt.title << "</text>\n";

  // Ticks: decades on log axes, 5 even ticks otherwise.
  const auto emit_xtick = [&](double v) {
    const double x = px(v);
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(mt + ph + 18)
        << "\" text-anchor=\"middle\">" << tick_label(v) << "</text>\n";
  };
  const auto emit_ytick = [&](double v) {
    const double y = py(v);
    out << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(ml)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
  };
  if (opt.log_x) {
    for (int e = static_cast<int>(std::ceil(xmin)); e <= static_cast<int>(std::floor(xmax)); ++e) {
      emit_xtick(std::pow(10.0, e));
    }
  } else {
    for (int k = 0; k <= 4; ++k) emit_xtick(xmin + (xmax - xmin) * k / 4.0);
  }
  if (opt.log_y) {
    for (int e = static_cast<int>(std::ceil(ymin)); e <= static_cast<int>(std::floor(ymax)); ++e) {
      emit_ytick(std::pow(10.0, e));
    }
  } else {
    for (int k = 0; k <= 4; ++k) emit_ytick(ymin + (ymax - ymin) * k / 4.0);
  }

  out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(opt.height - 10)
      << "\" text-anchor=\"middle\">" << opt.x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << fmt(mt + ph / 2) << "\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 16 " << fmt(mt + ph / 2) << ")\">" << opt.y_label
      << "</text>\n";

  if (opt.diagonal) {
    const double lo = std::max(opt.log_x ? std::pow(10.0, xmin) : xmin,
                               opt.log_y ? std::pow(10.0, ymin) : ymin);
    const double hi = std::min(opt.log_x ? std::pow(10.0, xmax) : xmax,
                               opt.log_y ? std::pow(10.0, ymax) : ymax);
    if (lo < hi) {
      out << "<line x1=\"" << fmt(px(lo)) << "\" y1=\"" << fmt(py(lo)) << "\" x2=\""
          << fmt(px(hi)) << "\" y2=\"" << fmt(py(hi))
          << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    }
  }

  double legend_y = mt + 14;
  for (const auto& s : series) {
    if (s.connect && s.points.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : s.points) out << fmt(px(x)) << "," << fmt(py(y)) << " ";
      out << "\"/>\n";
    }
    for (const auto& [x, y] : s.points) {
      out << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
          << "\" r=\"2.5\" fill=\"" << s.color << "\" fill-opacity=\"0.7\"/>\n";
    }
    if (!s.label.empty()) {
      out << "<circle cx=\"" << fmt(ml + pw - 130) << "\" cy=\"" << fmt(legend_y - 4)
          << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      out << "<text x=\"" << fmt(ml + pw - 120) << "\" y=\"" << fmt(legend_y) << "\">"
          << s.label << "</text>\n";
      legend_y += 16;
    }
  }
  out << "</svg>\n";
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace unlearn
