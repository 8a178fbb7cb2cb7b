#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "afcmem/errors.hpp"
#include "workspace.hpp"

namespace afcmem::scenario {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 36, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * w; };
  auto sy = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * h; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title)
    << "</text>\n";
  o << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(w) << "\" height=\"" << px(h)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << px(sx(xv)) << "\" y=\"" << px(kTop + h + 16) << "\" text-anchor=\"middle\">" << num(xv)
      << "</text>\n";
    o << "<text x=\"" << px(kLeft - 6) << "\" y=\"" << px(sy(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
      << "</text>\n";
  }
  o << "<text x=\"" << px(kLeft + w / 2) << "\" y=\"" << px(kHeight - 10) << "\" text-anchor=\"middle\">"
    << escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(14," << px(kTop + h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(plot.y_label) << "</text>\n";

  std::size_t colour = 0;
  for (const auto& s : plot.series) {
    const char* c = kColors[colour++ % 5];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.markers) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.y[i])) continue;
        o << "<circle cx=\"" << px(sx(s.x[i])) << "\" cy=\"" << px(sy(s.y[i])) << "\" r=\"2\" fill=\"" << c
          << "\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.2\" points=\"";
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.y[i])) continue;
        o << px(sx(s.x[i])) << ',' << px(sy(s.y[i])) << ' ';
      }
      o << "\"/>\n";
    }
    if (!s.label.empty()) {
      const double ly = kTop + 14.0 * static_cast<double>(colour);
      o << "<text x=\"" << px(kLeft + w - 8) << "\" y=\"" << px(ly) << "\" text-anchor=\"end\" fill=\"" << c << "\">"
        << escape(s.label) << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

std::filesystem::path Workspace::file(const std::string& name) {
  artifacts_.push_back(name);
  return dir_ / name;
}

void Workspace::text(const std::string& name, const std::string& content) {
  std::ofstream out(file(name), std::ios::binary);
  if (!out) throw Error("cannot write " + name);
  out << content;
}

void Workspace::plot(const std::string& name, const Plot& p) {
  if (plots_) text(name, render_svg(p));
}

}  // namespace afcmem::scenario
