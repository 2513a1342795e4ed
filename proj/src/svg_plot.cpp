#include "ncell/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ncell/atomic_file.hpp"
#include "ncell/error.hpp"

namespace ncell {
namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::pair<double, double> range(std::span<const double> v) {
  double lo = INFINITY, hi = -INFINITY;
  for (double x : v) {
    if (!std::isfinite(x)) continue;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!(lo <= hi)) return {0.0, 1.0};
  if (hi == lo) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

void open_svg(std::ostringstream& os, const Frame& f, const PlotLabels& labels, bool log_y) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(labels.title)
     << "</text>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
     << kHeight - kBottom << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    os << "<text x=\"" << f.px(xv) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">" << xv
       << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">"
       << (log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
     << escape(labels.x) << "</text>\n"
     << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (kTop + kHeight - kBottom) / 2 << ")\">" << escape(labels.y) << "</text>\n";
}

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "plot series differ in length");
}

}  // namespace

std::string svg_line_chart(std::span<const double> x, std::span<const double> y, const PlotLabels& labels,
                           bool log_y) {
  check_lengths(x, y);
  std::vector<double> yy(y.begin(), y.end());
  if (log_y) {
    for (auto& v : yy) v = v > 0.0 ? std::log10(v) : NAN;
  }
  const auto [x0, x1] = range(x);
  const auto [y0, y1] = range(yy);
  const Frame f{x0, x1, y0, y1};
  std::ostringstream os;
  os.precision(6);
  open_svg(os, f, labels, log_y);
  os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.2\" points=\"";
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::isfinite(yy[k])) os << f.px(x[k]) << ',' << f.py(yy[k]) << ' ';
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

std::string svg_scatter(std::span<const double> x, std::span<const double> y, const PlotLabels& labels) {
  check_lengths(x, y);
  const auto [x0, x1] = range(x);
  const auto [y0, y1] = range(y);
  const Frame f{x0, x1, y0, y1};
  std::ostringstream os;
  os.precision(6);
  open_svg(os, f, labels, false);
  for (std::size_t k = 0; k < x.size(); ++k) {
    os << "<circle cx=\"" << f.px(x[k]) << "\" cy=\"" << f.py(y[k]) << "\" r=\"1.5\" fill=\"darkred\" fill-opacity=\"0.5\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_svg(const std::filesystem::path& path, const std::string& svg) {
  AtomicFile out(path);
  out.stream() << svg;
  out.commit();
}

}  // namespace ncell
