#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "taskprog/errors.hpp"
#include "taskprog/evalkit.hpp"

namespace taskprog::svg {
namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = INFINITY, hi = -INFINITY;
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

// Ticks at 1, 2 or 5 times a power of ten; the range widens to whole ticks.
std::vector<double> ticks(Range& r) {
  const double raw = (r.hi - r.lo) / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double unit = raw / mag;
  const double step = (unit < 1.5 ? 1 : unit < 3.5 ? 2 : unit < 7.5 ? 5 : 10) * mag;
  r.lo = std::floor(r.lo / step) * step;
  r.hi = std::ceil(r.hi / step) * step;
  std::vector<double> out;
  for (double t = r.lo; t <= r.hi + step * 0.5; t += step) out.push_back(std::abs(t) < step * 1e-9 ? 0 : t);
  return out;
}

class Canvas {
 public:
  Canvas(const Chart& chart, Range x, Range y) : x_(x), y_(y) {
    x_.settle();
    y_.settle();
    const auto xt = ticks(x_);
    const auto yt = ticks(y_);
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out_ << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(chart.title)
         << "</text>\n";
    for (double t : xt) {
      out_ << "<line x1=\"" << coord(px(t)) << "\" y1=\"" << coord(kHeight - kBottom) << "\" x2=\"" << coord(px(t))
           << "\" y2=\"" << coord(kTop) << "\" stroke=\"#e5e5e5\"/>\n";
      out_ << "<text x=\"" << coord(px(t)) << "\" y=\"" << coord(kHeight - kBottom + 16)
           << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    for (double t : yt) {
      out_ << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(py(t)) << "\" x2=\"" << coord(kWidth - kRight)
           << "\" y2=\"" << coord(py(t)) << "\" stroke=\"#e5e5e5\"/>\n";
      out_ << "<text x=\"" << coord(kLeft - 6) << "\" y=\"" << coord(py(t) + 4) << "\" text-anchor=\"end\">" << num(t)
           << "</text>\n";
    }
    out_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
         << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out_ << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
         << escape(chart.x_label) << "</text>\n";
    out_ << "<text transform=\"translate(16 " << (kTop + kHeight - kBottom) / 2
         << ") rotate(-90)\" text-anchor=\"middle\">" << escape(chart.y_label) << "</text>\n";
  }

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }

  std::ostringstream& out() { return out_; }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  Range x_, y_;
  std::ostringstream out_;
};

}  // namespace

std::string line_chart(const Chart& chart, const std::vector<Series>& series) {
  Range x, y;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || (!s.band.empty() && s.band.size() != s.y.size())) {
      throw InvalidArgument("series '" + s.name + "' has mismatched lengths");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x.add(s.x[i]);
      const double b = s.band.empty() ? 0 : s.band[i];
      y.add(s.y[i] - b);
      y.add(s.y[i] + b);
    }
  }
  Canvas canvas(chart, x, y);
  auto& out = canvas.out();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    if (!s.band.empty() && !s.x.empty()) {
      out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) out << coord(canvas.px(s.x[i])) << ',' << coord(canvas.py(s.y[i] + s.band[i])) << ' ';
      for (std::size_t i = s.x.size(); i-- > 0;) out << coord(canvas.px(s.x[i])) << ',' << coord(canvas.py(s.y[i] - s.band[i])) << ' ';
      out << "\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) out << coord(canvas.px(s.x[i])) << ',' << coord(canvas.py(s.y[i])) << ' ';
    out << "\"/>\n";
    const double ly = kTop + 16 + 16 * static_cast<double>(k);
    out << "<line x1=\"" << coord(kWidth - kRight - 150) << "\" y1=\"" << coord(ly - 4) << "\" x2=\""
        << coord(kWidth - kRight - 130) << "\" y2=\"" << coord(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << coord(kWidth - kRight - 125) << "\" y=\"" << coord(ly) << "\">" << escape(s.name)
        << "</text>\n";
  }
  return canvas.finish();
}

std::string error_bar_chart(const Chart& chart, const std::vector<double>& x, const std::vector<double>& mean,
                            const std::vector<double>& half_width) {
  if (x.size() != mean.size() || x.size() != half_width.size()) {
    throw InvalidArgument("error bar chart needs equal-length inputs");
  }
  Range xr, yr;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xr.add(x[i]);
    yr.add(mean[i] - half_width[i]);
    yr.add(mean[i] + half_width[i]);
  }
  yr.add(0);
  if (xr.hi > xr.lo) {
    const double pad = 0.05 * (xr.hi - xr.lo);
    xr.lo -= pad;
    xr.hi += pad;
  }
  Canvas canvas(chart, xr, yr);
  auto& out = canvas.out();
  out << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(canvas.py(0)) << "\" x2=\"" << coord(kWidth - kRight)
      << "\" y2=\"" << coord(canvas.py(0)) << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cx = canvas.px(x[i]);
    const double top = canvas.py(mean[i] + half_width[i]), bottom = canvas.py(mean[i] - half_width[i]);
    out << "<line x1=\"" << coord(cx) << "\" y1=\"" << coord(top) << "\" x2=\"" << coord(cx) << "\" y2=\""
        << coord(bottom) << "\" stroke=\"" << kPalette[0] << "\" stroke-width=\"1.5\"/>\n";
    for (double yy : {top, bottom}) {
      out << "<line x1=\"" << coord(cx - 5) << "\" y1=\"" << coord(yy) << "\" x2=\"" << coord(cx + 5) << "\" y2=\""
          << coord(yy) << "\" stroke=\"" << kPalette[0] << "\" stroke-width=\"1.5\"/>\n";
    }
    out << "<circle cx=\"" << coord(cx) << "\" cy=\"" << coord(canvas.py(mean[i])) << "\" r=\"4\" fill=\""
        << kPalette[1] << "\"/>\n";
  }
  return canvas.finish();
}

}  // namespace taskprog::svg
