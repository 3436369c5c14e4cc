#include "amoo_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace amoo::cli {

namespace {

constexpr double kWidth = 760.0;
constexpr double kPanelHeight = 260.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kGap = 60.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                               "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Series {
  std::string label;
  std::vector<std::optional<double>> values;
};

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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Panel {
 public:
  Panel(double top, double x_lo, double x_hi, double y_lo, double y_hi, bool log_scale)
      : top_(top), x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi), log_(log_scale) {
    if (x_hi_ <= x_lo_) x_hi_ = x_lo_ + 1.0;
    if (y_hi_ <= y_lo_) {
      y_lo_ -= 0.5;
      y_hi_ += 0.5;
    }
  }

  double px(double x) const { return kLeft + (x - x_lo_) / (x_hi_ - x_lo_) * (kWidth - kLeft - kRight); }
  double py(double y) const { return top_ + (y_hi_ - y) / (y_hi_ - y_lo_) * kPanelHeight; }

  void frame(std::ostringstream& os, const std::string& y_label) const {
    const double right = kWidth - kRight;
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(top_) << "\" width=\""
       << num(right - kLeft) << "\" height=\"" << num(kPanelHeight)
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double y = y_lo_ + (y_hi_ - y_lo_) * i / 4.0;
      const std::string label = log_ ? "1e" + tick(y) : tick(y);
      os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(y) + 4)
         << "\" font-size=\"11\" text-anchor=\"end\">" << label << "</text>\n";
    }
    for (double x : {x_lo_, x_hi_}) {
      os << "<text x=\"" << num(px(x)) << "\" y=\"" << num(top_ + kPanelHeight + 16)
         << "\" font-size=\"11\" text-anchor=\"middle\">" << tick(x) << "</text>\n";
    }
    os << "<text x=\"" << num(kLeft) << "\" y=\"" << num(top_ - 8)
       << "\" font-size=\"13\">" << escape(y_label) << "</text>\n";
  }

  // One polyline per run of plottable points.
  void series(std::ostringstream& os, const std::vector<double>& steps, const Series& s,
              const char* color, int index) const {
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
           << points << "\"/>\n";
      }
      points.clear();
    };
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const auto& v = s.values[k];
      if (!v || !std::isfinite(*v) || (log_ && *v <= 0.0)) {
        flush();
        continue;
      }
      const double y = log_ ? std::log10(*v) : *v;
      if (!points.empty()) points += ' ';
      points += num(px(steps[k])) + "," + num(py(y));
    }
    flush();
    const double ly = top_ + 14.0 + 16.0 * index;
    const double lx = kWidth - kRight + 12.0;
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 18)
       << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(lx + 24) << "\" y=\"" << num(ly) << "\" font-size=\"11\">"
       << escape(s.label) << "</text>\n";
  }

 private:
  double top_, x_lo_, x_hi_, y_lo_, y_hi_;
  bool log_;
};

std::pair<double, double> range(const std::vector<Series>& all, bool log_scale) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : all) {
    for (const auto& v : s.values) {
      if (!v || !std::isfinite(*v) || (log_scale && *v <= 0.0)) continue;
      const double y = log_scale ? std::log10(*v) : *v;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  return {lo, hi};
}

}  // namespace

std::string render_svg(const RunTrace& trace, const std::string& title) {
  const auto& recs = trace.records;
  std::vector<double> steps;
  for (const auto& r : recs) steps.push_back(r.step);
  const std::size_t m = recs.empty() ? 0 : static_cast<std::size_t>(recs.front().w.size());

  std::vector<Series> upper;
  auto column = [&](const char* label, auto get) {
    Series s{label, {}};
    bool any = false;
    for (const auto& r : recs) {
      s.values.push_back(get(r));
      any = any || s.values.back().has_value();
    }
    if (any) upper.push_back(std::move(s));
  };
  column("residual", [](const IterateRecord& r) { return r.residual; });
  column("msq", [](const IterateRecord& r) { return r.msq; });
  if (upper.empty()) {
    column("grad_norm", [](const IterateRecord& r) { return std::optional<double>(r.grad_norm); });
  }

  std::vector<Series> lower;
  for (std::size_t i = 0; i < m; ++i) {
    Series s{"w_" + std::to_string(i + 1), {}};
    for (const auto& r : recs) {
      s.values.push_back(static_cast<std::size_t>(r.w.size()) > i
                             ? std::optional<double>(r.w[static_cast<Eigen::Index>(i)])
                             : std::nullopt);
    }
    lower.push_back(std::move(s));
  }

  const double x_lo = steps.empty() ? 0.0 : steps.front();
  const double x_hi = steps.empty() ? 1.0 : steps.back();
  const auto [ul, uh] = range(upper, true);
  auto [ll, lh] = range(lower, false);
  ll = std::min(ll, 0.0);

  const double height = kTop + 2 * kPanelHeight + kGap + 40.0;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
     << num(height) << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(height) << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">"
     << escape(title) << "</text>\n";

  const Panel top(kTop + 10, x_lo, x_hi, std::floor(ul), std::ceil(uh), true);
  top.frame(os, "log10 scale");
  for (std::size_t i = 0; i < upper.size(); ++i) {
    top.series(os, steps, upper[i], kColors[i % 8], static_cast<int>(i));
  }

  const Panel bottom(kTop + 10 + kPanelHeight + kGap, x_lo, x_hi, ll, lh, false);
  bottom.frame(os, "weights");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    bottom.series(os, steps, lower[i], kColors[i % 8], static_cast<int>(i));
  }
  os << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(height - 8)
     << "\" font-size=\"12\" text-anchor=\"middle\">step</text>\n"
     << "</svg>\n";
  return os.str();
}

}  // namespace amoo::cli
