#include "dlasso/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dlasso/stats.hpp"

namespace dlasso::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 52.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

void open_doc(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2
      << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << title << "</text>\n";
}

std::vector<double> finite_sorted(const std::vector<double>& values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) {
    if (std::isfinite(x)) v.push_back(x);
  }
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

std::vector<double> fd_bin_edges(const std::vector<double>& pooled) {
  const std::vector<double> v = finite_sorted(pooled);
  if (v.empty()) throw std::invalid_argument("fd_bin_edges: no finite values");
  const double lo = v.front();
  const double hi = v.back();
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  const double iqr = stats::quantile_sorted(v, 0.75) -
                     stats::quantile_sorted(v, 0.25);
  double width = 2.0 * iqr / std::cbrt(double(v.size()));
  if (width <= 0.0) width = (hi - lo) / 10.0;
  int bins = static_cast<int>(std::ceil((hi - lo) / width));
  bins = std::clamp(bins, 1, 200);
  std::vector<double> edges(bins + 1);
  for (int i = 0; i <= bins; ++i) {
    edges[i] = lo + (hi - lo) * double(i) / bins;
  }
  return edges;
}

std::string histogram(const std::vector<double>& values,
                      const std::vector<double>& edges,
                      const std::string& title) {
  if (edges.size() < 2) throw std::invalid_argument("histogram: bad edges");
  const std::vector<double> v = finite_sorted(values);
  const int bins = static_cast<int>(edges.size()) - 1;
  std::vector<int> counts(bins, 0);
  for (double x : v) {
    if (x < edges.front() || x > edges.back()) continue;
    int b = static_cast<int>((x - edges.front()) /
                             (edges.back() - edges.front()) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++counts[b];
  }
  const int peak = std::max(1, *std::max_element(counts.begin(), counts.end()));

  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  auto xpos = [&](double x) {
    return kMargin +
           (x - edges.front()) / (edges.back() - edges.front()) * plot_w;
  };

  std::ostringstream out;
  open_doc(out, title);
  for (int b = 0; b < bins; ++b) {
    if (counts[b] == 0) continue;
    const double h = plot_h * counts[b] / peak;
    out << "<rect x=\"" << num(xpos(edges[b])) << "\" y=\""
        << num(kHeight - kMargin - h) << "\" width=\""
        << num(xpos(edges[b + 1]) - xpos(edges[b])) << "\" height=\"" << num(h)
        << "\" fill=\"#4878b0\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  // axes
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin
      << "\" x2=\"" << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\""
      << kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n";
  for (double frac : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double x = edges.front() + frac * (edges.back() - edges.front());
    out << "<text x=\"" << num(xpos(x)) << "\" y=\"" << kHeight - kMargin + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << label_num(x) << "</text>\n";
  }
  out << "<text x=\"" << kMargin - 8 << "\" y=\"" << kMargin + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << peak << "</text>\n";
  out << "<text x=\"" << kMargin - 8 << "\" y=\"" << kHeight - kMargin
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">0</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string boxplot(const std::vector<BoxGroup>& groups,
                    const std::string& title) {
  if (groups.empty()) throw std::invalid_argument("boxplot: no groups");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  struct Box {
    double q1, med, q3, wlo, whi;
    std::vector<double> outliers;
  };
  std::vector<Box> boxes;
  for (const auto& g : groups) {
    const std::vector<double> v = finite_sorted(g.values);
    if (v.size() < 2) throw std::invalid_argument("boxplot: group too small");
    Box b;
    b.q1 = stats::quantile_sorted(v, 0.25);
    b.med = stats::quantile_sorted(v, 0.5);
    b.q3 = stats::quantile_sorted(v, 0.75);
    const double iqr = b.q3 - b.q1;
    const double fence_lo = b.q1 - 1.5 * iqr;
    const double fence_hi = b.q3 + 1.5 * iqr;
    b.wlo = b.q3;
    b.whi = b.q1;
    for (double x : v) {
      if (x < fence_lo || x > fence_hi) {
        b.outliers.push_back(x);
      } else {
        b.wlo = std::min(b.wlo, x);
        b.whi = std::max(b.whi, x);
      }
    }
    lo = std::min({lo, b.wlo, b.outliers.empty() ? b.wlo : v.front()});
    hi = std::max({hi, b.whi, b.outliers.empty() ? b.whi : v.back()});
    boxes.push_back(std::move(b));
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double plot_h = kHeight - 2 * kMargin;
  auto ypos = [&](double v) {
    return kHeight - kMargin - (v - lo) / (hi - lo) * plot_h;
  };
  const double slot = (kWidth - 2 * kMargin) / double(groups.size());
  const double bw = std::min(60.0, slot * 0.5);

  std::ostringstream out;
  open_doc(out, title);
  // zero line for reference when visible
  if (lo < 0.0 && hi > 0.0) {
    out << "<line x1=\"" << kMargin << "\" y1=\"" << num(ypos(0)) << "\" x2=\""
        << kWidth - kMargin << "\" y2=\"" << num(ypos(0))
        << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box& b = boxes[i];
    const double cx = kMargin + slot * (double(i) + 0.5);
    out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ypos(b.wlo))
        << "\" x2=\"" << num(cx) << "\" y2=\"" << num(ypos(b.whi))
        << "\" stroke=\"black\"/>\n";
    for (double w : {b.wlo, b.whi}) {
      out << "<line x1=\"" << num(cx - bw / 4) << "\" y1=\"" << num(ypos(w))
          << "\" x2=\"" << num(cx + bw / 4) << "\" y2=\"" << num(ypos(w))
          << "\" stroke=\"black\"/>\n";
    }
    out << "<rect x=\"" << num(cx - bw / 2) << "\" y=\"" << num(ypos(b.q3))
        << "\" width=\"" << num(bw) << "\" height=\""
        << num(ypos(b.q1) - ypos(b.q3))
        << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(cx - bw / 2) << "\" y1=\"" << num(ypos(b.med))
        << "\" x2=\"" << num(cx + bw / 2) << "\" y2=\"" << num(ypos(b.med))
        << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double o : b.outliers) {
      out << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(ypos(o))
          << "\" r=\"2\" fill=\"none\" stroke=\"black\"/>\n";
    }
    out << "<text x=\"" << num(cx) << "\" y=\"" << kHeight - kMargin + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << groups[i].label << "</text>\n";
  }
  // y axis with quartile ticks
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\""
      << kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n";
  for (double frac : {0.0, 0.5, 1.0}) {
    const double v = lo + frac * (hi - lo);
    out << "<text x=\"" << kMargin - 8 << "\" y=\"" << num(ypos(v) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << label_num(v) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace dlasso::svg
