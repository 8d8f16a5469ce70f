#include "stsscore/report/figures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "stsscore/error.hpp"
#include "stsscore/report/table.hpp"

namespace stsscore {

namespace {

constexpr double kWidth = 480, kHeight = 360;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// A plot area mapping data coordinates onto the SVG canvas.
class Canvas {
 public:
  Canvas(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {}

  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }

  void frame(const std::string& title, const std::string& xlabel, const std::string& ylabel) {
    body_ << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
    body_ << "<rect class=\"frame\" x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
          << "\" height=\"" << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x0_ + (x1_ - x0_) * i / 4.0;
      const double fy = y0_ + (y1_ - y0_) * i / 4.0;
      body_ << "<text x=\"" << num(px(fx)) << "\" y=\"" << kHeight - kBottom + 16
            << "\" text-anchor=\"middle\" font-size=\"11\">" << num(fx) << "</text>\n";
      body_ << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
            << num(fy) << "</text>\n";
    }
    body_ << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
          << esc(xlabel) << "</text>\n";
    body_ << "<text x=\"14\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
          << kHeight / 2 << ")\">" << esc(ylabel) << "</text>\n";
  }

  void line(double xa, double ya, double xb, double yb, const std::string& cls, const std::string& color) {
    body_ << "<line class=\"" << cls << "\" x1=\"" << num(px(xa)) << "\" y1=\"" << num(py(ya)) << "\" x2=\"" << num(px(xb))
          << "\" y2=\"" << num(py(yb)) << "\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\"/>\n";
  }

  void points(std::span<const double> xs, std::span<const double> ys, const std::string& color) {
    body_ << "<g class=\"points\" fill=\"" << color << "\" fill-opacity=\"0.5\">\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
      body_ << "<circle cx=\"" << num(px(xs[i])) << "\" cy=\"" << num(py(ys[i])) << "\" r=\"2.5\"/>\n";
    body_ << "</g>\n";
  }

  void polyline(std::span<const double> xs, std::span<const double> ys, const std::string& cls, const std::string& color) {
    body_ << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) body_ << (i ? " " : "") << num(px(xs[i])) << "," << num(py(ys[i]));
    body_ << "\"/>\n";
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = kTop + 14;
    body_ << "<g class=\"legend\">\n";
    for (const auto& [label, color] : entries) {
      body_ << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\"" << color
            << "\"/>\n<text x=\"" << kWidth - kRight - 135 << "\" y=\"" << y << "\" font-size=\"11\">" << esc(label)
            << "</text>\n";
      y += 16;
    }
    body_ << "</g>\n";
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io_error, "cannot write figure " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    if (!out) fail(Errc::io_error, "write failed for figure " + path.string());
  }

 private:
  double x0_, x1_, y0_, y1_;
  std::ostringstream body_;
};

struct Series {
  std::vector<double> labels;
  std::vector<double> scores;
};

Series series_for(const BenchmarkRun& run, MetricId metric) {
  std::map<std::string, double> by_id;
  for (const auto& s : run.scores)
    if (s.metric == metric) by_id[s.pair_id] = s.score;
  Series out;
  for (const auto& lp : run.dataset.pairs) {
    auto it = by_id.find(lp.pair.id);
    if (it == by_id.end()) continue;
    out.labels.push_back(lp.label.value);
    out.scores.push_back(it->second);
  }
  return out;
}

}  // namespace

std::vector<double> kde(std::span<const double> samples, std::span<const double> at) {
  std::vector<double> out(at.size(), 0.0);
  const auto n = static_cast<double>(samples.size());
  if (samples.empty()) return out;
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sigma = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double h = std::max(sigma * std::pow(n, -0.2), 1e-2);
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < at.size(); ++i) {
    double sum = 0.0;
    for (double x : samples) {
      const double z = (at[i] - x) / h;
      sum += std::exp(-0.5 * z * z);
    }
    out[i] = sum * norm;
  }
  return out;
}

std::vector<std::filesystem::path> emit_figures(const BenchmarkRun& run, const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> files;
  if (run.metrics.empty()) return files;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(Errc::io_error, "cannot create figure directory " + out_dir.string() + ": " + ec.message());
  const std::string dataset(to_string(run.dataset.name));
  const LabelKind kind = run.label_kind();

  if (kind != LabelKind::binary) {
    for (auto metric : run.metrics) {
      auto s = series_for(run, metric);
      std::string xlabel = "gold label";
      if (kind == LabelKind::similarity_0_5) {
        for (auto& l : s.labels) l /= 5.0;
        xlabel = "gold label / 5";
      } else if (!s.labels.empty()) {
        const auto [lo, hi] = std::minmax_element(s.labels.begin(), s.labels.end());
        const double a = *lo, b = *hi;
        for (auto& l : s.labels) l = b > a ? (l - a) / (b - a) : 0.5;
        xlabel = "MQM label (min-max scaled)";
      }
      Canvas c(0.0, 1.0, 0.0, 1.0);
      c.frame(dataset + ": " + std::string(to_string(metric)), xlabel, "similarity score");
      c.line(0.0, 0.0, 1.0, 1.0, "diagonal", "#000");
      c.points(s.labels, s.scores, kPalette[0]);
      const auto path = out_dir / ("scatter_" + std::string(to_string(metric)) + ".svg");
      c.write(path);
      files.push_back(path);
    }
  } else {
    std::vector<double> grid(201);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(i) / 200.0;
    for (auto metric : run.metrics) {
      const auto s = series_for(run, metric);
      std::vector<double> neg, pos;
      for (std::size_t i = 0; i < s.scores.size(); ++i) (s.labels[i] == 1.0 ? pos : neg).push_back(s.scores[i]);
      const auto dneg = kde(neg, grid);
      const auto dpos = kde(pos, grid);
      double ymax = 1.0;
      for (double v : dneg) ymax = std::max(ymax, v);
      for (double v : dpos) ymax = std::max(ymax, v);
      Canvas c(0.0, 1.0, 0.0, std::ceil(ymax));
      c.frame(dataset + ": " + std::string(to_string(metric)), "similarity score", "density");
      c.polyline(grid, dneg, "density class-0", kPalette[1]);
      c.polyline(grid, dpos, "density class-1", kPalette[0]);
      c.legend({{"0 (n=" + std::to_string(neg.size()) + ")", kPalette[1]}, {"1 (n=" + std::to_string(pos.size()) + ")", kPalette[0]}});
      const auto path = out_dir / ("density_" + std::string(to_string(metric)) + ".svg");
      c.write(path);
      files.push_back(path);
    }
    Canvas c(0.0, 1.0, 0.0, 1.0);
    c.frame(dataset + ": ROC", "false positive rate", "true positive rate");
    c.line(0.0, 0.0, 1.0, 1.0, "chance", "#999");
    std::vector<std::pair<std::string, std::string>> legend;
    std::size_t color = 0;
    for (const auto& summary : run.summaries) {
      if (!summary.roc) continue;
      std::vector<double> xs, ys;
      for (const auto& p : summary.roc->points) {
        xs.push_back(p.fpr);
        ys.push_back(p.tpr);
      }
      const char* col = kPalette[color++ % std::size(kPalette)];
      c.polyline(xs, ys, "roc roc-" + std::string(to_string(summary.metric)), col);
      legend.emplace_back(std::string(to_string(summary.metric)) + " (AUC = " + round_half_up(summary.roc->auc) + ")", col);
    }
    c.legend(legend);
    const auto path = out_dir / "roc.svg";
    c.write(path);
    files.push_back(path);
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace stsscore
