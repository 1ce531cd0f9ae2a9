#include "replica/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace replica {

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << "timestep,mean_reward,mean_variance,entropy,policy_loss,value_loss,clip_fraction\n";
  for (const auto& r : rows) {
    out << r.timestep << ',' << format_double(r.mean_reward) << ',' << format_double(r.mean_variance)
        << ',' << format_double(r.entropy) << ',' << format_double(r.policy_loss) << ','
        << format_double(r.value_loss) << ',' << format_double(r.clip_fraction) << '\n';
  }
}

void write_timing_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << "timestep,wall_seconds\n";
  for (const auto& r : rows) out << r.timestep << ',' << format_double(r.wall_seconds) << '\n';
}

void write_comparison_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "entrant,episodes,steps,mean_variance,std_variance,episode_std_variance,mean_reward,"
         "ignored_fraction\n";
  for (const auto& r : reports) {
    out << r.entrant << ',' << r.episodes << ',' << r.steps << ',' << format_double(r.mean_variance)
        << ',' << format_double(r.std_variance) << ',' << format_double(r.episode_std_variance) << ','
        << format_double(r.mean_reward) << ',' << format_double(r.ignored_fraction) << '\n';
  }
}

void print_comparison_table(std::ostream& out, std::span<const EvalReport> reports) {
  const auto flags = out.flags();
  out << std::left << std::setw(24) << "entrant" << std::right << std::setw(26)
      << "mean variance (+- ep std)" << std::setw(14) << "mean reward" << std::setw(10) << "ignored"
      << '\n';
  for (const auto& r : reports) {
    char cell[64];
    std::snprintf(cell, sizeof(cell), "%.2f +- %.2f", r.mean_variance, r.episode_std_variance);
    out << std::left << std::setw(24) << r.entrant << std::right << std::setw(26) << cell
        << std::setw(14) << std::fixed << std::setprecision(4) << r.mean_reward << std::setw(10)
        << std::setprecision(3) << r.ignored_fraction << '\n';
  }
  out.flags(flags);
}

void write_line_chart_svg(const std::filesystem::path& path, std::string_view title,
                          std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("chart series differ in length");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  constexpr double kW = 640, kH = 360, kPad = 48;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">"
      << title << "</text>\n";
  if (xs.empty()) {
    out << "</svg>\n";
    return;
  }
  const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  const double xspan = *xmax > *xmin ? *xmax - *xmin : 1.0;
  const double yspan = *ymax > *ymin ? *ymax - *ymin : 1.0;
  auto px = [&](double x) { return kPad + (x - *xmin) / xspan * (kW - 2 * kPad); };
  auto py = [&](double y) { return kH - kPad - (y - *ymin) / yspan * (kH - 2 * kPad); };

  out << "<polyline fill=\"none\" stroke=\"#9ecae1\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) out << px(xs[i]) << ',' << py(ys[i]) << ' ';
  out << "\"/>\n";

  // least-squares trend
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  const double intercept = (sy - slope * sx) / n;
  out << "<line stroke=\"#08519c\" stroke-width=\"2\" x1=\"" << px(*xmin) << "\" y1=\""
      << py(intercept + slope * *xmin) << "\" x2=\"" << px(*xmax) << "\" y2=\""
      << py(intercept + slope * *xmax) << "\"/>\n";
  out << "<text x=\"" << kPad << "\" y=\"" << kH - 12 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << format_double(*xmin) << " .. " << format_double(*xmax) << " (y: " << format_double(*ymin)
      << " .. " << format_double(*ymax) << ")</text>\n</svg>\n";
}

}  // namespace replica
