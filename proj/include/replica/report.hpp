#ifndef REPLICA_REPORT_HPP_
#define REPLICA_REPORT_HPP_

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "replica/evaluation.hpp"
#include "replica/ppo.hpp"

namespace replica {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Column order is fixed:
//   timestep,mean_reward,mean_variance,entropy,policy_loss,value_loss,clip_fraction
// Wall-clock time goes to a separate timing file so metrics stay reproducible.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
void write_timing_csv(std::ostream& out, std::span<const MetricsRow> rows);

void write_comparison_csv(std::ostream& out, std::span<const EvalReport> reports);
void print_comparison_table(std::ostream& out, std::span<const EvalReport> reports);

// Polyline of the series plus its least-squares trend line.
void write_line_chart_svg(const std::filesystem::path& path, std::string_view title,
                          std::span<const double> xs, std::span<const double> ys);

}  // namespace replica

#endif  // REPLICA_REPORT_HPP_
