#include "gllab/csv.hpp"

#include <charconv>
#include <cmath>

namespace gllab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec) {
  os << "t";
  for (std::size_t i = 0; i < rec.n_sites; ++i) os << ",x_" << i;
  os << ",cumulative_log_weight,cumulative_cost\n";
  for (std::size_t s = 0; s < rec.sample_times.size(); ++s) {
    os << format_double(rec.sample_times[s]);
    for (double x : rec.state(s)) os << ',' << format_double(x);
    os << ',' << format_double(rec.log_weight_at_samples[s]) << ',' << format_double(rec.cost_at_samples[s]) << '\n';
  }
}

void write_measure_path_csv(std::ostream& os, const MeasurePath& path) {
  const std::size_t n = path.measures.empty() ? 0 : path.measures.front().size();
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",theta_" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",w_" << i;
  os << '\n';
  for (std::size_t s = 0; s < path.sample_times.size(); ++s) {
    os << format_double(path.sample_times[s]);
    for (double v : path.measures[s].locations) os << ',' << format_double(v);
    for (double v : path.measures[s].weights) os << ',' << format_double(v);
    os << '\n';
  }
}

void write_field_csv(std::ostream& os, const DensityField& field) {
  os << "t";
  for (std::size_t j = 0; j < field.n_theta; ++j) os << ",m_" << j;
  os << '\n';
  for (std::size_t k = 0; k <= field.n_steps; ++k) {
    os << format_double(field.time(k));
    for (double v : field.level(k)) os << ',' << format_double(v);
    os << '\n';
  }
}

void write_rate_csv(std::ostream& os, const RateDecomposition& r) {
  os << "initial_cost,dynamic_cost,total,feasible\n";
  os << format_double(r.initial_cost) << ',' << format_double(r.dynamic_cost) << ',' << format_double(r.total) << ','
     << (r.feasible ? "true" : "false") << '\n';
}

void write_report_csv(std::ostream& os, std::span<const ExperimentReport> reports) {
  os << "method,N,M,estimate,std_error,wall_time_s,seed\n";
  for (const auto& r : reports) {
    os << r.method << ',' << r.n_sites << ',' << r.replicas << ',' << format_double(r.estimate) << ','
       << format_double(r.std_error) << ',' << format_double(r.wall_time) << ',' << r.seed << '\n';
  }
}

void write_trend_csv(std::ostream& os, std::span<const TrendRow> rows) {
  os << "N,laplace,laplace_se,best_variational,best_se,best_scale,inf_f_plus_i\n";
  for (const auto& r : rows) {
    os << r.n_sites << ',' << format_double(r.laplace) << ',' << format_double(r.laplace_se) << ','
       << format_double(r.best_variational) << ',' << format_double(r.best_se) << ',' << format_double(r.best_scale)
       << ',' << format_double(r.inf_f_plus_i) << '\n';
  }
}

}  // namespace gllab
