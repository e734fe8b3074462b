#pragma once

// CSV writers. Numbers use the shortest representation that round-trips,
// '.' as decimal separator and '\n' line endings; every file has a header.

#include <ostream>
#include <span>
#include <string>

#include "gllab/empirical_measure.hpp"
#include "gllab/hydrodynamic_pde.hpp"
#include "gllab/particle_system.hpp"
#include "gllab/rare_event_lab.hpp"
#include "gllab/rate_function.hpp"

namespace gllab {

std::string format_double(double v);

/// t, x_0..x_{N-1}, cumulative_log_weight, cumulative_cost
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec);
/// t, theta_0..theta_{N-1}, w_0..w_{N-1}
void write_measure_path_csv(std::ostream& os, const MeasurePath& path);
/// t, m_0..m_{J-1} (values at theta_j = j/J)
void write_field_csv(std::ostream& os, const DensityField& field);
/// initial_cost, dynamic_cost, total, feasible
void write_rate_csv(std::ostream& os, const RateDecomposition& r);
/// method, N, M, estimate, std_error, wall_time_s, seed
void write_report_csv(std::ostream& os, std::span<const ExperimentReport> reports);
void write_trend_csv(std::ostream& os, std::span<const TrendRow> rows);

}  // namespace gllab
