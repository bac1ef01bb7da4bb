#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mavoid/bvp.hpp"
#include "mavoid/safety.hpp"

namespace mavoid {

/// CSV layout: a "# mavoid trajectory" comment line, a header row
///   t,a1_q1..a1_qn,a1_v1..a1_vn,...,d_i_j...
/// and one row per sample with 17 significant digits.
std::string write_trajectory(const PathSamples& path, const std::vector<Edge>& edges);
std::string write_trajectory(const Trajectory& traj, const std::vector<Edge>& edges);

struct TrajectoryTable {
  PathSamples path;
  std::vector<Edge> edges;  ///< from the d_i_j columns
};

/// Inverse of write_trajectory. Throws ParseError on malformed input.
TrajectoryTable read_trajectory(const std::string& csv);

/// gnuplot script plotting the agent paths of a trajectory CSV.
std::string write_gnuplot_script(const PathSamples& path, const std::string& csv_name);

struct CertificateReport {
  SafetyCertificate cert;
  std::optional<ReferenceConstants> constants;
  std::optional<DerivativeBounds> bounds;
  std::optional<double> bounded_sum;
  std::optional<double> radius_limit;
  std::string reference_source;
  std::map<std::string, std::string> overrides;
};

std::string write_certificate(const CertificateReport& report);

std::string write_solve_report(const SolveReport& rep, const std::vector<EdgeAvoidance>& avoidance,
                               const std::map<std::string, std::string>& overrides);

/// "%.17g" rendering used by every writer.
std::string format_double(double x);

}  // namespace mavoid
