#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mavoid/scenario.hpp"
#include "mavoid/trajectory_io.hpp"

namespace mavoid {

/// Command-line style overrides applied on top of a scenario. Every set
/// field is echoed into the reports.
struct Overrides {
  std::optional<double> h;
  std::optional<Integrator> method;
  std::optional<ConstantsConvention> convention;
  std::optional<long> max_evals;
  std::optional<double> r;

  void apply(Scenario& s) const;
  std::map<std::string, std::string> echo() const;
};

struct CertifyOptions {
  bool bounded = false;
  std::optional<double> bounded_r;     ///< falls back to scenario bounded.r, then tolerances r
  std::optional<std::string> reference_csv;
  std::optional<double> vstar;         ///< forces V* on every edge
  std::optional<std::vector<double>> accel_bound;
  /// Solution used for bounded certificates; solved on demand if absent.
  const SolveReport* solution = nullptr;
};

/// Per-agent grid maxima of |acceleration|, by central differences of the
/// velocity columns. R^n only.
std::vector<double> path_accel_maxima(const PathSamples& path);

/// Minimizer constants from a sampled path, with the same safety-region
/// precondition as reference_constants.
ReferenceConstants path_constants(const PathSamples& path, double T, const InteractionGraph& g,
                                  const Tolerances& tol, const std::vector<double>& Vminus,
                                  ConstantsConvention convention);

/// V at the initial distance of every edge (the V- used by bounded certificates).
std::vector<double> initial_potentials(const Scenario& s);

/// Minimizer certificate (constants from a trajectory file, declared
/// acceleration bounds or the reference recipe, in that order) or, with
/// `bounded`, the bounded-derivative certificate of a solution.
CertificateReport certify_scenario(const Scenario& s, const CertifyOptions& opt);

struct Fact {
  std::string id;
  std::string description;
  double value = 0.0;
  std::string expected;
  bool pass = false;
};

struct ReproduceResult {
  std::string which;
  Scenario scenario;
  Trajectory baseline;
  std::vector<EdgeAvoidance> baseline_avoidance;
  SolveReport solved;
  std::vector<EdgeAvoidance> solved_avoidance;
  CertificateReport certificate;
  std::vector<Fact> facts;
  std::map<std::string, std::string> overrides;

  bool pass() const;
};

using Logger = std::function<void(const std::string&)>;

/// Runs the bundled scenario end to end: baseline without potential, shooting
/// solve with potential, certificate, avoidance check and the pinned facts.
ReproduceResult reproduce(const std::string& which, const Overrides& ov = {},
                          const Logger& log = {});

/// Summary document of a reproduction (facts plus headline numbers).
std::string reproduce_summary(const ReproduceResult& r);

/// Writes baseline.csv, trajectory.csv, solve_report.json, certificate.json,
/// summary.json and plot.gp into dir (created if missing).
void write_bundle(const ReproduceResult& r, const std::string& dir);

/// Reads a whole file; InputError naming the path when it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace mavoid
