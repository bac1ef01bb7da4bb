#include "mavoid/trajectory_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "mavoid/errors.hpp"

namespace mavoid {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string write_trajectory(const PathSamples& path, const std::vector<Edge>& edges) {
  std::ostringstream os;
  const int agents = path.q.empty() ? 0 : static_cast<int>(path.q.front().size());
  const int dim = path.manifold.ambient_dim();
  const bool has_v = !path.v.empty();
  os << "# mavoid trajectory manifold=" << path.manifold.name() << " agents=" << agents << "\n";
  os << "t";
  for (int i = 0; i < agents; ++i) {
    for (int c = 0; c < dim; ++c) os << ",a" << i + 1 << "_q" << c + 1;
    if (has_v) {
      for (int c = 0; c < dim; ++c) os << ",a" << i + 1 << "_v" << c + 1;
    }
  }
  for (const Edge& e : edges) os << ",d_" << e.i + 1 << "_" << e.j + 1;
  os << "\n";
  for (std::size_t s = 0; s < path.t.size(); ++s) {
    os << format_double(path.t[s]);
    for (int i = 0; i < agents; ++i) {
      for (int c = 0; c < dim; ++c) os << "," << format_double(path.q[s][i][c]);
      if (has_v) {
        for (int c = 0; c < dim; ++c) os << "," << format_double(path.v[s][i][c]);
      }
    }
    for (const Edge& e : edges) {
      os << "," << format_double(dist(path.manifold, path.q[s][e.i], path.q[s][e.j]));
    }
    os << "\n";
  }
  return os.str();
}

std::string write_trajectory(const Trajectory& traj, const std::vector<Edge>& edges) {
  return write_trajectory(path_samples(traj), edges);
}

namespace {

[[noreturn]] void csv_error(int line, const std::string& msg) {
  throw ParseError("trajectory line " + std::to_string(line) + ": " + msg, line, 0);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TrajectoryTable read_trajectory(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  int lineno = 0;
  TrajectoryTable tab;
  bool manifold_known = false;

  // Comment lines first; the mavoid one names the manifold.
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("manifold=");
      if (pos != std::string::npos) {
        std::string name = line.substr(pos + 9);
        name = name.substr(0, name.find_first_of(" \r"));
        if (name == "s2") {
          tab.path.manifold = Manifold::sphere();
        } else if (name.size() > 1 && name[0] == 'r') {
          tab.path.manifold = Manifold::euclidean(std::atoi(name.c_str() + 1));
        } else {
          csv_error(lineno, "unknown manifold '" + name + "'");
        }
        manifold_known = true;
      }
      continue;
    }
    header = split(line);
    break;
  }
  if (header.empty() || header[0] != "t") csv_error(lineno, "missing header row starting with t");

  // Column roles from the header.
  int agents = 0, dim = 0;
  bool has_v = false;
  struct Col {
    enum { Q, V, D } kind;
    int agent, comp;
  };
  std::vector<Col> cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    int a = 0, k = 0, j = 0;
    char kind = 0;
    char tail = 0;
    if (std::sscanf(header[c].c_str(), "a%d_%c%d%c", &a, &kind, &k, &tail) == 3 &&
        (kind == 'q' || kind == 'v') && a >= 1 && k >= 1) {
      cols.push_back({kind == 'q' ? Col::Q : Col::V, a - 1, k - 1});
      agents = std::max(agents, a);
      dim = std::max(dim, k);
      has_v = has_v || kind == 'v';
    } else if (std::sscanf(header[c].c_str(), "d_%d_%d%c", &a, &j, &tail) == 2 && a >= 1 &&
               j >= 1 && a != j) {
      cols.push_back({Col::D, a - 1, j - 1});
      tab.edges.push_back(Edge{std::min(a, j) - 1, std::max(a, j) - 1});
    } else {
      csv_error(lineno, "unrecognised column '" + header[c] + "'");
    }
  }
  if (agents == 0) csv_error(lineno, "no position columns");
  for (const Edge& e : tab.edges) {
    if (e.j >= agents) csv_error(lineno, "distance column refers to a missing agent");
  }
  if (!manifold_known) tab.path.manifold = Manifold::euclidean(dim);
  if (tab.path.manifold.ambient_dim() != dim) csv_error(lineno, "column count does not match manifold");

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      csv_error(lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    std::vector<double> values;
    for (const auto& f : fields) {
      errno = 0;
      char* end = nullptr;
      const double x = std::strtod(f.c_str(), &end);
      if (f.empty() || *end != '\0' || errno == ERANGE) csv_error(lineno, "bad number '" + f + "'");
      values.push_back(x);
    }
    tab.path.t.push_back(values[0]);
    std::vector<Vec> q(agents, Vec::Zero(dim)), v(agents, Vec::Zero(dim));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c].kind == Col::Q) q[cols[c].agent][cols[c].comp] = values[c + 1];
      if (cols[c].kind == Col::V) v[cols[c].agent][cols[c].comp] = values[c + 1];
    }
    tab.path.q.push_back(std::move(q));
    if (has_v) tab.path.v.push_back(std::move(v));
  }
  if (tab.path.t.empty()) csv_error(lineno, "no data rows");
  return tab;
}

std::string write_gnuplot_script(const PathSamples& path, const std::string& csv_name) {
  std::ostringstream os;
  const int agents = path.q.empty() ? 0 : static_cast<int>(path.q.front().size());
  const int dim = path.manifold.ambient_dim();
  os << "set datafile separator ','\n";
  os << "set key outside\n";
  const bool three = dim >= 3;
  os << (three ? "splot " : "plot ");
  for (int i = 0; i < agents; ++i) {
    const int base = 2 + i * dim * (path.v.empty() ? 1 : 2);
    if (i) os << ", \\\n     ";
    os << "'" << csv_name << "' every ::1 using ";
    if (three) {
      os << base << ":" << base + 1 << ":" << base + 2;
    } else if (dim == 2) {
      os << base << ":" << base + 1;
    } else {
      os << "1:" << base;
    }
    os << " with lines title 'agent " << i + 1 << "'";
  }
  os << "\npause -1\n";
  return os.str();
}

namespace {

ordered_json edge_json(const Edge& e) { return ordered_json::array({e.i + 1, e.j + 1}); }

}  // namespace

std::string write_certificate(const CertificateReport& r) {
  ordered_json doc;
  doc["kind"] = to_string(r.cert.kind);
  doc["pass"] = r.cert.pass;
  if (!r.reference_source.empty()) doc["reference"] = r.reference_source;
  if (r.constants) {
    const auto& c = *r.constants;
    doc["convention"] = to_string(c.convention);
    doc["constants"] = {{"T", c.T}, {"a", c.a}, {"c", c.c}, {"v", c.v}, {"Vminus", c.Vminus}};
  }
  if (r.bounds) {
    const auto& b = *r.bounds;
    doc["bounds"] = {{"v_max", b.v_max},
                     {"a_max", b.a_max},
                     {"eta_max", b.eta_max},
                     {"v0", b.v0},
                     {"eta0", b.eta0}};
  }
  if (r.bounded_sum) doc["bounded_sum"] = *r.bounded_sum;
  if (r.radius_limit) doc["radius_limit"] = *r.radius_limit;
  ordered_json edges = ordered_json::array();
  for (std::size_t k = 0; k < r.cert.edges.size(); ++k) {
    edges.push_back({{"edge", edge_json(r.cert.edges[k])},
                     {"threshold", r.cert.threshold[k]},
                     {"vstar", r.cert.vstar[k]},
                     {"margin", r.cert.margin[k]}});
  }
  doc["edges"] = edges;
  if (!r.overrides.empty()) doc["overrides"] = r.overrides;
  return doc.dump(2) + "\n";
}

std::string write_solve_report(const SolveReport& rep, const std::vector<EdgeAvoidance>& avoidance,
                               const std::map<std::string, std::string>& overrides) {
  ordered_json doc;
  doc["converged"] = rep.converged;
  doc["residual"] = rep.residual;
  doc["iterations"] = rep.iterations;
  doc["function_evals"] = rep.function_evals;
  doc["restarts"] = rep.restarts_used;
  doc["inflated_retry"] = rep.inflated_retry;
  doc["singular_evals"] = rep.singular_evals;
  doc["message"] = rep.message;
  std::vector<double> u(rep.unknowns.data(), rep.unknowns.data() + rep.unknowns.size());
  doc["unknowns"] = u;
  ordered_json edges = ordered_json::array();
  for (const auto& a : avoidance) {
    edges.push_back({{"edge", edge_json(a.edge)},
                     {"min_distance", a.min_distance},
                     {"argmin_t", a.argmin_t},
                     {"avoided", a.avoided}});
  }
  doc["avoidance"] = edges;
  if (!overrides.empty()) doc["overrides"] = overrides;
  return doc.dump(2) + "\n";
}

}  // namespace mavoid
