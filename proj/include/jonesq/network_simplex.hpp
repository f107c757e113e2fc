#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace jonesq {

struct FlowArc {
  int source = 0;
  int target = 0;
  double cost = 0.0;
};

struct FlowSolution {
  double cost = 0.0;
  std::vector<double> flow;       ///< per input arc
  /// Node potentials with c(a) + potential[source] - potential[target] >= 0 on every arc.
  std::vector<double> potential;
  long iterations = 0;
};

struct NetworkSimplexOptions {
  long max_iterations = 0;  ///< 0 picks 50 * (nodes + arcs) + 1000
  double tolerance = 1e-14; ///< pivot threshold, relative to the artificial arc cost
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incremental solver: arcs may be appended between solves, and each solve resumes from the
/// previous optimal tree (new arcs enter at zero flow, so that tree stays feasible).
/// Every arc cost must lie in [0, cost_bound].
class NetworkSimplex {
 public:
  NetworkSimplex(int node_count, std::vector<double> supply, double cost_bound,
                 const NetworkSimplexOptions& options = {});
  ~NetworkSimplex();
  NetworkSimplex(NetworkSimplex&&) noexcept;
  NetworkSimplex& operator=(NetworkSimplex&&) noexcept;

  void add_arc(const FlowArc& arc);
  int arc_count() const;
  /// Flows are reported per added arc, in insertion order.
  FlowSolution solve();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Uncapacitated min-cost flow by the primal network simplex with block-search pivoting.
/// supply[v] > 0 is a source, < 0 a sink; supplies must balance up to round-off.
/// Throws SolverError when the problem is infeasible or the pivot cap is hit.
FlowSolution solve_min_cost_flow(int node_count, const std::vector<double>& supply,
                                 const std::vector<FlowArc>& arcs,
                                 const NetworkSimplexOptions& options = {});

}  // namespace jonesq
