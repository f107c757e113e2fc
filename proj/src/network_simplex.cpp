#include "jonesq/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>

// Primal network simplex on a spanning tree stored as parent / thread lists, in the style of
// LEMON's NetworkSimplex (block-search pivot, artificial root, strongly feasible leaving-arc
// rule). Arcs are uncapacitated, so every non-tree arc sits at its lower bound.

namespace jonesq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Simplex {
 public:
  // Artificial arc u joins node u to the root, so real arcs can be appended at the back
  // without renumbering the tree.
  Simplex(int node_count, std::vector<double> supply, double cost_bound,
          const NetworkSimplexOptions& options)
      : nodes_(node_count), root_(node_count), supply_(std::move(supply)), options_(options) {
    if (!(cost_bound >= 0.0) || !std::isfinite(cost_bound))
      throw std::invalid_argument("cost bound must be finite and nonnegative");
    cost_bound_ = cost_bound;
    art_cost_ = (cost_bound + 1.0) * static_cast<double>(nodes_ + 1);
    eps_ = options.tolerance * art_cost_;
    source_.resize(at(nodes_));
    target_.resize(at(nodes_));
    cost_.resize(at(nodes_));
    flow_.assign(at(nodes_), 0.0);
    in_tree_.assign(at(nodes_), 1);

    const std::size_t nn = static_cast<std::size_t>(nodes_) + 1;
    parent_.assign(nn, -1);
    pred_.assign(nn, -1);
    thread_.assign(nn, 0);
    rev_thread_.assign(nn, 0);
    succ_num_.assign(nn, 1);
    last_succ_.assign(nn, 0);
    up_.assign(nn, 1);
    pi_.assign(nn, 0.0);

    for (double s : supply_) supply_scale_ += std::abs(s);

    const auto r = at(root_);
    thread_[r] = 0;
    rev_thread_[0] = root_;
    succ_num_[r] = nodes_ + 1;
    last_succ_[r] = root_ - 1;
    for (int u = 0; u < nodes_; ++u) {
      const auto uu = at(u);
      parent_[uu] = root_;
      pred_[uu] = u;
      thread_[uu] = u + 1;
      rev_thread_[at(u + 1)] = u;
      succ_num_[uu] = 1;
      last_succ_[uu] = u;
      const double s = supply_[uu];
      if (s >= 0.0) {
        up_[uu] = 1;
        pi_[uu] = 0.0;
        source_[uu] = u;
        target_[uu] = root_;
        flow_[uu] = s;
        cost_[uu] = 0.0;
      } else {
        up_[uu] = -1;
        pi_[uu] = art_cost_;
        source_[uu] = root_;
        target_[uu] = u;
        flow_[uu] = -s;
        cost_[uu] = art_cost_;
      }
    }
  }

  int real_arcs() const { return static_cast<int>(source_.size()) - nodes_; }

  void add_arc(const FlowArc& arc) {
    if (arc.source < 0 || arc.source >= nodes_ || arc.target < 0 || arc.target >= nodes_)
      throw std::invalid_argument("arc endpoint out of range");
    if (!(arc.cost >= 0.0) || !(arc.cost <= cost_bound_))
      throw std::invalid_argument("arc cost outside [0, cost bound]");
    source_.push_back(arc.source);
    target_.push_back(arc.target);
    cost_.push_back(arc.cost);
    flow_.push_back(0.0);
    in_tree_.push_back(0);
  }

  FlowSolution run() {
    const int all = static_cast<int>(source_.size());
    const int real = all - nodes_;
    block_size_ = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(all))));
    if (next_arc_ >= all) next_arc_ = 0;
    const long cap = options_.max_iterations > 0 ? options_.max_iterations
                                                 : 50L * (static_cast<long>(nodes_) + real) + 1000L;
    long iterations = 0;
    auto pivot = [&] {
      if (++iterations > cap)
        throw SolverError("network simplex hit the pivot cap of " + std::to_string(cap) +
                          " (nodes " + std::to_string(nodes_) + ", arcs " +
                          std::to_string(real) + ")");
      find_join_node();
      find_leaving_arc();
      change_flow();
      update_tree();
      update_potential();
    };
    if (!warm_) {
      // Warm-up: the cheapest arc out of every source and into every sink.
      std::vector<int> out_arc(at(nodes_), -1);
      std::vector<int> in_arc(at(nodes_), -1);
      for (int a = nodes_; a < all; ++a) {
        const auto s = at(source_[at(a)]);
        const auto t = at(target_[at(a)]);
        if (supply_[s] > 0.0 && (out_arc[s] < 0 || cost_[at(a)] < cost_[at(out_arc[s])])) out_arc[s] = a;
        if (supply_[t] < 0.0 && (in_arc[t] < 0 || cost_[at(a)] < cost_[at(in_arc[t])])) in_arc[t] = a;
      }
      for (const auto* list : {&out_arc, &in_arc})
        for (int e : *list) {
          if (e < 0 || in_tree_[at(e)] || !(reduced(e) < -eps_)) continue;
          in_arc_ = e;
          pivot();
        }
      warm_ = true;
    }
    while (find_entering_arc()) pivot();
    for (int u = 0; u < nodes_; ++u) {
      const double f = flow_[at(u)];
      if (f > 1e-9 * std::max(1.0, supply_scale_))
        throw SolverError("min-cost flow infeasible: node " + std::to_string(u) +
                          " keeps artificial flow " + std::to_string(f));
    }
    FlowSolution out;
    out.iterations = iterations;
    out.flow.assign(flow_.begin() + nodes_, flow_.end());
    double c = 0.0;
    for (int a = nodes_; a < all; ++a) c += flow_[at(a)] * cost_[at(a)];
    out.cost = c;
    out.potential.assign(pi_.begin(), pi_.begin() + nodes_);
    return out;
  }

 private:
  double reduced(int e) const {
    const auto ee = static_cast<std::size_t>(e);
    return cost_[ee] + pi_[static_cast<std::size_t>(source_[ee])] -
           pi_[static_cast<std::size_t>(target_[ee])];
  }

  bool find_entering_arc() {
    const int all = static_cast<int>(source_.size());
    double best = -eps_;
    int found = -1;
    int count = block_size_;
    int e = next_arc_;
    for (int scanned = 0; scanned < all; ++scanned) {
      if (!in_tree_[static_cast<std::size_t>(e)]) {
        const double c = reduced(e);
        if (c < best) {
          best = c;
          found = e;
        }
      }
      if (++e == all) e = 0;
      if (--count == 0) {
        if (found >= 0) break;
        count = block_size_;
      }
    }
    if (found < 0) return false;
    next_arc_ = e;
    in_arc_ = found;
    return true;
  }

  void find_join_node() {
    int u = source_[static_cast<std::size_t>(in_arc_)];
    int v = target_[static_cast<std::size_t>(in_arc_)];
    while (u != v) {
      if (succ_num_[static_cast<std::size_t>(u)] < succ_num_[static_cast<std::size_t>(v)])
        u = parent_[static_cast<std::size_t>(u)];
      else
        v = parent_[static_cast<std::size_t>(v)];
    }
    join_ = u;
  }

  void find_leaving_arc() {
    const int first = source_[static_cast<std::size_t>(in_arc_)];
    const int second = target_[static_cast<std::size_t>(in_arc_)];
    delta_ = kInf;
    int side = 0;
    for (int u = first; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const auto uu = static_cast<std::size_t>(u);
      const double d = up_[uu] == 1 ? flow_[static_cast<std::size_t>(pred_[uu])] : kInf;
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        side = 1;
      }
    }
    for (int u = second; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const auto uu = static_cast<std::size_t>(u);
      const double d = up_[uu] == -1 ? flow_[static_cast<std::size_t>(pred_[uu])] : kInf;
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        side = 2;
      }
    }
    if (side == 0 || delta_ == kInf)
      throw SolverError("unbounded pivot: negative-cost cycle of infinite capacity");
    if (side == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
  }

  void change_flow() {
    const int leaving = pred_[static_cast<std::size_t>(u_out_)];
    if (delta_ > 0.0) {
      const double val = delta_;
      flow_[static_cast<std::size_t>(in_arc_)] += val;
      for (int u = source_[static_cast<std::size_t>(in_arc_)]; u != join_;
           u = parent_[static_cast<std::size_t>(u)]) {
        const auto uu = static_cast<std::size_t>(u);
        flow_[static_cast<std::size_t>(pred_[uu])] -= up_[uu] * val;
      }
      for (int u = target_[static_cast<std::size_t>(in_arc_)]; u != join_;
           u = parent_[static_cast<std::size_t>(u)]) {
        const auto uu = static_cast<std::size_t>(u);
        flow_[static_cast<std::size_t>(pred_[uu])] += up_[uu] * val;
      }
    }
    in_tree_[static_cast<std::size_t>(in_arc_)] = 1;
    in_tree_[static_cast<std::size_t>(leaving)] = 0;
    flow_[static_cast<std::size_t>(leaving)] = 0.0;
  }

  std::size_t at(int u) const { return static_cast<std::size_t>(u); }

  void update_tree() {
    const int old_rev_thread = rev_thread_[at(u_out_)];
    const int old_succ_num = succ_num_[at(u_out_)];
    const int old_last_succ = last_succ_[at(u_out_)];
    v_out_ = parent_[at(u_out_)];

    if (u_in_ == u_out_) {
      parent_[at(u_in_)] = v_in_;
      pred_[at(u_in_)] = in_arc_;
      up_[at(u_in_)] = u_in_ == source_[at(in_arc_)] ? 1 : -1;
      if (thread_[at(v_in_)] != u_out_) {
        int after = thread_[at(old_last_succ)];
        thread_[at(old_rev_thread)] = after;
        rev_thread_[at(after)] = old_rev_thread;
        after = thread_[at(v_in_)];
        thread_[at(v_in_)] = u_out_;
        rev_thread_[at(u_out_)] = v_in_;
        thread_[at(old_last_succ)] = after;
        rev_thread_[at(after)] = old_last_succ;
      }
    } else {
      const int thread_continue =
          old_rev_thread == v_in_ ? thread_[at(old_last_succ)] : thread_[at(v_in_)];

      // Re-hang the stem u_in -> ... -> u_out under v_in, splicing thread segments as we go.
      int stem = u_in_;
      int par_stem = v_in_;
      int last = last_succ_[at(u_in_)];
      int after = thread_[at(last)];
      thread_[at(v_in_)] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        const int next_stem = parent_[at(stem)];
        thread_[at(last)] = next_stem;
        dirty_revs_.push_back(last);

        const int before = rev_thread_[at(stem)];
        thread_[at(before)] = after;
        rev_thread_[at(after)] = before;

        parent_[at(stem)] = par_stem;
        par_stem = stem;
        stem = next_stem;

        last = last_succ_[at(stem)] == last_succ_[at(par_stem)] ? rev_thread_[at(par_stem)]
                                                                : last_succ_[at(stem)];
        after = thread_[at(last)];
      }
      parent_[at(u_out_)] = par_stem;
      thread_[at(last)] = thread_continue;
      rev_thread_[at(thread_continue)] = last;
      last_succ_[at(u_out_)] = last;

      if (old_rev_thread != v_in_) {
        thread_[at(old_rev_thread)] = after;
        rev_thread_[at(after)] = old_rev_thread;
      }
      for (int u : dirty_revs_) rev_thread_[at(thread_[at(u)])] = u;

      int tmp_sc = 0;
      const int tmp_ls = last_succ_[at(u_out_)];
      for (int u = u_out_, p = parent_[at(u)]; u != u_in_; u = p, p = parent_[at(u)]) {
        pred_[at(u)] = pred_[at(p)];
        up_[at(u)] = static_cast<std::int8_t>(-up_[at(p)]);
        tmp_sc += succ_num_[at(u)] - succ_num_[at(p)];
        succ_num_[at(u)] = tmp_sc;
        last_succ_[at(p)] = tmp_ls;
      }
      pred_[at(u_in_)] = in_arc_;
      up_[at(u_in_)] = u_in_ == source_[at(in_arc_)] ? 1 : -1;
      succ_num_[at(u_in_)] = old_succ_num;
    }

    const int up_limit_out = last_succ_[at(join_)] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[at(u_out_)];
    for (int u = v_in_; u != -1 && last_succ_[at(u)] == v_in_; u = parent_[at(u)])
      last_succ_[at(u)] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[at(u)] == old_last_succ;
           u = parent_[at(u)])
        last_succ_[at(u)] = old_rev_thread;
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[at(u)] == old_last_succ;
           u = parent_[at(u)])
        last_succ_[at(u)] = last_succ_out;
    }

    for (int u = v_in_; u != join_; u = parent_[at(u)]) succ_num_[at(u)] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[at(u)]) succ_num_[at(u)] -= old_succ_num;
  }

  void update_potential() {
    const double c = cost_[at(in_arc_)];
    const double sigma = pi_[at(v_in_)] - pi_[at(u_in_)] - (up_[at(u_in_)] == 1 ? c : -c);
    const int end = thread_[at(last_succ_[at(u_in_)])];
    for (int u = u_in_; u != end; u = thread_[at(u)]) pi_[at(u)] += sigma;
  }

  int nodes_;
  int root_;
  std::vector<double> supply_;
  NetworkSimplexOptions options_;
  double cost_bound_ = 0.0;
  double art_cost_ = 0.0;
  double eps_ = 0.0;
  double supply_scale_ = 0.0;
  int block_size_ = 10;
  int next_arc_ = 0;
  bool warm_ = false;

  std::vector<int> source_;
  std::vector<int> target_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<std::int8_t> in_tree_;

  std::vector<int> parent_;
  std::vector<int> pred_;
  std::vector<int> thread_;
  std::vector<int> rev_thread_;
  std::vector<int> succ_num_;
  std::vector<int> last_succ_;
  std::vector<std::int8_t> up_;  // +1: pred arc points from the node to its parent
  std::vector<double> pi_;
  std::vector<int> dirty_revs_;

  int in_arc_ = -1;
  int join_ = -1;
  int u_in_ = -1;
  int v_in_ = -1;
  int u_out_ = -1;
  int v_out_ = -1;
  double delta_ = 0.0;
};

}  // namespace

struct NetworkSimplex::Impl {
  Simplex simplex;
};

NetworkSimplex::NetworkSimplex(int node_count, std::vector<double> supply, double cost_bound,
                               const NetworkSimplexOptions& options) {
  if (node_count <= 0 || supply.size() != static_cast<std::size_t>(node_count))
    throw std::invalid_argument("supply vector must have one entry per node");
  for (double s : supply)
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite supply");
  impl_ = std::make_unique<Impl>(Impl{Simplex(node_count, std::move(supply), cost_bound, options)});
}

NetworkSimplex::~NetworkSimplex() = default;
NetworkSimplex::NetworkSimplex(NetworkSimplex&&) noexcept = default;
NetworkSimplex& NetworkSimplex::operator=(NetworkSimplex&&) noexcept = default;

void NetworkSimplex::add_arc(const FlowArc& arc) { impl_->simplex.add_arc(arc); }

int NetworkSimplex::arc_count() const { return impl_->simplex.real_arcs(); }

FlowSolution NetworkSimplex::solve() { return impl_->simplex.run(); }

FlowSolution solve_min_cost_flow(int node_count, const std::vector<double>& supply,
                                 const std::vector<FlowArc>& arcs,
                                 const NetworkSimplexOptions& options) {
  if (node_count < 0 || supply.size() != static_cast<std::size_t>(node_count))
    throw std::invalid_argument("supply vector must have one entry per node");
  if (node_count == 0) return FlowSolution{0.0, std::vector<double>(arcs.size(), 0.0), {}, 0};
  double bound = 0.0;
  for (const auto& a : arcs) {
    if (!(a.cost >= 0.0) || !std::isfinite(a.cost))
      throw std::invalid_argument("arc costs must be finite and nonnegative");
    bound = std::max(bound, a.cost);
  }
  NetworkSimplex simplex(node_count, supply, bound, options);
  for (const auto& a : arcs) simplex.add_arc(a);
  return simplex.solve();
}

}  // namespace jonesq
