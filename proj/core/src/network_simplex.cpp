// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace pwifs::detail {
namespace {

class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand,
                 std::span<const double> cost)
      : rows_(supply.size()),
        cols_(demand.size()),
        real_arcs_(rows_ * cols_),
        root_(rows_ + cols_),
        cost_(cost) {
    double max_cost = 0.0;
    for (double c : cost_) max_cost = std::max(max_cost, std::abs(c));
    artificial_cost_ = (max_cost + 1.0) * static_cast<double>(root_ + 1);
    epsilon_ = 1e-14 * artificial_cost_;

    const std::size_t nodes = root_ + 1;
    parent_.assign(nodes, kNone);
    pred_arc_.assign(nodes, kNone);
    up_.assign(nodes, 0);
    flow_.assign(nodes, 0.0);
    depth_.assign(nodes, 0);
    potential_.assign(nodes, 0.0);
    child_pos_.assign(nodes, 0);
    children_.assign(nodes, {});

    // Star tree: supplies send along i -> root, demands receive root -> j.
    for (std::size_t i = 0; i < rows_; ++i) {
      attach(i, root_, real_arcs_ + i, /*up=*/true);
      flow_[i] = supply[i];
      potential_[i] = -artificial_cost_;
      depth_[i] = 1;
    }
    for (std::size_t j = 0; j < cols_; ++j) {
      const std::size_t v = rows_ + j;
      attach(v, root_, real_arcs_ + rows_ + j, /*up=*/false);
      flow_[v] = demand[j];
      potential_[v] = artificial_cost_;
      depth_[v] = 1;
    }
    block_size_ = std::max<std::size_t>(
        16, static_cast<std::size_t>(std::sqrt(static_cast<double>(real_arcs_))));
  }

  std::size_t run() {
    std::size_t pivots = 0;
    for (;;) {
      const std::size_t entering = find_entering();
      if (entering == kNone) break;
      pivot(entering);
      ++pivots;
    }
    return pivots;
  }

  TransportSolution solution() const {
    TransportSolution out;
    out.row_potential.resize(rows_);
    out.col_potential.resize(cols_);
    // u_i = -pi_i, v_j = pi_j makes u_i + v_j = c_ij on tree arcs.
    const double shift = rows_ > 0 ? -potential_[0] : 0.0;
    for (std::size_t i = 0; i < rows_; ++i) out.row_potential[i] = -potential_[i] - shift;
    for (std::size_t j = 0; j < cols_; ++j) out.col_potential[j] = potential_[rows_ + j] + shift;
    for (std::size_t v = 0; v < root_; ++v) {
      const std::size_t arc = pred_arc_[v];
      if (arc >= real_arcs_ || flow_[v] <= 0.0) continue;
      const std::size_t i = arc / cols_, j = arc % cols_;
      out.flows.push_back({i, j, flow_[v]});
      out.objective += flow_[v] * cost_[arc];
    }
    std::sort(out.flows.begin(), out.flows.end(), [](const auto& x, const auto& y) {
      return x.row != y.row ? x.row < y.row : x.col < y.col;
    });
    return out;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t arc_source(std::size_t arc) const {
    if (arc < real_arcs_) return arc / cols_;
    if (arc < real_arcs_ + rows_) return arc - real_arcs_;
    return root_;
  }

  double arc_cost(std::size_t arc) const {
    return arc < real_arcs_ ? cost_[arc] : artificial_cost_;
  }

  void attach(std::size_t child, std::size_t parent, std::size_t arc, bool up) {
    parent_[child] = parent;
    pred_arc_[child] = arc;
    up_[child] = up ? 1 : 0;
    child_pos_[child] = children_[parent].size();
    children_[parent].push_back(child);
  }

  void detach(std::size_t child) {
    auto& siblings = children_[parent_[child]];
    const std::size_t pos = child_pos_[child];
    const std::size_t last = siblings.back();
    siblings[pos] = last;
    child_pos_[last] = pos;
    siblings.pop_back();
    parent_[child] = kNone;
  }

  double reduced_cost(std::size_t arc) const {
    const std::size_t i = arc / cols_, j = arc % cols_;
    return cost_[arc] + potential_[i] - potential_[rows_ + j];
  }

  // Block search pricing over the real arcs.
  std::size_t find_entering() {
    if (real_arcs_ == 0) return kNone;
    std::size_t best = kNone;
    double best_rc = -epsilon_;
    std::size_t scanned_in_block = 0;
    for (std::size_t scanned = 0; scanned < real_arcs_; ++scanned) {
      const std::size_t arc = next_arc_;
      if (++next_arc_ == real_arcs_) next_arc_ = 0;
      const double rc = reduced_cost(arc);
      if (rc < best_rc) {
        best_rc = rc;
        best = arc;
      }
      if (++scanned_in_block == block_size_) {
        if (best != kNone) return best;
        scanned_in_block = 0;
      }
    }
    return best;
  }

  void pivot(std::size_t entering) {
    const std::size_t s = entering / cols_;
    const std::size_t t = rows_ + entering % cols_;

    // Paths from each endpoint up to the apex.
    down_path_.clear();  // s, parent(s), ... (traversed apex -> s)
    up_path_.clear();    // t, parent(t), ... (traversed t -> apex)
    std::size_t a = s, b = t;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        down_path_.push_back(a);
        a = parent_[a];
      } else {
        up_path_.push_back(b);
        b = parent_[b];
      }
    }

    // Arcs whose flow decreases when pushing along s -> t.
    // Apex -> s segment: node v is traversed parent -> v, so an up arc shrinks.
    // t -> apex segment: traversed v -> parent, so a down arc shrinks.
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t v : down_path_)
      if (up_[v]) theta = std::min(theta, flow_[v]);
    for (std::size_t v : up_path_)
      if (!up_[v]) theta = std::min(theta, flow_[v]);

    // Last blocking arc in cycle order apex -> s -> t -> apex.
    std::size_t leaving_node = kNone;
    bool leaving_on_up_path = false;
    for (auto it = up_path_.rbegin(); it != up_path_.rend(); ++it) {
      if (!up_[*it] && flow_[*it] <= theta) {
        leaving_node = *it;
        leaving_on_up_path = true;
        break;
      }
    }
    if (leaving_node == kNone) {
      for (std::size_t v : down_path_) {
        if (up_[v] && flow_[v] <= theta) {
          leaving_node = v;
          break;
        }
      }
    }

    if (theta > 0.0) {
      for (std::size_t v : down_path_) flow_[v] += up_[v] ? -theta : theta;
      for (std::size_t v : up_path_) flow_[v] += up_[v] ? theta : -theta;
    }

    // Re-hang the subtree cut off by the leaving arc through the entering arc.
    const std::size_t u_in = leaving_on_up_path ? t : s;
    const std::size_t u_out = leaving_on_up_path ? s : t;

    reversal_.clear();
    for (std::size_t v = u_in;; v = parent_[v]) {
      reversal_.push_back(v);
      if (v == leaving_node) break;
    }
    for (std::size_t v : reversal_) detach(v);
    for (std::size_t k = reversal_.size(); k-- > 1;) {
      const std::size_t child = reversal_[k];
      const std::size_t new_parent = reversal_[k - 1];
      const std::size_t arc = pred_arc_[new_parent];
      const bool up = !up_[new_parent];
      const double f = flow_[new_parent];
      attach(child, new_parent, arc, up);
      flow_[child] = f;
    }
    attach(u_in, u_out, entering, /*up=*/arc_source(entering) == u_in);
    flow_[u_in] = theta;

    refresh_subtree(u_in);
  }

  void refresh_subtree(std::size_t top) {
    stack_.clear();
    stack_.push_back(top);
    while (!stack_.empty()) {
      const std::size_t v = stack_.back();
      stack_.pop_back();
      const std::size_t p = parent_[v];
      const double c = arc_cost(pred_arc_[v]);
      potential_[v] = up_[v] ? potential_[p] - c : potential_[p] + c;
      depth_[v] = depth_[p] + 1;
      for (std::size_t w : children_[v]) stack_.push_back(w);
    }
  }

  std::size_t rows_, cols_, real_arcs_, root_;
  std::span<const double> cost_;
  double artificial_cost_ = 0.0;
  double epsilon_ = 0.0;
  std::size_t block_size_ = 16;
  std::size_t next_arc_ = 0;

  std::vector<std::size_t> parent_, pred_arc_, depth_, child_pos_;
  std::vector<std::uint8_t> up_;  // 1 when the tree arc points child -> parent
  std::vector<double> flow_;      // flow on the arc to the parent
  std::vector<double> potential_;
  std::vector<std::vector<std::size_t>> children_;

  std::vector<std::size_t> down_path_, up_path_, reversal_, stack_;
};

}  // namespace

TransportSolution solve_transport(std::span<const double> supply,
                                  std::span<const double> demand,
                                  std::span<const double> cost) {
  NetworkSimplex simplex(supply, demand, cost);
  const std::size_t pivots = simplex.run();
  TransportSolution out = simplex.solution();
  out.pivots = pivots;
  return out;
}

}  // namespace pwifs::detail
