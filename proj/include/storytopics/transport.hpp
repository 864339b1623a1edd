#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "storytopics/errors.hpp"

namespace storytopics {

template <typename Scalar>
struct TransportSolution {
  Scalar cost = 0;
  /// m×n optimal flow.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> flow;
  int pivots = 0;
};

/// Exact balanced transportation problem
///   min sum_ij flow_ij * cost_ij  s.t. flow >= 0, rows sum to supply, columns to demand
/// by network simplex on the complete bipartite graph. The basis is a spanning
/// tree of m+n-1 cells started from the north-west corner rule; the entering
/// cell is the most negative reduced cost, switching to Bland's rule after a
/// run of degenerate pivots so the method cannot cycle.
template <typename Scalar, typename CostDerived>
TransportSolution<Scalar> solve_transport(std::span<const Scalar> supply, std::span<const Scalar> demand,
                                          const Eigen::MatrixBase<CostDerived>& cost) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const auto m = static_cast<Eigen::Index>(supply.size());
  const auto n = static_cast<Eigen::Index>(demand.size());
  if (m == 0 || n == 0) throw EmptyDocument("transport problem with an empty side");
  if (cost.rows() != m || cost.cols() != n) throw ShapeMismatch("cost matrix does not match marginals");

  TransportSolution<Scalar> sol;
  sol.flow = Matrix::Zero(m, n);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> basic =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, n, false);

  // North-west corner: exactly m+n-1 basic cells forming a spanning tree.
  {
    std::vector<Scalar> a(supply.begin(), supply.end());
    std::vector<Scalar> b(demand.begin(), demand.end());
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    while (true) {
      const Scalar x = std::max<Scalar>(0, std::min(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]));
      sol.flow(i, j) = x;
      basic(i, j) = true;
      a[static_cast<std::size_t>(i)] -= x;
      b[static_cast<std::size_t>(j)] -= x;
      if (i == m - 1 && j == n - 1) break;
      const bool row_done = a[static_cast<std::size_t>(i)] <= b[static_cast<std::size_t>(j)];
      if ((row_done && i < m - 1) || j == n - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const Scalar scale = std::max<Scalar>(Scalar(1), cost.cwiseAbs().maxCoeff());
  const Scalar eps = Scalar(1e-12) * scale;
  const Eigen::Index nodes = m + n;  // rows are 0..m-1, columns m..m+n-1
  std::vector<Scalar> potential(static_cast<std::size_t>(nodes));
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(nodes));
  std::vector<Eigen::Index> order;
  order.reserve(static_cast<std::size_t>(nodes));
  int degenerate_run = 0;
  const int max_pivots = 1000 + static_cast<int>(50 * m * n);

  while (true) {
    // Potentials u_i + v_j = c_ij on basic cells, rooted at row 0, with BFS
    // parents kept for cycle tracing.
    std::fill(parent.begin(), parent.end(), Eigen::Index{-2});
    parent[0] = -1;
    potential[0] = 0;
    order.assign(1, 0);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const Eigen::Index u = order[head];
      if (u < m) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (basic(u, j) && parent[static_cast<std::size_t>(m + j)] == -2) {
            parent[static_cast<std::size_t>(m + j)] = u;
            potential[static_cast<std::size_t>(m + j)] = cost(u, j) - potential[static_cast<std::size_t>(u)];
            order.push_back(m + j);
          }
        }
      } else {
        const Eigen::Index j = u - m;
        for (Eigen::Index i = 0; i < m; ++i) {
          if (basic(i, j) && parent[static_cast<std::size_t>(i)] == -2) {
            parent[static_cast<std::size_t>(i)] = u;
            potential[static_cast<std::size_t>(i)] = cost(i, j) - potential[static_cast<std::size_t>(u)];
            order.push_back(i);
          }
        }
      }
    }

    Eigen::Index enter_i = -1;
    Eigen::Index enter_j = -1;
    Scalar best = -eps;
    const bool bland = degenerate_run > static_cast<int>(m + n);
    for (Eigen::Index i = 0; i < m && !(bland && enter_i >= 0); ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (basic(i, j)) continue;
        const Scalar reduced =
            cost(i, j) - potential[static_cast<std::size_t>(i)] - potential[static_cast<std::size_t>(m + j)];
        if (reduced < best) {
          best = reduced;
          enter_i = i;
          enter_j = j;
          if (bland) break;
        }
      }
    }
    if (enter_i < 0) break;
    if (++sol.pivots > max_pivots) throw NonFiniteInput("transport simplex failed to converge");

    // Tree path between row enter_i and column enter_j via their ancestors.
    auto depth_of = [&](Eigen::Index v) {
      int d = 0;
      while (parent[static_cast<std::size_t>(v)] >= 0) {
        v = parent[static_cast<std::size_t>(v)];
        ++d;
      }
      return d;
    };
    std::vector<Eigen::Index> from_row{enter_i};
    std::vector<Eigen::Index> from_col{m + enter_j};
    int dr = depth_of(enter_i);
    int dc = depth_of(m + enter_j);
    while (dr > dc) {
      from_row.push_back(parent[static_cast<std::size_t>(from_row.back())]);
      --dr;
    }
    while (dc > dr) {
      from_col.push_back(parent[static_cast<std::size_t>(from_col.back())]);
      --dc;
    }
    while (from_row.back() != from_col.back()) {
      from_row.push_back(parent[static_cast<std::size_t>(from_row.back())]);
      from_col.push_back(parent[static_cast<std::size_t>(from_col.back())]);
    }
    // Node sequence row enter_i -> ... -> column enter_j.
    std::vector<Eigen::Index> path = from_row;
    for (auto it = from_col.rbegin() + 1; it != from_col.rend(); ++it) path.push_back(*it);

    // Edges along the path alternate -, +, -, ... starting at enter_i.
    struct Cell {
      Eigen::Index i;
      Eigen::Index j;
    };
    auto cell_of = [&](Eigen::Index a, Eigen::Index b) {
      return a < m ? Cell{a, b - m} : Cell{b, a - m};
    };
    Scalar theta = std::numeric_limits<Scalar>::infinity();
    Cell leave{-1, -1};
    for (std::size_t e = 0; e + 1 < path.size(); e += 2) {
      const Cell c = cell_of(path[e], path[e + 1]);
      const Scalar f = sol.flow(c.i, c.j);
      if (f < theta || (f == theta && (c.i < leave.i || (c.i == leave.i && c.j < leave.j)))) {
        theta = f;
        leave = c;
      }
    }
    theta = std::max<Scalar>(0, theta);
    degenerate_run = theta > 0 ? 0 : degenerate_run + 1;
    for (std::size_t e = 0; e + 1 < path.size(); ++e) {
      const Cell c = cell_of(path[e], path[e + 1]);
      if (e % 2 == 0) {
        sol.flow(c.i, c.j) = std::max<Scalar>(0, sol.flow(c.i, c.j) - theta);
      } else {
        sol.flow(c.i, c.j) += theta;
      }
    }
    sol.flow(enter_i, enter_j) = theta;
    basic(enter_i, enter_j) = true;
    basic(leave.i, leave.j) = false;
    sol.flow(leave.i, leave.j) = 0;
  }

  sol.cost = (sol.flow.array() * cost.array()).sum();
  return sol;
}

}  // namespace storytopics
