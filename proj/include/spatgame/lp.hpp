#pragma once

// Exact small-scale linear programming:
//  * a dictionary-form primal simplex for  max c^T z  s.t.  A z <= b, z >= 0, b >= 0
//  * a successive-shortest-path solver for the balanced transportation problem
//    with real-valued supplies/demands, plus a dual certificate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spatgame/errors.hpp"

namespace spatgame::lp {

/// Row-major dense matrix with value semantics.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct SimplexResult {
    double value = 0.0;
    std::vector<double> solution; // primal z, length n
    std::size_t pivots = 0;
};

/// Solves  max c^T z  s.t.  A z <= b,  z >= 0  with b >= 0 (the origin is
/// feasible, so no phase one is needed). Bland's rule prevents cycling.
///
/// The dictionary is kept in compact form (m x (n+1)); slack columns are
/// never materialized, so memory is O(m n).
inline SimplexResult solve_simplex(const Matrix& A, std::span<const double> b,
                                   std::span<const double> c) {
    const std::size_t m = A.rows();
    const std::size_t n = A.cols();
    if (b.size() != m || c.size() != n) {
        throw SolverFailure("solve_simplex: dimension mismatch");
    }
    for (double bi : b) {
        if (!(bi >= 0.0)) throw SolverFailure("solve_simplex: right-hand side must be nonnegative");
    }
    constexpr double eps = 1e-12;

    // dict(r, j): coefficient of nonbasic j in row r, basic_r = rhs_r - sum_j dict(r,j) x_j
    Matrix dict = A;
    std::vector<double> rhs(b.begin(), b.end());
    std::vector<double> obj(c.begin(), c.end()); // z = z0 + sum_j obj_j x_j
    double z0 = 0.0;
    // labels: 0..n-1 structural, n..n+m-1 slack
    std::vector<std::size_t> nonbasic(n), basic(m);
    for (std::size_t j = 0; j < n; ++j) nonbasic[j] = j;
    for (std::size_t r = 0; r < m; ++r) basic[r] = n + r;

    SimplexResult out;
    const std::size_t max_pivots = 50 * (m + n) + 1000;
    for (;;) {
        std::size_t enter = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (obj[j] > eps && (enter == n || nonbasic[j] < nonbasic[enter])) enter = j;
        }
        if (enter == n) break;

        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < m; ++r) {
            const double a = dict(r, enter);
            if (a > eps) best = std::min(best, rhs[r] / a);
        }
        if (!std::isfinite(best)) throw SolverFailure("solve_simplex: objective is unbounded");
        std::size_t leave = m;
        for (std::size_t r = 0; r < m; ++r) {
            const double a = dict(r, enter);
            if (a > eps && rhs[r] / a <= best + eps * (1.0 + best) &&
                (leave == m || basic[r] < basic[leave])) {
                leave = r;
            }
        }

        // pivot on (leave, enter)
        const double piv = dict(leave, enter);
        auto prow = dict.row(leave);
        for (std::size_t j = 0; j < n; ++j) prow[j] /= piv;
        prow[enter] = 1.0 / piv;
        rhs[leave] /= piv;
        if (rhs[leave] < 0.0) rhs[leave] = 0.0;

        for (std::size_t r = 0; r < m; ++r) {
            if (r == leave) continue;
            const double f = dict(r, enter);
            if (f == 0.0) continue;
            auto row = dict.row(r);
            for (std::size_t j = 0; j < n; ++j) row[j] -= f * prow[j];
            row[enter] = -f * prow[enter];
            rhs[r] -= f * rhs[leave];
            if (rhs[r] < 0.0 && rhs[r] > -1e-11) rhs[r] = 0.0;
        }
        const double fo = obj[enter];
        for (std::size_t j = 0; j < n; ++j) obj[j] -= fo * prow[j];
        obj[enter] = -fo * prow[enter];
        z0 += fo * rhs[leave];

        std::swap(basic[leave], nonbasic[enter]);
        if (++out.pivots > max_pivots) throw SolverFailure("solve_simplex: pivot limit reached");
    }

    out.value = z0;
    out.solution.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        if (basic[r] < n) out.solution[basic[r]] = rhs[r];
    }
    return out;
}

struct TransportResult {
    double cost = 0.0;
    Matrix plan; // supply x demand
};

/// Balanced transportation problem  min <C, P>  with row sums = supply and
/// column sums = demand, solved by successive shortest paths with Johnson
/// potentials. Costs must be nonnegative; supplies and demands must have
/// equal totals (up to 1e-9).
inline TransportResult solve_transport(std::span<const double> supply,
                                       std::span<const double> demand, const Matrix& cost) {
    const std::size_t n = supply.size();
    const std::size_t m = demand.size();
    if (cost.rows() != n || cost.cols() != m) throw SolverFailure("solve_transport: cost shape mismatch");
    double total_s = 0.0, total_d = 0.0;
    for (double s : supply) {
        if (!(s >= 0.0)) throw SolverFailure("solve_transport: negative supply");
        total_s += s;
    }
    for (double d : demand) {
        if (!(d >= 0.0)) throw SolverFailure("solve_transport: negative demand");
        total_d += d;
    }
    if (std::abs(total_s - total_d) > 1e-9) throw SolverFailure("solve_transport: unbalanced masses");
    for (double c : cost.data()) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw SolverFailure("solve_transport: costs must be finite and nonnegative");
    }

    constexpr double mass_eps = 1e-14;
    constexpr double inf = std::numeric_limits<double>::infinity();

    TransportResult out;
    out.plan = Matrix(n, m, 0.0);
    std::vector<double> left(supply.begin(), supply.end());
    std::vector<double> need(demand.begin(), demand.end());

    // node layout: 0..n-1 sources, n..n+m-1 sinks, n+m super source, n+m+1 super sink
    const std::size_t S = n + m, T = n + m + 1, V = n + m + 2;
    std::vector<double> pot(V, 0.0), dist(V);
    std::vector<std::size_t> parent(V);
    std::vector<char> done(V);

    const std::size_t max_aug = 20 * (n + 1) * (m + 1) + 100;
    for (std::size_t iter = 0;; ++iter) {
        if (iter > max_aug) throw SolverFailure("solve_transport: augmentation limit reached");

        std::fill(dist.begin(), dist.end(), inf);
        std::fill(done.begin(), done.end(), 0);
        dist[S] = 0.0;
        parent[S] = S;
        auto relax = [&](std::size_t u, std::size_t v, double c) {
            const double rc = std::max(0.0, c + pot[u] - pot[v]);
            if (dist[u] + rc < dist[v]) {
                dist[v] = dist[u] + rc;
                parent[v] = u;
            }
        };
        for (;;) {
            std::size_t u = V;
            for (std::size_t v = 0; v < V; ++v) {
                if (!done[v] && dist[v] < inf && (u == V || dist[v] < dist[u])) u = v;
            }
            if (u == V) break;
            done[u] = 1;
            if (u == S) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (left[i] > mass_eps) relax(S, i, 0.0);
                }
            } else if (u < n) {
                for (std::size_t j = 0; j < m; ++j) relax(u, n + j, cost(u, j));
                if (supply[u] - left[u] > mass_eps) relax(u, S, 0.0);
            } else if (u < n + m) {
                const std::size_t j = u - n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (out.plan(i, j) > mass_eps) relax(u, i, -cost(i, j));
                }
                if (need[j] > mass_eps) relax(u, T, 0.0);
            } else if (u == T) {
                for (std::size_t j = 0; j < m; ++j) {
                    if (demand[j] - need[j] > mass_eps) relax(T, n + j, 0.0);
                }
            }
        }
        if (!(dist[T] < inf)) break;

        for (std::size_t v = 0; v < V; ++v) pot[v] += std::min(dist[v], dist[T]);

        // bottleneck along S -> i -> ... -> j -> T
        double amount = inf;
        for (std::size_t v = T; v != S; v = parent[v]) {
            const std::size_t u = parent[v];
            if (u == S) amount = std::min(amount, left[v]);
            else if (v == T) amount = std::min(amount, need[u - n]);
            else if (u >= n && v < n) amount = std::min(amount, out.plan(v, u - n));
        }
        if (!(amount > mass_eps)) break;
        for (std::size_t v = T; v != S; v = parent[v]) {
            const std::size_t u = parent[v];
            if (u == S) left[v] -= amount;
            else if (v == T) need[u - n] -= amount;
            else if (u < n) out.plan(u, v - n) += amount;
            else out.plan(v, u - n) -= amount;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (out.plan(i, j) < 0.0) out.plan(i, j) = 0.0;
            out.cost += out.plan(i, j) * cost(i, j);
        }
    }
    return out;
}

struct TransportDual {
    std::vector<double> u; // per supply atom
    std::vector<double> v; // per demand atom
    double value = 0.0;    // sum supply*u + sum demand*v
    double max_violation = 0.0; // max over (i,j) of u_i + v_j - C_ij, clipped at 0
};

/// Dual potentials for a transport plan, obtained as shortest-path distances in
/// the residual graph (Bellman-Ford). For an optimal plan the residual graph has
/// no negative cycle, and the returned potentials satisfy complementary
/// slackness, so value equals the primal cost up to roundoff.
inline TransportDual transport_dual(std::span<const double> supply, std::span<const double> demand,
                                    const Matrix& cost, const Matrix& plan) {
    const std::size_t n = supply.size();
    const std::size_t m = demand.size();
    const std::size_t V = n + m;
    std::vector<double> d(V, 0.0); // virtual root with 0-edges to all nodes
    constexpr double flow_eps = 1e-15;
    for (std::size_t pass = 0; pass <= V; ++pass) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (d[i] + cost(i, j) < d[n + j] - 1e-15) {
                    d[n + j] = d[i] + cost(i, j);
                    changed = true;
                }
                if (plan(i, j) > flow_eps && d[n + j] - cost(i, j) < d[i] - 1e-15) {
                    d[i] = d[n + j] - cost(i, j);
                    changed = true;
                }
            }
        }
        if (!changed) break;
        if (pass == V) throw SolverFailure("transport_dual: negative residual cycle (plan not optimal)");
    }
    TransportDual out;
    out.u.resize(n);
    out.v.resize(m);
    // C_ij + d_i - d_j >= 0  =>  u_i = -d_i, v_j = d_j gives u_i + v_j <= C_ij
    for (std::size_t i = 0; i < n; ++i) out.u[i] = -d[i];
    for (std::size_t j = 0; j < m; ++j) out.v[j] = d[n + j];
    for (std::size_t i = 0; i < n; ++i) out.value += supply[i] * out.u[i];
    for (std::size_t j = 0; j < m; ++j) out.value += demand[j] * out.v[j];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            out.max_violation = std::max(out.max_violation, out.u[i] + out.v[j] - cost(i, j));
        }
    }
    return out;
}

} // namespace spatgame::lp
