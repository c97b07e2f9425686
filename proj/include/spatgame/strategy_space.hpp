#pragma once

// Finite metric strategy spaces, measures on them, and the TV / BL / W1
// distances between those measures.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "spatgame/errors.hpp"
#include "spatgame/lp.hpp"

namespace spatgame {

/// Finite metric space of pure strategies.
class StrategySpace {
public:
    static constexpr double metric_tolerance = 1e-12;

    StrategySpace(std::vector<std::string> labels, lp::Matrix dist)
        : labels_(std::move(labels)), dist_(std::move(dist)) {
        const std::size_t k = labels_.size();
        if (k == 0) throw ConfigError("strategy space needs at least one strategy");
        if (dist_.rows() != k || dist_.cols() != k) {
            throw ConfigError("distance matrix must be " + std::to_string(k) + "x" + std::to_string(k));
        }
        for (std::size_t i = 0; i < k; ++i) {
            if (dist_(i, i) != 0.0) throw ConfigError("distance matrix must have a zero diagonal");
            for (std::size_t j = 0; j < k; ++j) {
                const double d = dist_(i, j);
                if (!std::isfinite(d) || d < 0.0) throw ConfigError("distances must be finite and nonnegative");
                if (std::abs(d - dist_(j, i)) > metric_tolerance) throw ConfigError("distance matrix must be symmetric");
            }
        }
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                for (std::size_t l = 0; l < k; ++l) {
                    if (dist_(i, l) > dist_(i, j) + dist_(j, l) + metric_tolerance) {
                        throw ConfigError("distance matrix violates the triangle inequality at (" + labels_[i] +
                                          ", " + labels_[j] + ", " + labels_[l] + ")");
                    }
                }
            }
        }
        diam_ = 0.0;
        radius_ = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < k; ++i) {
            double ecc = 0.0;
            for (std::size_t j = 0; j < k; ++j) ecc = std::max(ecc, dist_(i, j));
            diam_ = std::max(diam_, ecc);
            radius_ = std::min(radius_, ecc);
        }
    }

    /// Euclidean distances between points in R^m.
    static StrategySpace from_points(std::vector<std::string> labels,
                                     const std::vector<std::vector<double>>& points) {
        const std::size_t k = points.size();
        if (labels.size() != k) throw ConfigError("need one label per point");
        lp::Matrix dist(k, k);
        for (std::size_t i = 0; i < k; ++i) {
            if (points[i].size() != points[0].size()) throw ConfigError("points must share a dimension");
            for (std::size_t j = 0; j < k; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < points[i].size(); ++c) {
                    const double diff = points[i][c] - points[j][c];
                    s += diff * diff;
                }
                dist(i, j) = std::sqrt(s);
            }
        }
        return StrategySpace(std::move(labels), std::move(dist));
    }

    /// Discrete metric: distance 1 between distinct strategies.
    static StrategySpace discrete(std::vector<std::string> labels) {
        const std::size_t k = labels.size();
        lp::Matrix dist(k, k, 1.0);
        for (std::size_t i = 0; i < k; ++i) dist(i, i) = 0.0;
        return StrategySpace(std::move(labels), std::move(dist));
    }

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const lp::Matrix& dist() const noexcept { return dist_; }
    double dist(std::size_t i, std::size_t j) const { return dist_(i, j); }
    double diam() const noexcept { return diam_; }
    /// D_U = min over centres of the maximal distance from that centre.
    double radius() const noexcept { return radius_; }

    bool operator==(const StrategySpace&) const = default;

private:
    std::vector<std::string> labels_;
    lp::Matrix dist_;
    double diam_ = 0.0;
    double radius_ = 0.0;
};

/// Signed measure on a finite strategy space (element of M(U)).
class SignedMeasure {
public:
    SignedMeasure() = default;
    explicit SignedMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
        for (double w : weights_) {
            if (!std::isfinite(w)) throw ConfigError("signed measure weights must be finite");
        }
    }

    std::size_t size() const noexcept { return weights_.size(); }
    std::span<const double> weights() const noexcept { return weights_; }
    double operator[](std::size_t i) const { return weights_[i]; }
    double total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

    bool operator==(const SignedMeasure&) const = default;

private:
    std::vector<double> weights_;
};

/// Probability vector over a finite strategy space.
class MixedStrategy {
public:
    static constexpr double clamp_tolerance = 1e-12;
    static constexpr double sum_tolerance = 1e-9;

    MixedStrategy() = default;

    /// Validating constructor: entries must be >= 0 and sum to 1 within 1e-9.
    explicit MixedStrategy(std::vector<double> weights) : weights_(std::move(weights)) {
        if (weights_.empty()) throw ConfigError("mixed strategy must be nonempty");
        double total = 0.0;
        for (double w : weights_) {
            if (!std::isfinite(w) || w < 0.0) throw SimplexViolation("mixed strategy has a negative or non-finite weight");
            total += w;
        }
        if (std::abs(total - 1.0) > sum_tolerance) {
            throw SimplexViolation("mixed strategy weights sum to " + std::to_string(total));
        }
    }

    /// Absorbs roundoff after a numerical step: entries in [-1e-12, 0) are
    /// clamped to zero and the vector renormalized; anything more negative is
    /// a SimplexViolation. `clamped` is incremented per clamped entry.
    static MixedStrategy from_step(std::vector<double> weights, std::size_t* clamped = nullptr) {
        bool any = false;
        for (double& w : weights) {
            if (!std::isfinite(w)) throw SimplexViolation("non-finite strategy weight after step");
            if (w < 0.0) {
                if (w < -clamp_tolerance) {
                    throw SimplexViolation("strategy weight " + std::to_string(w) +
                                           " below -1e-12 (step larger than theta_max?)");
                }
                w = 0.0;
                any = true;
                if (clamped) ++*clamped;
            }
        }
        if (any) {
            const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
            for (double& w : weights) w /= total;
        }
        return MixedStrategy(std::move(weights));
    }

    static MixedStrategy dirac(std::size_t k, std::size_t at) {
        std::vector<double> w(k, 0.0);
        w.at(at) = 1.0;
        return MixedStrategy(std::move(w));
    }

    static MixedStrategy uniform(std::size_t k) {
        return MixedStrategy(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    }

    std::size_t size() const noexcept { return weights_.size(); }
    std::span<const double> weights() const noexcept { return weights_; }
    double operator[](std::size_t i) const { return weights_[i]; }

    bool operator==(const MixedStrategy&) const = default;

private:
    std::vector<double> weights_;
};

inline SignedMeasure operator-(const MixedStrategy& a, const MixedStrategy& b) {
    if (a.size() != b.size()) throw ConfigError("strategy dimension mismatch");
    std::vector<double> w(a.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = a[i] - b[i];
    return SignedMeasure(std::move(w));
}

inline double tv_norm(const SignedMeasure& nu) {
    double s = 0.0;
    for (double w : nu.weights()) s += std::abs(w);
    return s;
}

/// Dual norm of nu against test functions with sup|phi| + Lip(phi) <= 1.
///
/// Solved as an exact LP in (psi, s) with phi = psi - s:
///   max  <nu, psi> - s * nu(U)
///   s.t. psi_i - 2 s <= 0,  psi_i - psi_j + d_ij s <= d_ij,  s <= 1,  psi, s >= 0
/// where s bounds sup|phi| and 1 - s bounds Lip(phi).
inline double bl_norm(const SignedMeasure& nu, const StrategySpace& space) {
    const std::size_t k = space.size();
    if (nu.size() != k) throw ConfigError("measure and strategy space sizes differ");
    bool zero = true;
    for (double w : nu.weights()) zero = zero && w == 0.0;
    if (zero) return 0.0;

    const std::size_t n = k + 1;
    const std::size_t m = k + k * (k - 1) + 1;
    lp::Matrix A(m, n, 0.0);
    std::vector<double> b(m, 0.0), c(n, 0.0);
    std::size_t r = 0;
    for (std::size_t i = 0; i < k; ++i, ++r) {
        A(r, i) = 1.0;
        A(r, k) = -2.0;
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            A(r, i) = 1.0;
            A(r, j) = -1.0;
            A(r, k) = space.dist(i, j);
            b[r] = space.dist(i, j);
            ++r;
        }
    }
    A(r, k) = 1.0;
    b[r] = 1.0;

    for (std::size_t i = 0; i < k; ++i) c[i] = nu[i];
    c[k] = -nu.total_mass();
    const auto res = lp::solve_simplex(A, b, c);
    return std::max(0.0, res.value);
}

/// Exact W1 between two mixed strategies with ground metric dist.
inline double w1_on_U(const MixedStrategy& mu, const MixedStrategy& nu, const StrategySpace& space) {
    if (mu.size() != space.size() || nu.size() != space.size()) {
        throw ConfigError("measure and strategy space sizes differ");
    }
    if (mu == nu) return 0.0;
    return lp::solve_transport(mu.weights(), nu.weights(), space.dist()).cost;
}

struct NormEquivalenceReport {
    double bl = 0.0;
    double w1 = 0.0;
    double tv = 0.0;
    double radius = 0.0; // D_U
    bool bl_below_w1 = true;
    bool w1_below_scaled_bl = true;
    bool w1_below_scaled_tv = true;

    bool pass() const noexcept { return bl_below_w1 && w1_below_scaled_bl && w1_below_scaled_tv; }
};

/// Checks  BL <= W1 <= (1 + D_U) BL  and  W1 <= D_U TV  for mu - nu.
inline NormEquivalenceReport check_norm_equivalence(const MixedStrategy& mu, const MixedStrategy& nu,
                                                    const StrategySpace& space, double tol = 1e-9) {
    NormEquivalenceReport rep;
    const SignedMeasure diff = mu - nu;
    rep.bl = bl_norm(diff, space);
    rep.w1 = w1_on_U(mu, nu, space);
    rep.tv = tv_norm(diff);
    rep.radius = space.radius();
    rep.bl_below_w1 = rep.bl <= rep.w1 + tol;
    rep.w1_below_scaled_bl = rep.w1 <= (1.0 + rep.radius) * rep.bl + tol;
    rep.w1_below_scaled_tv = rep.w1 <= rep.radius * rep.tv + tol;
    return rep;
}

} // namespace spatgame
