#pragma once

// Game model: payoff kernel J, velocity field e, agent states and ensembles,
// the interaction potential, pairwise and mean-field vector fields, and the
// certified Lipschitz constants derived from the model.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spatgame/errors.hpp"
#include "spatgame/lp.hpp"
#include "spatgame/parallel.hpp"
#include "spatgame/rng.hpp"
#include "spatgame/strategy_space.hpp"

namespace spatgame {

enum class KernelKind { constant, gaussian, bump };

inline std::string to_string(KernelKind k) {
    switch (k) {
    case KernelKind::constant: return "constant";
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::bump: return "bump";
    }
    return "?";
}

/// Radial weight w(r) modulating the payoff by the distance between players.
///   constant: w = param            gaussian: w = exp(-r^2 / (2 param^2))
///   bump:     w = max(0, 1 - r / param)
struct SpatialKernel {
    KernelKind kind = KernelKind::constant;
    double param = 1.0;

    double operator()(double r) const {
        switch (kind) {
        case KernelKind::constant: return param;
        case KernelKind::gaussian: return std::exp(-r * r / (2.0 * param * param));
        case KernelKind::bump: return std::max(0.0, 1.0 - r / param);
        }
        return 0.0;
    }

    double sup() const {
        return kind == KernelKind::constant ? std::abs(param) : 1.0;
    }

    /// Lipschitz constant of r -> w(r).
    double lipschitz() const {
        switch (kind) {
        case KernelKind::constant: return 0.0;
        case KernelKind::gaussian: return std::exp(-0.5) / param; // max |w'| at r = param
        case KernelKind::bump: return 1.0 / param;
        }
        return 0.0;
    }

    void validate() const {
        if (!std::isfinite(param)) throw ConfigError("kernel parameter must be finite");
        if (kind != KernelKind::constant && !(param > 0.0)) {
            throw ConfigError(to_string(kind) + " kernel needs a positive width");
        }
    }

    bool operator==(const SpatialKernel&) const = default;
};

/// J(x, u_i, x', u_j) = A[i][j] * w(|x - x'|).
/// A pure matrix game is the constant kernel with param 1.
struct PayoffFamily {
    lp::Matrix matrix;
    SpatialKernel kernel;

    bool operator==(const PayoffFamily&) const = default;
};

/// e(x, u_k) = table[k] - damping * x.
struct VelocityFamily {
    lp::Matrix table; // K x d
    double damping = 0.0;

    bool operator==(const VelocityFamily&) const = default;
};

struct LipschitzOverrides {
    std::optional<double> L_e;
    std::optional<double> L_J;

    bool operator==(const LipschitzOverrides&) const = default;
};

struct LipschitzLedger {
    double L_e = 0.0;
    double L_J = 0.0;
    double diam = 0.0;
    double L_fx = 0.0;     // L_e (1 + diam U)
    double L_fsigma = 0.0; // 2 L_J (1 + diam U)
    double L = 0.0;        // L_fx + L_fsigma
    double theta_max = std::numeric_limits<double>::infinity(); // 1 / (L_J diam U)

    static LipschitzLedger from_constants(double L_e, double L_J, double diam) {
        if (!(L_e >= 0.0) || !(L_J >= 0.0) || !std::isfinite(L_e) || !std::isfinite(L_J)) {
            throw ConfigError("Lipschitz constants must be finite and nonnegative");
        }
        LipschitzLedger l;
        l.L_e = L_e;
        l.L_J = L_J;
        l.diam = diam;
        l.L_fx = L_e * (1.0 + diam);
        l.L_fsigma = 2.0 * L_J * (1.0 + diam);
        l.L = l.L_fx + l.L_fsigma;
        const double denom = L_J * diam;
        l.theta_max = denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
        return l;
    }

    bool operator==(const LipschitzLedger&) const = default;
};

namespace detail {

/// max over i != k of |M[i][c] - M[k][c]| / d(i,k) across all columns c, i.e.
/// the Lipschitz constant of the rows of M as a map U -> R^cols (sup norm per
/// column when `euclidean` is false, Euclidean norm of the row difference
/// otherwise).
inline double row_lipschitz(const lp::Matrix& M, const StrategySpace& space, bool euclidean) {
    double best = 0.0;
    for (std::size_t i = 0; i < M.rows(); ++i) {
        for (std::size_t k = 0; k < M.rows(); ++k) {
            if (i == k) continue;
            double diff = 0.0;
            for (std::size_t c = 0; c < M.cols(); ++c) {
                const double d = M(i, c) - M(k, c);
                diff = euclidean ? diff + d * d : std::max(diff, std::abs(d));
            }
            if (euclidean) diff = std::sqrt(diff);
            if (diff == 0.0) continue;
            const double dist = space.dist(i, k);
            if (!(dist > 0.0)) {
                throw ConfigError("strategies " + space.labels()[i] + " and " + space.labels()[k] +
                                  " are at distance 0 but have different payoffs/velocities");
            }
            best = std::max(best, diff / dist);
        }
    }
    return best;
}

inline lp::Matrix transpose(const lp::Matrix& M) {
    lp::Matrix t(M.cols(), M.rows());
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = 0; j < M.cols(); ++j) t(j, i) = M(i, j);
    return t;
}

} // namespace detail

/// Closed-form Lipschitz constant of J with respect to the sum metric
/// |x1-x2| + d(u1,u2) + |x1'-x2'| + d(u1',u2'):
///   L_J = max(max|A| * Lip(w), Lip_u(A) * sup|w|)
/// where Lip_u(A) covers changes in either strategy argument.
inline double payoff_lipschitz(const PayoffFamily& payoff, const StrategySpace& space) {
    double amax = 0.0;
    for (double a : payoff.matrix.data()) amax = std::max(amax, std::abs(a));
    const double lip_first = detail::row_lipschitz(payoff.matrix, space, false);
    const double lip_second = detail::row_lipschitz(detail::transpose(payoff.matrix), space, false);
    const double lip_u = std::max(lip_first, lip_second);
    return std::max(amax * payoff.kernel.lipschitz(), lip_u * payoff.kernel.sup());
}

/// L_e = max(damping, Lip_u(table)) for e(x,u_k) = v_k - damping x.
inline double velocity_lipschitz(const VelocityFamily& velocity, const StrategySpace& space) {
    return std::max(std::abs(velocity.damping), detail::row_lipschitz(velocity.table, space, true));
}

/// Derived ledger from the closed forms, with optional explicit overrides.
inline LipschitzLedger compute_ledger(const PayoffFamily& payoff, const VelocityFamily& velocity,
                                      const StrategySpace& space, const LipschitzOverrides& overrides = {}) {
    const double L_e = overrides.L_e ? *overrides.L_e : velocity_lipschitz(velocity, space);
    const double L_J = overrides.L_J ? *overrides.L_J : payoff_lipschitz(payoff, space);
    return LipschitzLedger::from_constants(L_e, L_J, space.diam());
}

class GameModel {
public:
    GameModel(StrategySpace space, std::size_t dim, PayoffFamily payoff, VelocityFamily velocity,
              std::optional<double> position_bound = std::nullopt, LipschitzOverrides overrides = {})
        : space_(std::move(space)), dim_(dim), payoff_(std::move(payoff)), velocity_(std::move(velocity)),
          position_bound_(position_bound), overrides_(overrides) {
        const std::size_t k = space_.size();
        if (dim_ == 0) throw ConfigError("position dimension must be positive");
        if (payoff_.matrix.rows() != k || payoff_.matrix.cols() != k) {
            throw ConfigError("payoff matrix must be KxK with K = " + std::to_string(k));
        }
        if (velocity_.table.rows() != k || velocity_.table.cols() != dim_) {
            throw ConfigError("velocity table must be K x d = " + std::to_string(k) + "x" + std::to_string(dim_));
        }
        for (double a : payoff_.matrix.data())
            if (!std::isfinite(a)) throw ConfigError("payoff matrix entries must be finite");
        for (double v : velocity_.table.data())
            if (!std::isfinite(v)) throw ConfigError("velocity table entries must be finite");
        if (!std::isfinite(velocity_.damping) || velocity_.damping < 0.0) {
            throw ConfigError("velocity damping must be finite and nonnegative");
        }
        payoff_.kernel.validate();
        if (position_bound_ && !(*position_bound_ > 0.0)) throw ConfigError("position_bound must be positive");
        ledger_ = compute_ledger(payoff_, velocity_, space_, overrides_);
    }

    const StrategySpace& space() const noexcept { return space_; }
    std::size_t strategies() const noexcept { return space_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    const PayoffFamily& payoff_family() const noexcept { return payoff_; }
    const VelocityFamily& velocity_family() const noexcept { return velocity_; }
    const std::optional<double>& position_bound() const noexcept { return position_bound_; }
    const LipschitzOverrides& overrides() const noexcept { return overrides_; }
    const LipschitzLedger& ledger() const noexcept { return ledger_; }

    double payoff(std::span<const double> x, std::size_t i, std::span<const double> xp, std::size_t j) const {
        return payoff_.matrix(i, j) * payoff_.kernel(distance(x, xp));
    }

    /// Writes e(x, u_k) into out (length d).
    void velocity(std::span<const double> x, std::size_t k, std::span<double> out) const {
        for (std::size_t c = 0; c < dim_; ++c) out[c] = velocity_.table(k, c) - velocity_.damping * x[c];
    }

    std::vector<double> velocity(std::span<const double> x, std::size_t k) const {
        std::vector<double> out(dim_);
        velocity(x, k, out);
        return out;
    }

    /// sup |e| over B_R x U (R = position_bound, or 0 when damping is zero).
    double velocity_sup() const {
        double best = 0.0;
        for (std::size_t k = 0; k < space_.size(); ++k) {
            double s = 0.0;
            for (std::size_t c = 0; c < dim_; ++c) s += velocity_.table(k, c) * velocity_.table(k, c);
            best = std::max(best, std::sqrt(s));
        }
        if (velocity_.damping > 0.0) {
            if (!position_bound_) return std::numeric_limits<double>::infinity();
            best += velocity_.damping * *position_bound_;
        }
        return best;
    }

    static double distance(std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) {
            const double d = a[c] - b[c];
            s += d * d;
        }
        return std::sqrt(s);
    }

private:
    StrategySpace space_;
    std::size_t dim_;
    PayoffFamily payoff_;
    VelocityFamily velocity_;
    std::optional<double> position_bound_;
    LipschitzOverrides overrides_;
    LipschitzLedger ledger_;
};

/// y = (x, sigma) in C = R^d x P(U).
struct AgentState {
    std::vector<double> x;
    MixedStrategy sigma;

    bool operator==(const AgentState&) const = default;
};

/// Weighted atomic probability measure on C.
class Ensemble {
public:
    static constexpr double mass_tolerance = 1e-9;

    Ensemble() = default;
    Ensemble(std::vector<AgentState> agents, std::vector<double> masses)
        : agents_(std::move(agents)), masses_(std::move(masses)) {
        if (agents_.empty()) throw ConfigError("ensemble needs at least one agent");
        if (agents_.size() != masses_.size()) throw ConfigError("ensemble needs one mass per agent");
        double total = 0.0;
        for (double m : masses_) {
            if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("ensemble masses must be positive");
            total += m;
        }
        if (std::abs(total - 1.0) > mass_tolerance) {
            throw ConfigError("ensemble masses sum to " + std::to_string(total) + ", expected 1");
        }
        for (const auto& a : agents_) {
            if (a.x.size() != agents_[0].x.size() || a.sigma.size() != agents_[0].sigma.size()) {
                throw ConfigError("ensemble agents must share position dimension and strategy count");
            }
        }
    }

    static Ensemble uniform(std::vector<AgentState> agents) {
        const double m = 1.0 / static_cast<double>(agents.size());
        std::vector<double> masses(agents.size(), m);
        return Ensemble(std::move(agents), std::move(masses));
    }

    std::size_t size() const noexcept { return agents_.size(); }
    const std::vector<AgentState>& agents() const noexcept { return agents_; }
    const AgentState& agent(std::size_t i) const { return agents_[i]; }
    const std::vector<double>& masses() const noexcept { return masses_; }
    double mass(std::size_t i) const { return masses_[i]; }
    std::size_t dim() const { return agents_.empty() ? 0 : agents_[0].x.size(); }
    std::size_t strategies() const { return agents_.empty() ? 0 : agents_[0].sigma.size(); }

    bool operator==(const Ensemble&) const = default;

private:
    std::vector<AgentState> agents_;
    std::vector<double> masses_;
};

/// Tangent vector in Y = R^d x M(U): a position velocity and a signed measure
/// rate. The strategy part of every field produced here has zero total mass.
struct Tangent {
    std::vector<double> x;
    std::vector<double> sigma;

    SignedMeasure sigma_measure() const { return SignedMeasure(sigma); }
};

inline void check_compatible(const AgentState& y, const GameModel& model) {
    if (y.x.size() != model.dim() || y.sigma.size() != model.strategies()) {
        throw ConfigError("agent state does not match the model dimensions");
    }
}

inline void check_compatible(const Ensemble& e, const GameModel& model) {
    if (e.dim() != model.dim() || e.strategies() != model.strategies()) {
        throw ConfigError("ensemble does not match the model dimensions");
    }
}

/// a(x, sigma) = sum_k sigma_k e(x, u_k).
inline std::vector<double> mean_velocity(const AgentState& y, const GameModel& model) {
    const std::size_t d = model.dim();
    std::vector<double> out(d, 0.0), ek(d);
    for (std::size_t k = 0; k < model.strategies(); ++k) {
        const double w = y.sigma[k];
        if (w == 0.0) continue;
        model.velocity(y.x, k, ek);
        for (std::size_t c = 0; c < d; ++c) out[c] += w * ek[c];
    }
    return out;
}

/// (J * Sigma)(x, u_i) = sum_a m_a sum_j sigma_a,j J(x, u_i, x_a, u_j).
inline std::vector<double> j_conv(const Ensemble& ensemble, std::span<const double> x, const GameModel& model) {
    const std::size_t K = model.strategies();
    std::vector<double> out(K, 0.0);
    for (std::size_t a = 0; a < ensemble.size(); ++a) {
        const AgentState& other = ensemble.agent(a);
        const double m = ensemble.mass(a);
        for (std::size_t i = 0; i < K; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < K; ++j) s += other.sigma[j] * model.payoff(x, i, other.x, j);
            out[i] += m * s;
        }
    }
    return out;
}

/// Delta_{Sigma,y}(u_i) = (J*Sigma)(x, u_i) - sum_w sigma_w (J*Sigma)(x, u_w).
inline std::vector<double> interaction_potential(const Ensemble& ensemble, const AgentState& y,
                                                 const GameModel& model) {
    std::vector<double> jc = j_conv(ensemble, y.x, model);
    double avg = 0.0;
    for (std::size_t i = 0; i < jc.size(); ++i) avg += y.sigma[i] * jc[i];
    for (double& v : jc) v -= avg;
    return jc;
}

/// Two-player interaction field f(y, y') = (a(y), f_sigma(y, y')).
inline Tangent pairwise_field(const AgentState& y, const AgentState& yp, const GameModel& model) {
    const std::size_t K = model.strategies();
    Tangent t;
    t.x = mean_velocity(y, model);
    std::vector<double> payoff_vs(K, 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) payoff_vs[i] += yp.sigma[j] * model.payoff(y.x, i, yp.x, j);
    }
    double avg = 0.0;
    for (std::size_t w = 0; w < K; ++w) avg += y.sigma[w] * payoff_vs[w];
    t.sigma.resize(K);
    for (std::size_t i = 0; i < K; ++i) t.sigma[i] = y.sigma[i] * (payoff_vs[i] - avg);
    return t;
}

/// b_Sigma(y) assembled as the mass-weighted sum of pairwise fields.
inline Tangent mean_field_pairwise(const Ensemble& ensemble, const AgentState& y, const GameModel& model) {
    Tangent out{std::vector<double>(model.dim(), 0.0), std::vector<double>(model.strategies(), 0.0)};
    for (std::size_t a = 0; a < ensemble.size(); ++a) {
        const Tangent f = pairwise_field(y, ensemble.agent(a), model);
        const double m = ensemble.mass(a);
        for (std::size_t c = 0; c < f.x.size(); ++c) out.x[c] += m * f.x[c];
        for (std::size_t i = 0; i < f.sigma.size(); ++i) out.sigma[i] += m * f.sigma[i];
    }
    return out;
}

/// Precomputed per-ensemble data for fast field evaluation: A sigma_a for
/// every agent, so that (J*Sigma)(x, .) costs O(N (K + d)).
class FieldEvaluator {
public:
    FieldEvaluator(const Ensemble& ensemble, const GameModel& model) : ensemble_(&ensemble), model_(&model) {
        check_compatible(ensemble, model);
        const std::size_t K = model.strategies();
        const lp::Matrix& A = model.payoff_family().matrix;
        payoff_rows_.assign(ensemble.size() * K, 0.0);
        for (std::size_t a = 0; a < ensemble.size(); ++a) {
            const auto& s = ensemble.agent(a).sigma;
            for (std::size_t i = 0; i < K; ++i) {
                double v = 0.0;
                for (std::size_t j = 0; j < K; ++j) v += A(i, j) * s[j];
                payoff_rows_[a * K + i] = v;
            }
        }
    }

    /// (J * Sigma)(x, .)
    std::vector<double> j_conv(std::span<const double> x) const {
        const std::size_t K = model_->strategies();
        const SpatialKernel& kernel = model_->payoff_family().kernel;
        std::vector<double> out(K, 0.0);
        for (std::size_t a = 0; a < ensemble_->size(); ++a) {
            const double w = ensemble_->mass(a) * kernel(GameModel::distance(x, ensemble_->agent(a).x));
            if (w == 0.0) continue;
            const double* row = payoff_rows_.data() + a * K;
            for (std::size_t i = 0; i < K; ++i) out[i] += w * row[i];
        }
        return out;
    }

    Tangent field(const AgentState& y) const {
        Tangent t;
        t.x = mean_velocity(y, *model_);
        t.sigma = j_conv(y.x);
        double avg = 0.0;
        for (std::size_t i = 0; i < t.sigma.size(); ++i) avg += y.sigma[i] * t.sigma[i];
        for (std::size_t i = 0; i < t.sigma.size(); ++i) t.sigma[i] = y.sigma[i] * (t.sigma[i] - avg);
        return t;
    }

    const Ensemble& ensemble() const noexcept { return *ensemble_; }

private:
    const Ensemble* ensemble_;
    const GameModel* model_;
    std::vector<double> payoff_rows_;
};

/// b_Sigma(y) = (a(y), Delta_{Sigma,y} sigma).
inline Tangent mean_field(const Ensemble& ensemble, const AgentState& y, const GameModel& model) {
    check_compatible(y, model);
    return FieldEvaluator(ensemble, model).field(y);
}

/// b_Sigma evaluated at every atom of Sigma itself.
inline std::vector<Tangent> mean_field_all(const Ensemble& ensemble, const GameModel& model, unsigned threads = 1) {
    const FieldEvaluator eval(ensemble, model);
    std::vector<Tangent> out(ensemble.size());
    parallel_for(ensemble.size(), threads, [&](std::size_t i) { out[i] = eval.field(ensemble.agent(i)); });
    return out;
}

struct SampledLipschitz {
    double L_e = 0.0;
    double L_J = 0.0;
};

/// Lower estimates of L_e and L_J by dense random sampling of difference
/// quotients inside B_R. Requires a position bound.
inline SampledLipschitz estimate_lipschitz_sampled(const GameModel& model, std::size_t samples, std::uint64_t seed,
                                                   double step = 1e-6) {
    if (!model.position_bound()) throw ConfigError("sampled Lipschitz estimation needs position_bound");
    const double R = *model.position_bound();
    const std::size_t d = model.dim();
    const std::size_t K = model.strategies();
    rng::Engine g(seed);

    auto random_point = [&](double radius) {
        std::vector<double> p(d);
        double n2 = 0.0;
        for (auto& v : p) {
            v = rng::normal(g);
            n2 += v * v;
        }
        const double r = radius * std::pow(rng::uniform01(g), 1.0 / static_cast<double>(d));
        const double scale = n2 > 0.0 ? r / std::sqrt(n2) : 0.0;
        for (auto& v : p) v *= scale;
        return p;
    };
    auto random_direction = [&]() {
        std::vector<double> p(d);
        double n2 = 0.0;
        for (auto& v : p) {
            v = rng::normal(g);
            n2 += v * v;
        }
        for (auto& v : p) v /= std::sqrt(n2);
        return p;
    };
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng::uniform01(g) * static_cast<double>(n)); };

    SampledLipschitz out;
    std::vector<double> e1(d), e2(d);
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<double> x = random_point(R);
        // partner at a uniformly random distance so that short ranges are well covered
        std::vector<double> dir = random_direction();
        const double r = rng::uniform01(g) * R;
        std::vector<double> xp(d);
        for (std::size_t c = 0; c < d; ++c) xp[c] = x[c] + r * dir[c];
        const std::size_t i = pick(K), j = pick(K);
        const double j0 = model.payoff(x, i, xp, j);

        switch (s % 4) {
        case 0: { // move x
            std::vector<double> x2 = x;
            std::vector<double> v = (rng::uniform01(g) < 0.5) ? dir : random_direction();
            const double sign = (rng::uniform01(g) < 0.5) ? 1.0 : -1.0;
            for (std::size_t c = 0; c < d; ++c) x2[c] += sign * step * v[c];
            out.L_J = std::max(out.L_J, std::abs(model.payoff(x2, i, xp, j) - j0) / step);
            model.velocity(x, i, e1);
            model.velocity(x2, i, e2);
            out.L_e = std::max(out.L_e, GameModel::distance(e1, e2) / step);
            break;
        }
        case 1: { // move x'
            std::vector<double> x2 = xp;
            std::vector<double> v = (rng::uniform01(g) < 0.5) ? dir : random_direction();
            const double sign = (rng::uniform01(g) < 0.5) ? 1.0 : -1.0;
            for (std::size_t c = 0; c < d; ++c) x2[c] += sign * step * v[c];
            out.L_J = std::max(out.L_J, std::abs(model.payoff(x, i, x2, j) - j0) / step);
            break;
        }
        case 2: { // change u
            const std::size_t i2 = pick(K);
            if (i2 == i) break;
            const double dist = model.space().dist(i, i2);
            if (dist > 0.0) {
                out.L_J = std::max(out.L_J, std::abs(model.payoff(x, i2, xp, j) - j0) / dist);
                model.velocity(x, i, e1);
                model.velocity(x, i2, e2);
                out.L_e = std::max(out.L_e, GameModel::distance(e1, e2) / dist);
            }
            break;
        }
        default: { // change u'
            const std::size_t j2 = pick(K);
            const double dist = model.space().dist(j, j2);
            if (j2 != j && dist > 0.0) {
                out.L_J = std::max(out.L_J, std::abs(model.payoff(x, i, xp, j2) - j0) / dist);
            }
            break;
        }
        }
    }
    return out;
}

} // namespace spatgame
