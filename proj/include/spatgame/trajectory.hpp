#pragma once

#include <cstddef>
#include <vector>

#include "spatgame/model.hpp"

namespace spatgame {

/// Counters accumulated while integrating. Ratios are measured / bound, so a
/// value above 1 would mean a violated speed limit.
struct StepDiagnostics {
    std::size_t steps = 0;
    std::size_t clamp_events = 0;
    double max_tv_speed_ratio = 0.0;
    double max_position_speed_ratio = 0.0;
    double max_mass_sum_error = 0.0;

    bool operator==(const StepDiagnostics&) const = default;
};

/// Time-indexed sequence of ensembles, t -> Sigma_t.
struct Trajectory {
    std::vector<double> times;
    std::vector<Ensemble> states;
    StepDiagnostics diagnostics;

    std::size_t size() const noexcept { return times.size(); }
    const Ensemble& back() const { return states.back(); }

    void push(double t, Ensemble e) {
        times.push_back(t);
        states.push_back(std::move(e));
    }
};

} // namespace spatgame
