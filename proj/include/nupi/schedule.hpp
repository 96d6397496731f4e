#pragma once

// Switching signal over a family of topologies: a piecewise-constant,
// right-continuous map from time to the active topology. The active topology
// on [t_j, t_{j+1}) is the one switched to at t_j. Schedules are either
// periodic (the segment pattern repeats forever) or finite (defined on
// [0, end_time) only).
//
// Dwell and reactivation statistics are measured from the schedule rather
// than taken as inputs: what matters is that a positive minimum dwell exists
// and that every topology keeps coming back within a bounded gap.
//
// Immutable after construction; all queries are pure and thread-safe.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nupi/digraph.hpp>
#include <nupi/errors.hpp>

namespace nupi {

/// One piece of a schedule description: `topology` (1-based label) is active
/// for `duration` seconds.
struct Segment {
    double duration = 0.0;
    int topology = 1;
};

/// Observed dwell statistics. `tau_min` is the minimum gap between
/// consecutive switch instants (+inf when the schedule never switches);
/// `reactivation_gap[l-1]` is the largest gap between a deactivation of
/// topology l and its next activation (0 when never deactivated, +inf when
/// never activated or never reactivated).
struct DwellTimes {
    double tau_min = std::numeric_limits<double>::infinity();
    std::vector<double> reactivation_gap;
};

struct ScheduleValidation {
    bool joint_basis = false;
    bool positive_dwell = false;
    bool all_reactivated = false;
    bool pass = false;
    double tau_min = std::numeric_limits<double>::infinity();
    std::vector<double> reactivation_gap;
};

class SwitchSchedule {
public:
    /// Maximal interval of constant topology within [0, horizon].
    struct Span {
        double begin = 0.0;
        double end = 0.0;
        int topology = 1;
    };

    /// Direct form: `labels[j]` is active on [switch_times[j], switch_times[j+1])
    /// and `initial_label` on [0, switch_times[0]). Periodic schedules repeat
    /// with `period`; finite ones are defined up to `end_time`. Neighboring
    /// intervals with equal labels are merged (a switch changes topology).
    SwitchSchedule(std::vector<DiGraph> topologies, int initial_label,
                   std::vector<double> switch_times, std::vector<int> labels,
                   std::optional<double> period, std::optional<double> end_time)
        : topologies_(std::move(topologies)) {
        if (topologies_.empty()) throw ArgumentError("schedule needs at least one topology");
        const int n = topologies_.front().size();
        for (const DiGraph& g : topologies_)
            if (g.size() != n) throw DimensionError("schedule topologies must share the agent count");
        laplacians_.reserve(topologies_.size());
        for (const DiGraph& g : topologies_) laplacians_.push_back(laplacian(g));

        if (switch_times.size() != labels.size())
            throw ArgumentError("switch_times and labels must have equal length");
        check_label(initial_label);
        for (int l : labels) check_label(l);
        for (std::size_t j = 0; j < switch_times.size(); ++j) {
            if (!(switch_times[j] > 0.0)) throw ArgumentError("switch times must be positive");
            if (j > 0 && !(switch_times[j] > switch_times[j - 1]))
                throw ArgumentError("switch times must be strictly increasing");
        }

        // Merge equal neighbors.
        initial_label_ = initial_label;
        int prev = initial_label;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] == prev) continue;
            switch_times_.push_back(switch_times[j]);
            labels_.push_back(labels[j]);
            prev = labels[j];
        }

        if (period.has_value()) {
            if (end_time.has_value()) throw ArgumentError("periodic schedules have no end time");
            period_ = *period;
            if (!(period_ > 0.0)) throw ArgumentError("period must be positive");
            if (!switch_times_.empty() && switch_times_.back() >= period_)
                throw ArgumentError("switch times must lie inside one period");
            end_time_ = std::numeric_limits<double>::infinity();
        } else {
            if (!end_time.has_value())
                throw ArgumentError("finite schedules need an end time");
            end_time_ = *end_time;
            if (!(end_time_ > 0.0)) throw ArgumentError("end time must be positive");
            if (!switch_times_.empty() && switch_times_.back() >= end_time_)
                throw ArgumentError("switch times must lie before the end time");
        }
    }

    /// Builds a schedule from consecutive (duration, topology) segments.
    static SwitchSchedule from_segments(std::vector<DiGraph> topologies,
                                        const std::vector<Segment>& segments, bool periodic) {
        if (segments.empty()) throw ArgumentError("schedule needs at least one segment");
        std::vector<double> times;
        std::vector<int> after;
        double t = 0.0;
        for (std::size_t j = 0; j < segments.size(); ++j) {
            if (!(segments[j].duration > 0.0))
                throw ArgumentError("segment durations must be positive");
            t += segments[j].duration;
            if (j + 1 < segments.size()) {
                times.push_back(t);  // boundary where segment j+1 starts
                after.push_back(segments[j + 1].topology);
            }
        }
        return SwitchSchedule(std::move(topologies), segments.front().topology, std::move(times),
                              std::move(after), periodic ? std::optional<double>(t) : std::nullopt,
                              periodic ? std::nullopt : std::optional<double>(t));
    }

    /// Fixed-graph special case: one topology, active forever.
    static SwitchSchedule single(DiGraph g) {
        std::vector<DiGraph> tops;
        tops.push_back(std::move(g));
        return SwitchSchedule(std::move(tops), 1, {}, {}, 1.0, std::nullopt);
    }

    int topology_count() const { return static_cast<int>(topologies_.size()); }
    int agent_count() const { return topologies_.front().size(); }

    /// Topology by 1-based label.
    const DiGraph& topology(int label) const {
        check_label(label);
        return topologies_[label - 1];
    }
    const Laplacian& laplacian_of(int label) const {
        check_label(label);
        return laplacians_[label - 1];
    }
    const std::vector<DiGraph>& topologies() const { return topologies_; }

    bool periodic() const { return period_ > 0.0; }
    double period() const { return period_; }
    /// +inf for periodic schedules.
    double end_time() const { return end_time_; }
    int initial_label() const { return initial_label_; }
    const std::vector<double>& switch_times() const { return switch_times_; }
    const std::vector<int>& labels() const { return labels_; }

    /// Label of the topology active at t; right-continuous at switch instants.
    int topology_at(double t) const {
        if (t < 0.0) throw ArgumentError("time must be nonnegative");
        if (periodic()) {
            t = std::fmod(t, period_);
        } else if (t >= end_time_) {
            throw OutOfRangeError("t = " + std::to_string(t) +
                                  " is beyond the schedule end " + std::to_string(end_time_));
        }
        auto it = std::upper_bound(switch_times_.begin(), switch_times_.end(), t);
        if (it == switch_times_.begin()) return initial_label_;
        return labels_[static_cast<std::size_t>(it - switch_times_.begin()) - 1];
    }

    const Laplacian& laplacian_at(double t) const { return laplacians_[topology_at(t) - 1]; }

    /// Constant-topology spans covering [0, horizon], in order, with adjacent
    /// equal labels merged (also across the periodic wrap). Span boundaries
    /// are exact switch instants.
    std::vector<Span> spans(double horizon) const {
        if (!(horizon > 0.0)) throw ArgumentError("horizon must be positive");
        if (!periodic() && horizon > end_time_)
            throw OutOfRangeError("horizon exceeds the schedule end");

        // Per-cycle pattern: boundaries 0 = b_0 < b_1 < ... < b_m < cycle end.
        std::vector<double> offs{0.0};
        std::vector<int> labs{initial_label_};
        offs.insert(offs.end(), switch_times_.begin(), switch_times_.end());
        labs.insert(labs.end(), labels_.begin(), labels_.end());
        const double cycle = periodic() ? period_ : end_time_;

        std::vector<Span> out;
        for (long k = 0;; ++k) {
            const double base = static_cast<double>(k) * cycle;
            if (base >= horizon) break;
            for (std::size_t j = 0; j < offs.size(); ++j) {
                const double begin = base + offs[j];
                if (begin >= horizon) break;
                const double end =
                    std::min(horizon, j + 1 < offs.size() ? base + offs[j + 1] : base + cycle);
                if (!out.empty() && out.back().topology == labs[j])
                    out.back().end = end;  // merge across boundaries that do not switch
                else
                    out.push_back({begin, end, labs[j]});
            }
            if (!periodic()) break;
        }
        out.back().end = horizon;
        return out;
    }

    /// Observed dwell statistics; periodic schedules are measured over one
    /// period plus wraparound.
    DwellTimes dwell_times() const {
        const double window = periodic() ? 2.0 * period_ : end_time_;
        const auto sp = spans(window);

        DwellTimes dw;
        // Only spans bounded by switch instants on both sides count as dwell
        // intervals; the first span starts at 0 and the last is cut by the
        // window, so both are excluded.
        dw.tau_min = std::numeric_limits<double>::infinity();
        for (std::size_t s = 1; s + 1 < sp.size(); ++s)
            dw.tau_min = std::min(dw.tau_min, sp[s].end - sp[s].begin);

        const double inf = std::numeric_limits<double>::infinity();
        dw.reactivation_gap.assign(static_cast<std::size_t>(topology_count()), inf);
        for (int label = 1; label <= topology_count(); ++label) {
            double& gap = dw.reactivation_gap[static_cast<std::size_t>(label - 1)];
            double last_deactivation = -1.0;
            bool seen = false;
            double worst = 0.0;
            bool dangling = false;
            for (const Span& s : sp) {
                if (s.topology != label) continue;
                if (seen && last_deactivation >= 0.0)
                    worst = std::max(worst, s.begin - last_deactivation);
                seen = true;
                last_deactivation = s.end;
                dangling = s.end < window;
            }
            if (!seen) continue;  // never activated: stays +inf
            if (!periodic() && dangling) continue;  // deactivated for good: +inf
            gap = worst;
        }
        return dw;
    }

    /// Assumption-level checks; failures are report entries, not exceptions.
    ScheduleValidation validate() const {
        ScheduleValidation rep;
        rep.joint_basis = has_jointly_strongly_connected_basis(topologies_);
        const DwellTimes dw = dwell_times();
        rep.tau_min = dw.tau_min;
        rep.reactivation_gap = dw.reactivation_gap;
        rep.positive_dwell = dw.tau_min > 0.0;
        rep.all_reactivated = std::all_of(dw.reactivation_gap.begin(), dw.reactivation_gap.end(),
                                          [](double g) { return std::isfinite(g); });
        rep.pass = rep.joint_basis && rep.positive_dwell && rep.all_reactivated;
        return rep;
    }

private:
    void check_label(int label) const {
        if (label < 1 || label > topology_count())
            throw ArgumentError("topology label " + std::to_string(label) + " out of range 1.." +
                                std::to_string(topology_count()));
    }

    std::vector<DiGraph> topologies_;
    std::vector<Laplacian> laplacians_;
    int initial_label_ = 1;
    std::vector<double> switch_times_;  // strictly increasing, first > 0
    std::vector<int> labels_;           // labels_[j] active on [switch_times_[j], next)
    double period_ = 0.0;               // 0 when finite
    double end_time_ = 0.0;             // +inf when periodic
};

}  // namespace nupi
