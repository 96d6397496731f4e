#pragma once

// Hybrid closed-loop integration: classical fixed-step RK4 inside each
// constant-topology span, with the last step of a span shortened so that
// integration never straddles a switch instant. State is carried continuously
// across switches; only the Laplacian changes.
//
// Identical scenarios produce bit-identical trajectories: the stepper is
// deterministic and span boundaries are computed from the same doubles every
// run.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <nupi/detail/text.hpp>
#include <nupi/dynamics.hpp>
#include <nupi/errors.hpp>
#include <nupi/schedule.hpp>

namespace nupi {

enum class Model { SI, DI };

/// Complete experiment description.
struct Scenario {
    SwitchSchedule schedule;
    GainVector gains;
    ControllerParams params;
    Model model = Model::SI;
    Eigen::VectorXd x0;
    Eigen::VectorXd v0;  // DI only
    double horizon = 40.0;
    double step = 1e-3;
    int record_every = 1;
};

/// Any |state| beyond this aborts the run as divergence. Nussbaum closed
/// loops can grow transiently; a generous bound separates transients from
/// genuine blowup.
inline constexpr double kBlowupGuard = 1e9;

inline void validate_scenario(const Scenario& sc) {
    const int n = sc.schedule.agent_count();
    if (sc.x0.size() != n) throw DimensionError("x0 length must match the agent count");
    if (sc.gains.size() != n) throw DimensionError("gain vector length must match the agent count");
    if (sc.model == Model::SI) {
        sc.params.require_si();
    } else {
        sc.params.require_di();
        if (sc.v0.size() != n) throw DimensionError("v0 length must match the agent count");
    }
    if (!(sc.horizon > 0.0)) throw ArgumentError("horizon must be positive");
    if (!(sc.step > 0.0)) throw ArgumentError("step must be positive");
    if (sc.record_every < 1) throw ArgumentError("record_every must be >= 1");
    const double tau_min = sc.schedule.dwell_times().tau_min;
    if (sc.step > tau_min)
        throw ArgumentError("step " + std::to_string(sc.step) +
                            " exceeds the smallest inter-switch gap " + std::to_string(tau_min));
    if (!sc.schedule.periodic() && sc.horizon > sc.schedule.end_time())
        throw OutOfRangeError("horizon exceeds the end of the finite schedule");
}

/// Time-sampled record of a run. Every switch instant inside the horizon is a
/// sample; between switches every record_every-th step is kept. `nussbaum`
/// holds S (SI) or R (DI); `product` holds x_i e_i (SI) or q_i r_i (DI),
/// the quantities whose decay the theory predicts.
struct Trajectory {
    Model model = Model::SI;
    int agent_count = 0;
    std::vector<double> times;
    std::vector<int> active_topology;       // 1-based label, right-continuous
    std::vector<Eigen::VectorXd> x;
    std::vector<Eigen::VectorXd> v;         // empty for SI
    std::vector<Eigen::VectorXd> z1;        // zbar1 for DI
    std::vector<Eigen::VectorXd> z2;        // zbar2 for DI
    std::vector<Eigen::VectorXd> u;
    std::vector<Eigen::VectorXd> nussbaum;
    std::vector<Eigen::VectorXd> product;

    std::size_t sample_count() const { return times.size(); }
};

/// One classical RK4 step for y' = f(t, y).
template <class F>
Eigen::VectorXd rk4_step(F&& f, double t, const Eigen::VectorXd& y, double h) {
    const Eigen::VectorXd k1 = f(t, y);
    const Eigen::VectorXd k2 = f(t + 0.5 * h, Eigen::VectorXd(y + 0.5 * h * k1));
    const Eigen::VectorXd k3 = f(t + 0.5 * h, Eigen::VectorXd(y + 0.5 * h * k2));
    const Eigen::VectorXd k4 = f(t + h, Eigen::VectorXd(y + h * k3));
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 march of y' = f(t, y) from t0 to t1; the last step is
/// shortened to land exactly on t1.
template <class F>
Eigen::VectorXd rk4_integrate(F&& f, Eigen::VectorXd y, double t0, double t1, double step) {
    if (!(step > 0.0)) throw ArgumentError("step must be positive");
    double t = t0;
    for (std::int64_t i = 1; t < t1; ++i) {
        double t_next = t0 + static_cast<double>(i) * step;
        if (t_next > t1 - 1e-9 * step) t_next = t1;
        y = rk4_step(f, t, y, t_next - t);
        t = t_next;
    }
    return y;
}

namespace detail {

inline void check_finite(const Eigen::VectorXd& y, double t) {
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kBlowupGuard) throw DivergenceError(t);
}

struct SIRecorder {
    const Scenario& sc;
    Trajectory& tr;

    void operator()(double t, int label, const Eigen::VectorXd& y) const {
        const int n = sc.schedule.agent_count();
        SIAugmentedState st{y.segment(0, n), y.segment(n, n), y.segment(2 * n, n)};
        const Laplacian& l = sc.schedule.laplacian_of(label);
        const Eigen::VectorXd e = neighborhood_errors(l, st.x);
        Eigen::VectorXd u(n), s(n);
        for (int i = 0; i < n; ++i) {
            u(i) = si_control(i, st, e, sc.params);
            s(i) = si_nussbaum_value(st.x(i), st.z1(i), st.z2(i), sc.params);
        }
        tr.times.push_back(t);
        tr.active_topology.push_back(label);
        tr.x.push_back(st.x);
        tr.z1.push_back(st.z1);
        tr.z2.push_back(st.z2);
        tr.u.push_back(std::move(u));
        tr.nussbaum.push_back(std::move(s));
        tr.product.push_back(st.x.cwiseProduct(e));
    }
};

struct DIRecorder {
    const Scenario& sc;
    Trajectory& tr;

    void operator()(double t, int label, const Eigen::VectorXd& y) const {
        const int n = sc.schedule.agent_count();
        DIAugmentedState st{y.segment(0, n), y.segment(n, n), y.segment(2 * n, n),
                            y.segment(3 * n, n)};
        const Laplacian& l = sc.schedule.laplacian_of(label);
        const Eigen::VectorXd q = st.v + sc.params.rho * st.x;
        const Eigen::VectorXd r = l.matrix() * q;
        Eigen::VectorXd u(n), big_r(n);
        for (int i = 0; i < n; ++i) {
            u(i) = di_control(i, st, l, sc.params);
            big_r(i) = di_nussbaum_value(st, i, sc.params);
        }
        tr.times.push_back(t);
        tr.active_topology.push_back(label);
        tr.x.push_back(st.x);
        tr.v.push_back(st.v);
        tr.z1.push_back(st.zbar1);
        tr.z2.push_back(st.zbar2);
        tr.u.push_back(std::move(u));
        tr.nussbaum.push_back(std::move(big_r));
        tr.product.push_back(q.cwiseProduct(r));
    }
};

}  // namespace detail

/// Integrates the closed loop over the scenario's schedule. Throws
/// DivergenceError (with the blowup time) if the state leaves the guard box;
/// Assumption-level schedule validation is the caller's concern — the
/// simulator runs regardless.
inline Trajectory simulate(const Scenario& sc) {
    validate_scenario(sc);
    const int n = sc.schedule.agent_count();
    const auto spans = sc.schedule.spans(sc.horizon);

    Trajectory tr;
    tr.model = sc.model;
    tr.agent_count = n;

    Eigen::VectorXd y;
    if (sc.model == Model::SI) {
        y.setZero(3 * n);
        y.segment(0, n) = sc.x0;
    } else {
        y.setZero(4 * n);
        y.segment(0, n) = sc.x0;
        y.segment(n, n) = sc.v0;
    }

    auto record = [&](double t, int label, const Eigen::VectorXd& state) {
        if (sc.model == Model::SI)
            detail::SIRecorder{sc, tr}(t, label, state);
        else
            detail::DIRecorder{sc, tr}(t, label, state);
    };

    record(0.0, spans.front().topology, y);

    std::int64_t step_count = 0;
    for (std::size_t s = 0; s < spans.size(); ++s) {
        const auto& span = spans[s];
        const Laplacian& l = sc.schedule.laplacian_of(span.topology);
        auto rhs = [&](double, const Eigen::VectorXd& yy) -> Eigen::VectorXd {
            if (sc.model == Model::SI) {
                SIAugmentedState st{yy.segment(0, n), yy.segment(n, n), yy.segment(2 * n, n)};
                SIAugmentedState d = si_rhs(st, l, sc.gains, sc.params);
                Eigen::VectorXd out(3 * n);
                out << d.x, d.z1, d.z2;
                return out;
            }
            DIAugmentedState st{yy.segment(0, n), yy.segment(n, n), yy.segment(2 * n, n),
                                yy.segment(3 * n, n)};
            DIAugmentedState d = di_rhs(st, l, sc.gains, sc.params);
            Eigen::VectorXd out(4 * n);
            out << d.x, d.v, d.zbar1, d.zbar2;
            return out;
        };

        double t = span.begin;
        for (std::int64_t i = 1; t < span.end; ++i) {
            double t_next = span.begin + static_cast<double>(i) * sc.step;
            if (t_next > span.end - 1e-9 * sc.step) t_next = span.end;
            y = rk4_step(rhs, t, y, t_next - t);
            detail::check_finite(y, t_next);
            t = t_next;
            ++step_count;
            const bool boundary = (t == span.end);
            if (boundary || step_count % sc.record_every == 0) {
                // Right-continuous labeling: a sample on a switch instant
                // belongs to the incoming topology. The final sample has no
                // next span and keeps the topology that produced it.
                const int label =
                    (boundary && s + 1 < spans.size()) ? spans[s + 1].topology : span.topology;
                record(t, label, y);
            }
            if (boundary) break;
        }
    }
    return tr;
}

/// Fixed-graph special case: a single-topology schedule active forever.
/// Warns on stderr when the graph is not strongly connected, since the
/// consensus guarantee needs strong connectivity in the fixed-graph case.
inline Trajectory simulate_fixed_graph(const DiGraph& graph, const GainVector& gains,
                                       const ControllerParams& params, Model model,
                                       Eigen::VectorXd x0, Eigen::VectorXd v0, double horizon,
                                       double step, int record_every = 1) {
    if (!is_strongly_connected(graph) && graph.size() > 1)
        std::fputs("warning: fixed graph is not strongly connected\n", stderr);
    Scenario sc{SwitchSchedule::single(graph),
                gains,
                params,
                model,
                std::move(x0),
                std::move(v0),
                horizon,
                step,
                record_every};
    return simulate(sc);
}

/// CSV export: header `t,topology,x1..xn[,v1..vn],u1..un,S1..Sn`, one row per
/// sample, 17 significant digits (lossless).
inline void write_trajectory_csv(const Trajectory& tr, std::ostream& out) {
    const int n = tr.agent_count;
    out << "t,topology";
    for (int i = 1; i <= n; ++i) out << ",x" << i;
    if (tr.model == Model::DI)
        for (int i = 1; i <= n; ++i) out << ",v" << i;
    for (int i = 1; i <= n; ++i) out << ",u" << i;
    for (int i = 1; i <= n; ++i) out << ",S" << i;
    out << "\n";
    for (std::size_t s = 0; s < tr.sample_count(); ++s) {
        out << detail::g17(tr.times[s]) << "," << tr.active_topology[s];
        for (int i = 0; i < n; ++i) out << "," << detail::g17(tr.x[s](i));
        if (tr.model == Model::DI)
            for (int i = 0; i < n; ++i) out << "," << detail::g17(tr.v[s](i));
        for (int i = 0; i < n; ++i) out << "," << detail::g17(tr.u[s](i));
        for (int i = 0; i < n; ++i) out << "," << detail::g17(tr.nussbaum[s](i));
        out << "\n";
    }
}

}  // namespace nupi
