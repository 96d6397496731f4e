#pragma once

// Trajectory diagnostics that make the convergence claims checkable at finite
// horizon: consensus diameter, the Nussbaum boundedness certificate
// |S_i(t) - S_i(0)| <= 2 (pi + 1/|b_i|), and decay of the products whose
// vanishing drives the consensus argument. Asymptotic limits are
// operationalized as a tail statistic over the last 10% of the horizon.
//
// Pure post-processing over immutable trajectories; thread-safe.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <nupi/detail/text.hpp>
#include <nupi/dynamics.hpp>
#include <nupi/errors.hpp>
#include <nupi/simulate.hpp>

namespace nupi {

/// Pointwise max pairwise position gap, max_i x_i - min_i x_i per sample.
inline std::vector<double> consensus_diameter(const Trajectory& tr) {
    std::vector<double> out;
    out.reserve(tr.sample_count());
    for (const auto& x : tr.x) out.push_back(x.maxCoeff() - x.minCoeff());
    return out;
}

/// Max pairwise velocity gap per sample. DI trajectories only.
inline std::vector<double> velocity_diameter(const Trajectory& tr) {
    if (tr.model != Model::DI) throw ModelError("velocity diameter needs a DI trajectory");
    std::vector<double> out;
    out.reserve(tr.sample_count());
    for (const auto& v : tr.v) out.push_back(v.maxCoeff() - v.minCoeff());
    return out;
}

/// Per-agent certificate |S_i(t) - S_i(0)| <= 2 (pi + 1/|b_i|) checked at
/// every sample. `margin` is the remaining slack, bound - max deviation;
/// the check passes iff every margin is nonnegative.
struct NussbaumBoundCheck {
    bool pass = false;
    Eigen::VectorXd bound;
    Eigen::VectorXd max_deviation;
    Eigen::VectorXd margin;
};

inline NussbaumBoundCheck nussbaum_bound_check(const Trajectory& tr, const GainVector& b) {
    if (b.size() != tr.agent_count) throw DimensionError("gain vector size mismatch");
    if (tr.sample_count() == 0) throw ArgumentError("empty trajectory");
    const int n = tr.agent_count;
    NussbaumBoundCheck out;
    out.bound.resize(n);
    out.max_deviation.setZero(n);
    for (int i = 0; i < n; ++i) out.bound(i) = 2.0 * (std::numbers::pi + 1.0 / std::abs(b[i]));
    const Eigen::VectorXd s0 = tr.nussbaum.front();
    for (const auto& s : tr.nussbaum)
        out.max_deviation = out.max_deviation.cwiseMax((s - s0).cwiseAbs());
    out.margin = out.bound - out.max_deviation;
    out.pass = (out.margin.array() >= 0.0).all();
    return out;
}

/// Decay of the proportional-integral products: series of max_i |x_i e_i|
/// (SI) or max_i |q_i r_i| (DI), plus the tail maximum over the last 10% of
/// the horizon.
struct ProductDecay {
    std::vector<double> series;
    double tail = 0.0;
};

inline ProductDecay product_decay(const Trajectory& tr) {
    if (tr.sample_count() == 0) throw ArgumentError("empty trajectory");
    ProductDecay out;
    out.series.reserve(tr.sample_count());
    for (const auto& p : tr.product) out.series.push_back(p.cwiseAbs().maxCoeff());
    const double t_tail = 0.9 * tr.times.back();
    for (std::size_t s = 0; s < tr.sample_count(); ++s)
        if (tr.times[s] >= t_tail) out.tail = std::max(out.tail, out.series[s]);
    return out;
}

/// max_i |v_i| over the last 10% of the horizon. DI trajectories only.
inline double velocity_decay(const Trajectory& tr) {
    if (tr.model != Model::DI) throw ModelError("velocity decay needs a DI trajectory");
    if (tr.sample_count() == 0) throw ArgumentError("empty trajectory");
    const double t_tail = 0.9 * tr.times.back();
    double out = 0.0;
    for (std::size_t s = 0; s < tr.sample_count(); ++s)
        if (tr.times[s] >= t_tail) out = std::max(out, tr.v[s].cwiseAbs().maxCoeff());
    return out;
}

/// Everything above in one pass, plus per-signal sup norms.
struct DiagnosticsReport {
    Model model = Model::SI;
    int agent_count = 0;
    std::size_t samples = 0;
    std::vector<double> times;
    std::vector<double> diameter;
    std::vector<double> vel_diameter;  // empty for SI
    std::vector<double> product;
    double final_diameter = 0.0;
    double max_diameter = 0.0;
    double product_tail = 0.0;
    double velocity_tail = std::numeric_limits<double>::quiet_NaN();  // NaN for SI
    NussbaumBoundCheck nussbaum;
    double sup_x = 0.0;
    double sup_v = std::numeric_limits<double>::quiet_NaN();  // NaN for SI
    double sup_u = 0.0;
    double sup_nussbaum = 0.0;
};

inline DiagnosticsReport diagnostics(const Trajectory& tr, const GainVector& b) {
    DiagnosticsReport rep;
    rep.model = tr.model;
    rep.agent_count = tr.agent_count;
    rep.samples = tr.sample_count();
    rep.times = tr.times;
    rep.diameter = consensus_diameter(tr);
    rep.final_diameter = rep.diameter.back();
    rep.max_diameter = *std::max_element(rep.diameter.begin(), rep.diameter.end());
    ProductDecay pd = product_decay(tr);
    rep.product = std::move(pd.series);
    rep.product_tail = pd.tail;
    rep.nussbaum = nussbaum_bound_check(tr, b);
    if (tr.model == Model::DI) {
        rep.vel_diameter = velocity_diameter(tr);
        rep.velocity_tail = velocity_decay(tr);
    }
    for (std::size_t s = 0; s < tr.sample_count(); ++s) {
        rep.sup_x = std::max(rep.sup_x, tr.x[s].cwiseAbs().maxCoeff());
        rep.sup_u = std::max(rep.sup_u, tr.u[s].cwiseAbs().maxCoeff());
        rep.sup_nussbaum = std::max(rep.sup_nussbaum, tr.nussbaum[s].cwiseAbs().maxCoeff());
    }
    if (tr.model == Model::DI) {
        rep.sup_v = 0.0;
        for (const auto& v : tr.v) rep.sup_v = std::max(rep.sup_v, v.cwiseAbs().maxCoeff());
    }
    return rep;
}

/// key = value lines, full double precision.
inline void write_report(const DiagnosticsReport& rep, std::ostream& out) {
    using detail::g17;
    out << "model = " << (rep.model == Model::SI ? "si" : "di") << "\n";
    out << "agents = " << rep.agent_count << "\n";
    out << "samples = " << rep.samples << "\n";
    out << "final_diameter = " << g17(rep.final_diameter) << "\n";
    out << "max_diameter = " << g17(rep.max_diameter) << "\n";
    out << "product_tail = " << g17(rep.product_tail) << "\n";
    if (rep.model == Model::DI) out << "velocity_tail = " << g17(rep.velocity_tail) << "\n";
    out << "nussbaum_pass = " << (rep.nussbaum.pass ? "true" : "false") << "\n";
    for (int i = 0; i < rep.agent_count; ++i) {
        out << "nussbaum_bound_" << (i + 1) << " = " << g17(rep.nussbaum.bound(i)) << "\n";
        out << "nussbaum_max_deviation_" << (i + 1) << " = " << g17(rep.nussbaum.max_deviation(i))
            << "\n";
        out << "nussbaum_margin_" << (i + 1) << " = " << g17(rep.nussbaum.margin(i)) << "\n";
    }
    out << "sup_x = " << g17(rep.sup_x) << "\n";
    if (rep.model == Model::DI) out << "sup_v = " << g17(rep.sup_v) << "\n";
    out << "sup_u = " << g17(rep.sup_u) << "\n";
    out << "sup_nussbaum = " << g17(rep.sup_nussbaum) << "\n";
}

/// Time series as CSV: t,diameter,product[,velocity_diameter].
inline void write_report_csv(const DiagnosticsReport& rep, std::ostream& out) {
    using detail::g17;
    out << "t,diameter,product";
    if (rep.model == Model::DI) out << ",velocity_diameter";
    out << "\n";
    for (std::size_t s = 0; s < rep.times.size(); ++s) {
        out << g17(rep.times[s]) << "," << g17(rep.diameter[s]) << "," << g17(rep.product[s]);
        if (rep.model == Model::DI) out << "," << g17(rep.vel_diameter[s]);
        out << "\n";
    }
}

}  // namespace nupi
