#pragma once

// Nonlinear-PI control laws with Nussbaum-type gain S*cos(S), and the
// closed-loop right-hand sides for single- and double-integrator agents.
//
// The integral terms of the controllers are carried as explicit ODE states
// (z1/z2 for SI, zbar1/zbar2 for DI), which makes the control law memoryless
// in the augmented state. The plant gains b_i live in a separate GainVector
// consumed only by the *_rhs functions, never by the control laws: the
// controller cannot see the control directions, by construction of the API.
//
// All functions here are pure; states are plain values.

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include <nupi/digraph.hpp>
#include <nupi/errors.hpp>

namespace nupi {

struct ControllerParams {
    double lambda1 = 0.4;
    double lambda2 = 0.2;
    double rho = 0.0;  // used by the DI laws only

    void require_si() const {
        if (!(lambda1 > 0.0)) throw ArgumentError("lambda1 must be > 0");
        if (!(lambda2 > 0.0)) throw ArgumentError("lambda2 must be > 0");
    }
    void require_di() const {
        require_si();
        if (!(rho > 0.0)) throw ArgumentError("rho must be > 0");
    }
};

/// Plant-side input gains b_i, unknown to the controller. Nonzero per agent.
class GainVector {
public:
    explicit GainVector(Eigen::VectorXd b) : b_(std::move(b)) {
        if (b_.size() == 0) throw ArgumentError("empty gain vector");
        for (Eigen::Index i = 0; i < b_.size(); ++i)
            if (b_(i) == 0.0 || !std::isfinite(b_(i)))
                throw ArgumentError("gains must be nonzero and finite");
    }

    int size() const { return static_cast<int>(b_.size()); }
    double operator[](int i) const { return b_(i); }
    const Eigen::VectorXd& values() const { return b_; }

private:
    Eigen::VectorXd b_;
};

/// SI augmented state: positions x plus the controller integral states
/// z1_i = integral of (x_i e_i)^2 and z2_i = integral of x_i e_i.
struct SIAugmentedState {
    Eigen::VectorXd x;
    Eigen::VectorXd z1;
    Eigen::VectorXd z2;

    static SIAugmentedState initial(Eigen::VectorXd x0) {
        const Eigen::Index n = x0.size();
        return {std::move(x0), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    }
    int size() const { return static_cast<int>(x.size()); }
};

/// DI augmented state: positions x, velocities v, plus
/// zbar1_i = lambda1 * integral of (q_i r_i)^2 + integral of v_i^2 and
/// zbar2_i = integral of q_i r_i, where q = v + rho x and r = L q.
struct DIAugmentedState {
    Eigen::VectorXd x;
    Eigen::VectorXd v;
    Eigen::VectorXd zbar1;
    Eigen::VectorXd zbar2;

    static DIAugmentedState initial(Eigen::VectorXd x0, Eigen::VectorXd v0) {
        if (x0.size() != v0.size()) throw DimensionError("x0 and v0 must have equal length");
        const Eigen::Index n = x0.size();
        return {std::move(x0), std::move(v0), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    }
    int size() const { return static_cast<int>(x.size()); }
};

/// Neighborhood disagreement e = L y, i.e. e_i = sum_k a_ik (y_i - y_k).
inline Eigen::VectorXd neighborhood_errors(const Laplacian& l, const Eigen::VectorXd& y) {
    if (l.size() != y.size()) throw DimensionError("Laplacian and state sizes differ");
    return l.matrix() * y;
}

// =============================================================================
// Single integrator
// =============================================================================

/// Nussbaum argument S_i = x_i^2/2 + lambda1 z1_i + lambda2 z2_i^2 / 2.
/// Nonnegative for every reachable state.
inline double si_nussbaum_value(double x_i, double z1_i, double z2_i,
                                const ControllerParams& p) {
    return 0.5 * x_i * x_i + p.lambda1 * z1_i + 0.5 * p.lambda2 * z2_i * z2_i;
}

/// u_i = S_i cos(S_i) e_i (lambda1 x_i e_i + lambda2 z2_i); z2_i carries the
/// integral term. Depends only on agent i's own states and e_i (row i of L).
inline double si_control(int i, const SIAugmentedState& st, const Eigen::VectorXd& e,
                         const ControllerParams& p) {
    if (i < 0 || i >= st.size()) throw ArgumentError("agent index out of range");
    if (e.size() != st.x.size()) throw DimensionError("error vector size mismatch");
    const double s = si_nussbaum_value(st.x(i), st.z1(i), st.z2(i), p);
    return s * std::cos(s) * e(i) * (p.lambda1 * st.x(i) * e(i) + p.lambda2 * st.z2(i));
}

/// Closed-loop derivative: xdot_i = b_i u_i, z1dot_i = (x_i e_i)^2,
/// z2dot_i = x_i e_i, with e = L x for the active topology.
inline SIAugmentedState si_rhs(const SIAugmentedState& st, const Laplacian& l,
                               const GainVector& b, const ControllerParams& p) {
    const int n = st.size();
    if (b.size() != n) throw DimensionError("gain vector size mismatch");
    const Eigen::VectorXd e = neighborhood_errors(l, st.x);
    SIAugmentedState d{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        const double xe = st.x(i) * e(i);
        d.x(i) = b[i] * si_control(i, st, e, p);
        d.z1(i) = xe * xe;
        d.z2(i) = xe;
    }
    return d;
}

// =============================================================================
// Double integrator
// =============================================================================

/// Nussbaum argument R_i = q_i^2/2 + rho x_i^2/2 + zbar1_i + lambda2 zbar2_i^2 / 2
/// with q_i = v_i + rho x_i. Nonnegative for every reachable state.
inline double di_nussbaum_value(const DIAugmentedState& st, int i, const ControllerParams& p) {
    if (i < 0 || i >= st.size()) throw ArgumentError("agent index out of range");
    const double q = st.v(i) + p.rho * st.x(i);
    return 0.5 * q * q + 0.5 * p.rho * st.x(i) * st.x(i) + st.zbar1(i) +
           0.5 * p.lambda2 * st.zbar2(i) * st.zbar2(i);
}

/// u_i = R_i cos(R_i) [(rho+1) v_i + r_i (lambda1 q_i r_i + lambda2 zbar2_i)]
/// with r_i = row i of L (v + rho x); zbar2_i carries the integral term.
inline double di_control(int i, const DIAugmentedState& st, const Laplacian& l,
                         const ControllerParams& p) {
    if (i < 0 || i >= st.size()) throw ArgumentError("agent index out of range");
    if (l.size() != st.size()) throw DimensionError("Laplacian and state sizes differ");
    const double q = st.v(i) + p.rho * st.x(i);
    const double r = l.matrix().row(i).dot(st.v + p.rho * st.x);
    const double big_r = di_nussbaum_value(st, i, p);
    return big_r * std::cos(big_r) *
           ((p.rho + 1.0) * st.v(i) + r * (p.lambda1 * q * r + p.lambda2 * st.zbar2(i)));
}

/// Closed-loop derivative: xdot = v, vdot_i = b_i u_i,
/// zbar1dot_i = lambda1 (q_i r_i)^2 + v_i^2, zbar2dot_i = q_i r_i.
inline DIAugmentedState di_rhs(const DIAugmentedState& st, const Laplacian& l,
                               const GainVector& b, const ControllerParams& p) {
    const int n = st.size();
    if (b.size() != n) throw DimensionError("gain vector size mismatch");
    if (l.size() != n) throw DimensionError("Laplacian and state sizes differ");
    const Eigen::VectorXd q = st.v + p.rho * st.x;
    const Eigen::VectorXd r = l.matrix() * q;
    DIAugmentedState d{st.v, Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        const double qr = q(i) * r(i);
        d.v(i) = b[i] * di_control(i, st, l, p);
        d.zbar1(i) = p.lambda1 * qr * qr + st.v(i) * st.v(i);
        d.zbar2(i) = qr;
    }
    return d;
}

}  // namespace nupi
