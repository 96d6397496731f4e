#pragma once

// Test-only oracles, deliberately independent of the library's algorithms:
// reachability by transitive closure instead of Tarjan, closed-loop
// right-hand sides as straight-line scalar transcriptions instead of the
// Laplacian matrix form, and small random graph generators.

#include <nupi/digraph.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracles {

// reach[u][v]: a directed path u -> v exists (reach[u][u] = true).
inline std::vector<std::vector<bool>> reachability(const nupi::DiGraph& g) {
    const int n = g.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int u = 0; u < n; ++u) reach[u][u] = true;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (g.coupling(v, u) > 0.0) reach[u][v] = true;  // edge u -> v
    for (int w = 0; w < n; ++w)
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                if (reach[u][w] && reach[w][v]) reach[u][v] = true;
    return reach;
}

inline bool strongly_connected(const nupi::DiGraph& g) {
    const auto reach = reachability(g);
    for (int u = 0; u < g.size(); ++u)
        for (int v = 0; v < g.size(); ++v)
            if (!reach[u][v]) return false;
    return true;
}

// Partition by mutual reachability, components sorted and ordered by smallest
// member (the same canonical form the library uses).
inline std::vector<std::vector<int>> sccs(const nupi::DiGraph& g) {
    const int n = g.size();
    const auto reach = reachability(g);
    std::vector<bool> assigned(n, false);
    std::vector<std::vector<int>> out;
    for (int u = 0; u < n; ++u) {
        if (assigned[u]) continue;
        std::vector<int> comp;
        for (int v = 0; v < n; ++v)
            if (reach[u][v] && reach[v][u]) {
                comp.push_back(v);
                assigned[v] = true;
            }
        out.push_back(std::move(comp));
    }
    return out;
}

// Source components: no edge enters from outside.
inline std::vector<std::vector<int>> basis_bicomponents(const nupi::DiGraph& g) {
    std::vector<std::vector<int>> out;
    for (const auto& comp : sccs(g)) {
        bool incoming = false;
        for (int i : comp)
            for (int k = 0; k < g.size() && !incoming; ++k) {
                bool inside = false;
                for (int m : comp) inside = inside || (m == k);
                if (!inside && g.coupling(i, k) > 0.0) incoming = true;
            }
        if (!incoming) out.push_back(comp);
    }
    return out;
}

inline bool jointly_strongly_connected_basis(const std::vector<nupi::DiGraph>& family) {
    const int n = family.front().size();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    std::vector<bool> covered(n, false);
    for (const auto& g : family)
        for (const auto& comp : oracles::basis_bicomponents(g))
            for (int i : comp) {
                covered[i] = true;
                for (int k : comp) w(i, k) = std::max(w(i, k), g.coupling(i, k));
            }
    for (int i = 0; i < n; ++i)
        if (!covered[i]) return false;
    return strongly_connected(nupi::DiGraph(w));
}

// -----------------------------------------------------------------------------
// Random graphs
// -----------------------------------------------------------------------------

inline nupi::DiGraph random_digraph(std::mt19937& rng, int n, double edge_prob) {
    std::uniform_real_distribution<double> coin(0.0, 1.0), weight(0.1, 2.0);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            if (i != k && coin(rng) < edge_prob) m(i, k) = weight(rng);
    return nupi::DiGraph(m);
}

// Random Hamiltonian cycle plus extra edges: strongly connected by
// construction.
inline nupi::DiGraph random_strongly_connected(std::mt19937& rng, int n, double extra_prob = 0.3) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    if (n > 1) {
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::uniform_real_distribution<double> coin(0.0, 1.0), weight(0.1, 2.0);
        for (int j = 0; j < n; ++j) m(perm[(j + 1) % n], perm[j]) = weight(rng);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (i != k && m(i, k) == 0.0 && coin(rng) < extra_prob) m(i, k) = weight(rng);
    }
    return nupi::DiGraph(m);
}

// -----------------------------------------------------------------------------
// Closed-loop transcriptions (scalar, no matrix algebra)
// -----------------------------------------------------------------------------

struct SIDerivative {
    std::vector<double> dx, dz1, dz2;
};

inline SIDerivative si_rhs(const std::vector<double>& x, const std::vector<double>& z1,
                           const std::vector<double>& z2,
                           const std::vector<std::vector<double>>& a,
                           const std::vector<double>& b, double lambda1, double lambda2) {
    const int n = static_cast<int>(x.size());
    SIDerivative d{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < n; ++i) {
        double e = 0.0;
        for (int k = 0; k < n; ++k) e += a[i][k] * (x[i] - x[k]);
        const double s = 0.5 * x[i] * x[i] + lambda1 * z1[i] + 0.5 * lambda2 * z2[i] * z2[i];
        const double u = s * std::cos(s) * e * (lambda1 * x[i] * e + lambda2 * z2[i]);
        d.dx[i] = b[i] * u;
        d.dz1[i] = (x[i] * e) * (x[i] * e);
        d.dz2[i] = x[i] * e;
    }
    return d;
}

struct DIDerivative {
    std::vector<double> dx, dv, dz1, dz2;
};

inline DIDerivative di_rhs(const std::vector<double>& x, const std::vector<double>& v,
                           const std::vector<double>& z1, const std::vector<double>& z2,
                           const std::vector<std::vector<double>>& a,
                           const std::vector<double>& b, double lambda1, double lambda2,
                           double rho) {
    const int n = static_cast<int>(x.size());
    DIDerivative d{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                   std::vector<double>(n)};
    for (int i = 0; i < n; ++i) {
        double zeta = 0.0, eta = 0.0;
        for (int k = 0; k < n; ++k) {
            zeta += a[i][k] * (v[i] - v[k]);
            eta += a[i][k] * (x[i] - x[k]);
        }
        const double q = v[i] + rho * x[i];
        const double r = zeta + rho * eta;
        const double big_r = 0.5 * q * q + 0.5 * rho * x[i] * x[i] + z1[i] +
                             0.5 * lambda2 * z2[i] * z2[i];
        const double u = big_r * std::cos(big_r) *
                         ((rho + 1.0) * v[i] + r * (lambda1 * q * r + lambda2 * z2[i]));
        d.dx[i] = v[i];
        d.dv[i] = b[i] * u;
        d.dz1[i] = lambda1 * (q * r) * (q * r) + v[i] * v[i];
        d.dz2[i] = q * r;
    }
    return d;
}

// Weight matrix rows as plain vectors, for feeding the transcriptions.
inline std::vector<std::vector<double>> weight_rows(const nupi::DiGraph& g) {
    std::vector<std::vector<double>> a(g.size(), std::vector<double>(g.size(), 0.0));
    for (int i = 0; i < g.size(); ++i)
        for (int k = 0; k < g.size(); ++k) a[i][k] = g.coupling(i, k);
    return a;
}

}  // namespace oracles
