#pragma once

// Weighted directed graphs over a fixed agent set, their Laplacians, and the
// connectivity structure used by consensus analysis: strongly connected
// components, basis bicomponents (source components of the condensation DAG),
// joint strong connectivity of a graph family, and left null eigenvectors of
// reduced Laplacians.
//
// Convention: the coupling a_ik = weights(i, k) belongs to the edge (k -> i),
// so row i of the weight matrix lists what agent i receives. Agent indices
// are 0-based in the API; graph files use 1-based labels.
//
// Graphs and Laplacians are immutable after construction; every function here
// is a pure function of its inputs and safe to call concurrently.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <nupi/detail/text.hpp>
#include <nupi/errors.hpp>

namespace nupi {

class DiGraph {
public:
    struct Edge {
        int from = 0;
        int to = 0;
        double weight = 1.0;
    };

    /// Edgeless graph on n agents.
    explicit DiGraph(int n) {
        if (n < 1) throw ArgumentError("agent count must be >= 1");
        weights_ = Eigen::MatrixXd::Zero(n, n);
    }

    /// Full coupling matrix; entry (i, k) is the weight of edge (k -> i).
    explicit DiGraph(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
        if (weights_.rows() != weights_.cols() || weights_.rows() < 1)
            throw ArgumentError("weight matrix must be square and nonempty");
        for (int i = 0; i < size(); ++i) {
            if (weights_(i, i) != 0.0) throw ArgumentError("self-loops are not supported");
            for (int k = 0; k < size(); ++k)
                if (!(weights_(i, k) >= 0.0) || !std::isfinite(weights_(i, k)))
                    throw ArgumentError("edge weights must be nonnegative and finite");
        }
    }

    static DiGraph from_edges(int n, const std::vector<Edge>& edges) {
        DiGraph g(n);
        for (const Edge& e : edges) {
            if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
                throw ArgumentError("edge endpoint out of range");
            if (e.from == e.to) throw ArgumentError("self-loops are not supported");
            if (!(e.weight > 0.0) || !std::isfinite(e.weight))
                throw ArgumentError("edge weight must be positive and finite");
            if (g.weights_(e.to, e.from) != 0.0) throw ArgumentError("duplicate edge");
            g.weights_(e.to, e.from) = e.weight;
        }
        return g;
    }

    int size() const { return static_cast<int>(weights_.rows()); }

    const Eigen::MatrixXd& weights() const { return weights_; }

    /// Coupling strength a_ik of edge (k -> i); 0 when the edge is absent.
    double coupling(int i, int k) const { return weights_(i, k); }

    bool has_edge(int from, int to) const { return weights_(to, from) > 0.0; }

    /// Weighted in-degree d_i.
    double in_degree(int i) const { return weights_.row(i).sum(); }

    int edge_count() const { return static_cast<int>((weights_.array() > 0.0).count()); }

    /// Edges ordered by (from, to).
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (int from = 0; from < size(); ++from)
            for (int to = 0; to < size(); ++to)
                if (weights_(to, from) > 0.0) out.push_back({from, to, weights_(to, from)});
        return out;
    }

private:
    Eigen::MatrixXd weights_;
};

// =============================================================================
// Laplacian
// =============================================================================

/// Laplacian matrix L = D - A of a weighted digraph. Construction checks the
/// defining sign pattern and that every row sums to zero (relative tolerance
/// 1e-12 on the largest entry).
class Laplacian {
public:
    explicit Laplacian(Eigen::MatrixXd m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() < 1)
            throw StructureError("Laplacian must be square and nonempty");
        const int n = size();
        const double scale = m_.cwiseAbs().maxCoeff();
        const double tol = 1e-12 * scale;
        for (int i = 0; i < n; ++i) {
            if (m_(i, i) < 0.0) throw StructureError("Laplacian diagonal must be nonnegative");
            for (int k = 0; k < n; ++k)
                if (k != i && m_(i, k) > 0.0)
                    throw StructureError("Laplacian off-diagonal entries must be nonpositive");
            if (std::abs(m_.row(i).sum()) > tol)
                throw StructureError("Laplacian row " + std::to_string(i) +
                                     " does not sum to zero");
        }
    }

    int size() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& matrix() const { return m_; }

private:
    Eigen::MatrixXd m_;
};

/// L = D - A with D = diag(row sums of the coupling matrix).
inline Laplacian laplacian(const DiGraph& g) {
    Eigen::MatrixXd m = -g.weights();
    for (int i = 0; i < g.size(); ++i) m(i, i) = g.in_degree(i);
    return Laplacian(std::move(m));
}

// =============================================================================
// Connectivity structure
// =============================================================================

/// Partition of the agents into maximal strongly connected sets. Each
/// component is sorted ascending and the list is ordered by smallest member.
/// Single-pass Tarjan with an explicit stack.
inline std::vector<std::vector<int>> strongly_connected_components(const DiGraph& g) {
    const int n = g.size();
    std::vector<std::vector<int>> succ(n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (g.coupling(i, k) > 0.0) succ[k].push_back(i);

    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int next_index = 0;

    struct Frame {
        int v;
        std::size_t child;
    };
    std::vector<Frame> call;

    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        call.push_back({root, 0});
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.child < succ[f.v].size()) {
                int w = succ[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                int v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
                if (low[v] == index[v]) {
                    std::vector<int> comp;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp.push_back(w);
                    } while (w != v);
                    std::sort(comp.begin(), comp.end());
                    comps.push_back(std::move(comp));
                }
            }
        }
    }
    std::sort(comps.begin(), comps.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return comps;
}

inline bool is_strongly_connected(const DiGraph& g) {
    return strongly_connected_components(g).size() == 1;
}

/// Strongly connected subgraph with no incoming edge from the rest of the
/// graph; equivalently a source component of the condensation DAG.
struct BasisBicomponent {
    std::vector<int> members;  // sorted, nonempty
};

/// The source components of the condensation. Every finite digraph has at
/// least one, so the result is never empty.
inline std::vector<BasisBicomponent> basis_bicomponents(const DiGraph& g) {
    const int n = g.size();
    const auto comps = strongly_connected_components(g);
    std::vector<int> comp_of(n, -1);
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (int v : comps[c]) comp_of[v] = static_cast<int>(c);

    std::vector<char> has_incoming(comps.size(), 0);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (g.coupling(i, k) > 0.0 && comp_of[k] != comp_of[i]) has_incoming[comp_of[i]] = 1;

    std::vector<BasisBicomponent> out;
    for (std::size_t c = 0; c < comps.size(); ++c)
        if (!has_incoming[c]) out.push_back({comps[c]});
    return out;
}

// =============================================================================
// Graph families
// =============================================================================

/// Union at the edge level; the weight of a shared edge is the entrywise
/// maximum, which preserves edge presence and is deterministic.
inline DiGraph union_graph(const std::vector<DiGraph>& gs) {
    if (gs.empty()) throw ArgumentError("union of an empty graph list");
    const int n = gs.front().size();
    Eigen::MatrixXd w = gs.front().weights();
    for (std::size_t p = 1; p < gs.size(); ++p) {
        if (gs[p].size() != n) throw DimensionError("union of graphs with different agent counts");
        w = w.cwiseMax(gs[p].weights());
    }
    return DiGraph(std::move(w));
}

/// True iff the union of every basis bicomponent subgraph of every input
/// graph is strongly connected and covers all agents.
inline bool has_jointly_strongly_connected_basis(const std::vector<DiGraph>& gs) {
    if (gs.empty()) throw ArgumentError("empty graph family");
    const int n = gs.front().size();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    std::vector<char> covered(n, 0);
    for (const DiGraph& g : gs) {
        if (g.size() != n) throw DimensionError("graph family with different agent counts");
        for (const BasisBicomponent& bc : basis_bicomponents(g)) {
            for (int i : bc.members) {
                covered[i] = 1;
                for (int k : bc.members) w(i, k) = std::max(w(i, k), g.coupling(i, k));
            }
        }
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end()) return false;
    return is_strongly_connected(DiGraph(std::move(w)));
}

// =============================================================================
// Reduced Laplacians and left eigenvectors
// =============================================================================

/// Deletes the rows and columns outside `members`. Valid only when `members`
/// is a basis bicomponent of the graph behind `l`: the slice then keeps zero
/// row sums because no coupling enters the component from outside.
inline Laplacian reduced_laplacian(const Laplacian& l, const std::vector<int>& members) {
    if (members.empty()) throw ArgumentError("empty member set");
    std::vector<int> idx = members;
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
        throw ArgumentError("duplicate member index");
    if (idx.front() < 0 || idx.back() >= l.size()) throw ArgumentError("member index out of range");

    const int r = static_cast<int>(idx.size());
    Eigen::MatrixXd m(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) m(a, b) = l.matrix()(idx[a], idx[b]);

    const double tol = 1e-12 * std::max(m.cwiseAbs().maxCoeff(), 0.0);
    for (int a = 0; a < r; ++a)
        if (std::abs(m.row(a).sum()) > tol)
            throw PreconditionError(
                "member set is not a basis bicomponent: sliced row sums do not vanish");
    return Laplacian(std::move(m));
}

/// Numerical rank with singular values thresholded at 1e-9 of the largest.
inline int laplacian_rank(const Laplacian& l) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(l.matrix());
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    if (smax <= 0.0) return 0;
    return static_cast<int>((sv.array() > 1e-9 * smax).count());
}

/// Normalized positive left null eigenvector of a strongly connected graph's
/// Laplacian: omega' L = 0, omega > 0, sum(omega) = 1.
struct LeftEigenvector {
    Eigen::VectorXd omega;
};

/// Direct dense solve: one equation of omega' L = 0 is replaced by the
/// normalization constraint sum(omega) = 1. Requires a simple zero eigenvalue
/// (rank r-1); anything else means the graph is not strongly connected.
inline LeftEigenvector left_null_vector(const Laplacian& l_r) {
    const int r = l_r.size();
    if (r == 1) return {Eigen::VectorXd::Ones(1)};
    if (laplacian_rank(l_r) != r - 1)
        throw StructureError("zero eigenvalue is not simple: graph is not strongly connected");

    Eigen::MatrixXd a = l_r.matrix().transpose();
    a.row(r - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(r);
    rhs(r - 1) = 1.0;
    Eigen::VectorXd omega = a.partialPivLu().solve(rhs);

    // A nonpositive entry after solving signals a violated precondition.
    if ((omega.array() <= 1e-12).any())
        throw StructureError("left eigenvector has nonpositive entries: graph is not strongly connected");
    omega /= omega.sum();

    const double scale = std::max(l_r.matrix().cwiseAbs().maxCoeff(), 1.0);
    const double residual = (omega.transpose() * l_r.matrix()).cwiseAbs().maxCoeff();
    if (residual > 1e-10 * scale)
        throw StructureError("left eigenvector residual exceeds tolerance");
    return {std::move(omega)};
}

// =============================================================================
// Graph files
// =============================================================================
//
// Plain-text edge list, 1-based agent labels:
//
//     # optional comments
//     n=<agent count>
//     <from> <to> <weight>
//     ...

inline DiGraph load_digraph(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ParseError(file.string() + ": cannot open");
    auto fail = [&](int line, const std::string& msg) -> ParseError {
        return ParseError(file.string() + ":" + std::to_string(line) + ": " + msg);
    };

    int n = -1;
    std::vector<DiGraph::Edge> edges;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = detail::strip_comment(raw);
        if (line.empty()) continue;
        if (n < 0) {
            auto eq = line.find('=');
            if (eq == std::string::npos || detail::trim(line.substr(0, eq)) != "n")
                throw fail(lineno, "expected header line 'n=<count>'");
            try {
                n = std::stoi(detail::trim(line.substr(eq + 1)));
            } catch (const std::exception&) {
                throw fail(lineno, "invalid agent count");
            }
            if (n < 1) throw fail(lineno, "agent count must be >= 1");
            continue;
        }
        auto tok = detail::tokens(line);
        if (tok.size() != 3) throw fail(lineno, "expected '<from> <to> <weight>'");
        int from = 0, to = 0;
        double w = 0.0;
        try {
            std::size_t used = 0;
            from = std::stoi(tok[0], &used);
            if (used != tok[0].size()) throw std::invalid_argument("");
            to = std::stoi(tok[1], &used);
            if (used != tok[1].size()) throw std::invalid_argument("");
            w = std::stod(tok[2], &used);
            if (used != tok[2].size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw fail(lineno, "malformed edge line");
        }
        if (from < 1 || from > n || to < 1 || to > n)
            throw fail(lineno, "agent label out of range 1.." + std::to_string(n));
        if (from == to) throw fail(lineno, "self-loops are not supported");
        if (!(w > 0.0) || !std::isfinite(w)) throw fail(lineno, "weight must be positive and finite");
        for (const auto& e : edges)
            if (e.from == from - 1 && e.to == to - 1) throw fail(lineno, "duplicate edge");
        edges.push_back({from - 1, to - 1, w});
    }
    if (n < 0) throw ParseError(file.string() + ": missing header line 'n=<count>'");
    return DiGraph::from_edges(n, edges);
}

inline void save_digraph(const DiGraph& g, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw ParseError(file.string() + ": cannot open for writing");
    out << "n=" << g.size() << "\n";
    for (const auto& e : g.edges())
        out << (e.from + 1) << " " << (e.to + 1) << " " << detail::g17(e.weight) << "\n";
}

}  // namespace nupi
