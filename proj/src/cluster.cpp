#include "frfm/cluster.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>

namespace frfm {

namespace {

// Canonical read through the upper triangle so sub-tolerance asymmetry in the
// input can never influence the result.
double dist_at(const Matrix& d, std::size_t i, std::size_t j) {
    return i <= j ? d(i, j) : d(j, i);
}

}  // namespace

Linkage linkage_from_string(const std::string& name) {
    if (name == "single") return Linkage::single;
    if (name == "complete") return Linkage::complete;
    if (name == "average") return Linkage::average;
    throw argument_error("linkage_from_string: unknown linkage '" + name +
                         "' (expected single, complete or average)");
}

std::string to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
    }
    return "average";
}

Dendrogram agglomerative_cluster(const DistanceMatrix& d, Linkage linkage) {
    d.check();
    const std::size_t m = d.size();
    if (m < 2) throw argument_error("agglomerative_cluster: need at least 2 points");

    const std::size_t n_nodes = 2 * m - 1;
    // S holds the linkage bookkeeping between nodes: the distance itself for
    // single/complete, the sum over member pairs for average. The average is
    // formed fresh at each comparison, never incrementally updated.
    Matrix S(n_nodes, n_nodes);
    std::vector<std::size_t> size(n_nodes, 1);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) S(i, j) = dist_at(d.d, i, j);

    std::vector<std::size_t> active(m);
    for (std::size_t i = 0; i < m; ++i) active[i] = i;

    Dendrogram out;
    out.n_leaves = m;
    out.merges.reserve(m - 1);

    for (std::size_t step = 0; step + 1 < m; ++step) {
        // Scan in ascending (id, id) order with strict <, so ties land on the
        // lexicographically smallest pair.
        std::size_t bi = 0, bj = 0;
        double best = 0.0;
        bool found = false;
        for (std::size_t p = 0; p < active.size(); ++p) {
            for (std::size_t q = p + 1; q < active.size(); ++q) {
                const std::size_t a = active[p];
                const std::size_t b = active[q];
                double v = S(a, b);
                if (linkage == Linkage::average)
                    v /= static_cast<double>(size[a]) * static_cast<double>(size[b]);
                if (!found || v < best) {
                    found = true;
                    best = v;
                    bi = a;
                    bj = b;
                }
            }
        }

        const std::size_t id = m + step;
        out.merges.push_back(Merge{bi, bj, best});
        size[id] = size[bi] + size[bj];
        for (std::size_t c : active) {
            if (c == bi || c == bj) continue;
            double v;
            switch (linkage) {
                case Linkage::single: v = std::min(S(bi, c), S(bj, c)); break;
                case Linkage::complete: v = std::max(S(bi, c), S(bj, c)); break;
                default: v = S(bi, c) + S(bj, c); break;
            }
            S(id, c) = v;
            S(c, id) = v;
        }
        active.erase(std::remove_if(active.begin(), active.end(),
                                    [&](std::size_t c) { return c == bi || c == bj; }),
                     active.end());
        active.push_back(id);  // new id is the largest, list stays ascending
    }

    // Left-first traversal from the root.
    out.leaf_order.reserve(m);
    std::vector<std::size_t> stack{n_nodes - 1};
    while (!stack.empty()) {
        const std::size_t node = stack.back();
        stack.pop_back();
        if (node < m) {
            out.leaf_order.push_back(node);
            continue;
        }
        const Merge& mg = out.merges[node - m];
        stack.push_back(mg.right);
        stack.push_back(mg.left);
    }
    return out;
}

namespace {

struct GwState {
    double cost = 0.0;
    std::size_t child_first = 0;  // node id emitted first
    std::size_t child_second = 0;
    std::pair<std::size_t, std::size_t> ends_first;   // (first, last) state of child_first
    std::pair<std::size_t, std::size_t> ends_second;
};

using GwTable = std::map<std::pair<std::size_t, std::size_t>, GwState>;

void gw_emit(const std::vector<GwTable>& tables, std::size_t n_leaves, std::size_t node,
             std::pair<std::size_t, std::size_t> ends, std::vector<std::size_t>& out) {
    if (node < n_leaves) {
        out.push_back(node);
        return;
    }
    const GwState& st = tables[node].at(ends);
    gw_emit(tables, n_leaves, st.child_first, st.ends_first, out);
    gw_emit(tables, n_leaves, st.child_second, st.ends_second, out);
}

}  // namespace

std::vector<std::size_t> gw_leaf_order(const Dendrogram& dend, const DistanceMatrix& d) {
    const std::size_t m = dend.n_leaves;
    if (d.size() != m) throw argument_error("gw_leaf_order: distance matrix size does not match leaves");
    if (m == 0) throw argument_error("gw_leaf_order: dendrogram has no leaves");
    if (dend.merges.size() + 1 != m)
        throw argument_error("gw_leaf_order: merge count does not match leaf count");
    if (m == 1) return {0};

    // Exact minimization over every subtree orientation: each node keeps the
    // cheapest arrangement per (first leaf, last leaf) endpoint pair.
    const std::size_t n_nodes = 2 * m - 1;
    std::vector<GwTable> tables(n_nodes);
    for (std::size_t leaf = 0; leaf < m; ++leaf)
        tables[leaf][{leaf, leaf}] = GwState{0.0, leaf, leaf, {leaf, leaf}, {leaf, leaf}};

    for (std::size_t k = 0; k < dend.merges.size(); ++k) {
        const Merge& mg = dend.merges[k];
        const std::size_t node = m + k;
        if (mg.left >= node || mg.right >= node)
            throw argument_error("gw_leaf_order: merge references an undefined node");
        GwTable& table = tables[node];
        const std::size_t order[2][2] = {{mg.left, mg.right}, {mg.right, mg.left}};
        for (const auto& pair : order) {
            for (const auto& [ea, sa] : tables[pair[0]]) {
                for (const auto& [eb, sb] : tables[pair[1]]) {
                    const double cost = sa.cost + dist_at(d.d, ea.second, eb.first) + sb.cost;
                    const std::pair<std::size_t, std::size_t> key{ea.first, eb.second};
                    auto it = table.find(key);
                    if (it == table.end() || cost < it->second.cost)
                        table[key] = GwState{cost, pair[0], pair[1], ea, eb};
                }
            }
        }
    }

    const GwTable& root = tables[n_nodes - 1];
    auto best = root.begin();
    for (auto it = std::next(root.begin()); it != root.end(); ++it)
        if (it->second.cost < best->second.cost) best = it;

    std::vector<std::size_t> out;
    out.reserve(m);
    gw_emit(tables, m, n_nodes - 1, best->first, out);
    return out;
}

DistanceMatrix reorder(const DistanceMatrix& d, const std::vector<std::size_t>& perm) {
    const std::size_t m = d.size();
    if (perm.size() != m) throw argument_error("reorder: permutation size does not match matrix");
    std::vector<std::uint8_t> seen(m, 0);
    for (std::size_t p : perm) {
        if (p >= m || seen[p]) throw argument_error("reorder: not a valid permutation");
        seen[p] = 1;
    }
    DistanceMatrix out;
    out.d = Matrix(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) out.d(i, j) = d.d(perm[i], perm[j]);
    if (!d.labels.empty()) {
        out.labels.resize(m);
        for (std::size_t i = 0; i < m; ++i) out.labels[i] = d.labels[perm[i]];
    }
    return out;
}

}  // namespace frfm
