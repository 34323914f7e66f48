#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "frfm/metrics.hpp"

namespace frfm {

enum class Linkage { single, complete, average };

Linkage linkage_from_string(const std::string& name);
std::string to_string(Linkage linkage);

// Node ids: leaves are 0..M-1; the k-th merge creates node M+k. left < right.
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
};

struct Dendrogram {
    std::size_t n_leaves = 0;
    std::vector<Merge> merges;               // M-1 entries, nondecreasing heights
    std::vector<std::size_t> leaf_order;     // permutation of 0..M-1, tree-consistent
};

// Agglomerative clustering with exact cluster-distance bookkeeping: direct
// min/max updates for single/complete, a pair-sum matrix for average so the
// mean is formed fresh at every comparison. Ties pick the lexicographically
// smallest (id, id) pair. leaf_order is the plain left-first traversal.
Dendrogram agglomerative_cluster(const DistanceMatrix& d, Linkage linkage = Linkage::average);

// Orients every subtree to minimize the total distance between consecutive
// leaves, exactly, via dynamic programming over (first leaf, last leaf)
// states. Equal-cost orderings resolve to the smallest (first, last) pair, so
// M = 2 keeps the input order.
std::vector<std::size_t> gw_leaf_order(const Dendrogram& dend, const DistanceMatrix& d);

// Simultaneous row/column permutation: out[i,j] = d[perm[i], perm[j]].
DistanceMatrix reorder(const DistanceMatrix& d, const std::vector<std::size_t>& perm);

}  // namespace frfm
