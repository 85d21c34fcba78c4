#pragma once

#include "radnet/graph.hpp"
#include "radnet/types.hpp"

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace radnet {

/// Disjoint sets with path compression and union by size.
class UnionFind {
public:
    explicit UnionFind(std::size_t n);

    std::size_t find(std::size_t x);
    bool unite(std::size_t a, std::size_t b);
    std::size_t size_of(std::size_t x) { return size_[find(x)]; }
    std::size_t components() const { return components_; }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
    std::size_t components_;
};

struct LinkageEntry {
    int track_a = 0; ///< track_a < track_b
    int track_b = 0;
    double sum = 0.0;
    long count = 0;

    double score() const { return sum / static_cast<double>(count); }
};

/// Pooled affinity evidence per unordered track pair.
class LinkageTable {
public:
    void add(int a, int b, double sum, long count);
    void add(const LinkageEntry& e) { add(e.track_a, e.track_b, e.sum, e.count); }
    void merge(const LinkageTable& other);

    std::optional<double> score(int a, int b) const;
    std::size_t size() const { return table_.size(); }
    std::vector<LinkageEntry> entries() const;

private:
    std::map<std::pair<int, int>, std::pair<double, long>> table_;
};

/// Mean affinity over all clue pairs spanning each pair of tracks in the
/// graph. Non-finite affinities count as missing evidence; pairs with no
/// evidence are omitted.
std::vector<LinkageEntry> track_linkage(const MultiModalGraph& graph, const Matrix& affinity);

/// Same, restricted to clue pairs where both clues carry modality `m`.
std::vector<LinkageEntry> track_linkage(const MultiModalGraph& graph, const Matrix& affinity, Modality m);

/// Combines pooled per-modality tables by taking, for each track pair, the
/// highest per-modality score. Clustering the result links two tracks as
/// soon as one modality links them, which is what clustering each modality
/// separately and then joining clusters through shared tracks amounts to.
LinkageTable strongest_modality(std::span<const LinkageTable> per_modality);

/// Evidence-weighted pooling (sums and counts add).
LinkageTable merge_linkages(std::span<const LinkageTable> tables);

struct ClusterAssignment {
    std::map<int, int> cluster_of; ///< track id -> cluster id
    int cluster_count = 0;
};

/// Links track pairs with score strictly above `threshold` and returns the
/// connected components. Cluster ids are contiguous and ordered by each
/// cluster's smallest track id.
ClusterAssignment cluster(const LinkageTable& linkage, double threshold, std::span<const int> track_ids);

} // namespace radnet
