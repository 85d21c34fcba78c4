#include "radnet/clusterer.hpp"

#include "radnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace radnet {

UnionFind::UnionFind(std::size_t n) : parent_(n), size_(n, 1), components_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
        const std::size_t next = parent_[x];
        parent_[x] = root;
        x = next;
    }
    return root;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --components_;
    return true;
}

void LinkageTable::add(int a, int b, double sum, long count) {
    if (a == b) throw InvalidInput("linkage between a track and itself");
    if (count < 1) throw InvalidInput("linkage evidence needs a positive count");
    if (a > b) std::swap(a, b);
    auto& slot = table_[{a, b}];
    slot.first += sum;
    slot.second += count;
}

void LinkageTable::merge(const LinkageTable& other) {
    for (const auto& [key, ev] : other.table_) add(key.first, key.second, ev.first, ev.second);
}

std::optional<double> LinkageTable::score(int a, int b) const {
    if (a > b) std::swap(a, b);
    auto it = table_.find({a, b});
    if (it == table_.end()) return std::nullopt;
    return it->second.first / static_cast<double>(it->second.second);
}

std::vector<LinkageEntry> LinkageTable::entries() const {
    std::vector<LinkageEntry> out;
    out.reserve(table_.size());
    for (const auto& [key, ev] : table_) out.push_back({key.first, key.second, ev.first, ev.second});
    return out;
}

namespace {

template <typename Keep>
std::vector<LinkageEntry> linkage_where(const MultiModalGraph& graph, const Matrix& affinity, Keep keep) {
    const auto n = graph.size();
    if (affinity.rows() != static_cast<Eigen::Index>(n) || affinity.cols() != static_cast<Eigen::Index>(n)) {
        throw InvalidInput("track_linkage: affinity does not match the graph");
    }
    const std::size_t slots = graph.track_count();
    std::vector<double> sum(slots * slots, 0.0);
    std::vector<long> count(slots * slots, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t a = graph.track_slot(i);
            const std::size_t b = graph.track_slot(j);
            if (a >= b || !keep(i, j)) continue;
            const double v = affinity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (!std::isfinite(v)) continue;
            sum[a * slots + b] += v;
            ++count[a * slots + b];
        }
    }
    std::vector<LinkageEntry> out;
    const auto& ids = graph.track_ids();
    for (std::size_t a = 0; a < slots; ++a) {
        for (std::size_t b = a + 1; b < slots; ++b) {
            if (count[a * slots + b] == 0) continue;
            int ta = ids[a];
            int tb = ids[b];
            if (ta > tb) std::swap(ta, tb);
            out.push_back({ta, tb, sum[a * slots + b], count[a * slots + b]});
        }
    }
    std::sort(out.begin(), out.end(), [](const LinkageEntry& x, const LinkageEntry& y) {
        return std::pair(x.track_a, x.track_b) < std::pair(y.track_a, y.track_b);
    });
    return out;
}

} // namespace

std::vector<LinkageEntry> track_linkage(const MultiModalGraph& graph, const Matrix& affinity) {
    return linkage_where(graph, affinity, [](std::size_t, std::size_t) { return true; });
}

std::vector<LinkageEntry> track_linkage(const MultiModalGraph& graph, const Matrix& affinity, Modality m) {
    return linkage_where(graph, affinity,
                         [&](std::size_t i, std::size_t j) { return graph.modality(i) == m && graph.modality(j) == m; });
}

LinkageTable strongest_modality(std::span<const LinkageTable> per_modality) {
    std::map<std::pair<int, int>, double> best;
    for (const auto& table : per_modality) {
        for (const auto& e : table.entries()) {
            auto [it, inserted] = best.emplace(std::pair(e.track_a, e.track_b), e.score());
            if (!inserted) it->second = std::max(it->second, e.score());
        }
    }
    LinkageTable out;
    for (const auto& [key, score] : best) out.add(key.first, key.second, score, 1);
    return out;
}

LinkageTable merge_linkages(std::span<const LinkageTable> tables) {
    LinkageTable out;
    for (const auto& t : tables) out.merge(t);
    return out;
}

ClusterAssignment cluster(const LinkageTable& linkage, double threshold, std::span<const int> track_ids) {
    std::vector<int> ids(track_ids.begin(), track_ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::unordered_map<int, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

    UnionFind uf(ids.size());
    for (const auto& e : linkage.entries()) {
        if (!(e.score() > threshold)) continue;
        auto a = index.find(e.track_a);
        auto b = index.find(e.track_b);
        if (a == index.end() || b == index.end()) continue;
        uf.unite(a->second, b->second);
    }

    ClusterAssignment out;
    std::unordered_map<std::size_t, int> label_of_root;
    // ids ascend, so the first member met is the smallest.
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto root = uf.find(i);
        auto [it, inserted] = label_of_root.emplace(root, out.cluster_count);
        if (inserted) ++out.cluster_count;
        out.cluster_of[ids[i]] = it->second;
    }
    return out;
}

} // namespace radnet
