#include "radnet/metrics.hpp"

#include "radnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace radnet {

namespace {

struct Contingency {
    std::map<int, std::map<int, long>> joint; ///< pred label -> truth label -> count
    std::map<int, long> pred_sizes;
    std::map<int, long> truth_sizes;
    long total = 0;
};

Contingency contingency(const Partition& pred, const Partition& truth) {
    if (pred.size() != truth.size()) throw InvalidInput("partitions cover different item sets");
    if (pred.empty()) throw InvalidInput("partitions are empty");
    Contingency c;
    auto it = truth.begin();
    for (const auto& [item, label] : pred) {
        if (it->first != item) throw InvalidInput("partitions cover different item sets");
        ++c.joint[label][it->second];
        ++c.pred_sizes[label];
        ++c.truth_sizes[it->second];
        ++c.total;
        ++it;
    }
    return c;
}

double entropy(const std::map<int, long>& sizes, long total) {
    double h = 0.0;
    for (const auto& [label, n] : sizes) {
        const double p = static_cast<double>(n) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

} // namespace

double wcp(const Partition& pred, const Partition& truth) {
    const auto c = contingency(pred, truth);
    long hits = 0;
    for (const auto& [label, row] : c.joint) {
        long best = 0;
        for (const auto& [t, n] : row) best = std::max(best, n);
        hits += best;
    }
    return static_cast<double>(hits) / static_cast<double>(c.total);
}

double nmi(const Partition& pred, const Partition& truth) {
    const auto c = contingency(pred, truth);
    const double hp = entropy(c.pred_sizes, c.total);
    const double ht = entropy(c.truth_sizes, c.total);
    if (hp == 0.0 && ht == 0.0) return 1.0;
    if (hp == 0.0 || ht == 0.0) return 0.0;
    const double n = static_cast<double>(c.total);
    double mi = 0.0;
    for (const auto& [k, row] : c.joint) {
        const double nk = static_cast<double>(c.pred_sizes.at(k));
        for (const auto& [j, count] : row) {
            const double nkj = static_cast<double>(count);
            const double nj = static_cast<double>(c.truth_sizes.at(j));
            mi += (nkj / n) * std::log(n * nkj / (nk * nj));
        }
    }
    return std::clamp(mi / ((hp + ht) / 2.0), 0.0, 1.0);
}

CharacterScores character_pr(const Partition& pred, const Partition& truth) {
    const auto c = contingency(pred, truth);
    // character -> (tracks in assigned clusters, of which truly this character)
    std::map<int, std::pair<long, long>> assigned;
    for (const auto& [cluster, row] : c.joint) {
        int best_label = 0;
        long best = -1;
        for (const auto& [label, n] : row) {
            if (n > best) { // map order gives the lower id on ties
                best = n;
                best_label = label;
            }
        }
        auto& slot = assigned[best_label];
        slot.first += c.pred_sizes.at(cluster);
        slot.second += best;
    }
    double precision = 0.0;
    double recall = 0.0;
    for (const auto& [label, size] : c.truth_sizes) {
        auto it = assigned.find(label);
        if (it == assigned.end()) continue;
        precision += static_cast<double>(it->second.second) / static_cast<double>(it->second.first);
        recall += static_cast<double>(it->second.second) / static_cast<double>(size);
    }
    CharacterScores s;
    s.precision = precision / static_cast<double>(assigned.size());
    s.recall = recall / static_cast<double>(c.truth_sizes.size());
    return s;
}

double cf(double cp, double cr) {
    if (cp + cr <= 0.0) return 0.0;
    return 2.0 * cp * cr / (cp + cr);
}

MetricReport evaluate(const Partition& pred, const Partition& truth) {
    MetricReport r;
    r.wcp = wcp(pred, truth);
    r.nmi = nmi(pred, truth);
    const auto s = character_pr(pred, truth);
    r.cp = s.precision;
    r.cr = s.recall;
    r.cf = cf(r.cp, r.cr);
    return r;
}

} // namespace radnet
