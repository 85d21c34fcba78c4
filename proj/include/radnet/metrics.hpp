#pragma once

#include <map>

namespace radnet {

/// item id -> label (cluster id or ground-truth identity).
using Partition = std::map<int, int>;

/// Weighted cluster purity: (1/N) sum_k max_j |w_k n c_j|.
double wcp(const Partition& pred, const Partition& truth);

/// I(pred; truth) / ((H(pred) + H(truth)) / 2), natural log.
/// 1 when both entropies vanish, 0 when exactly one does.
double nmi(const Partition& pred, const Partition& truth);

struct CharacterScores {
    double precision = 0.0;
    double recall = 0.0;
};

/// Character precision and recall. Each predicted cluster is assigned its
/// majority character (ties to the lower id). Per character, precision is the
/// fraction of tracks in its assigned clusters that truly belong to it, and
/// recall the fraction of its tracks inside those clusters. Both are averaged
/// over characters with equal weight; characters that receive no cluster
/// contribute recall 0 and are left out of the precision mean.
CharacterScores character_pr(const Partition& pred, const Partition& truth);

/// Harmonic mean of CP and CR; 0 when both are 0.
double cf(double cp, double cr);

struct MetricReport {
    double wcp = 0.0;
    double nmi = 0.0;
    double cp = 0.0;
    double cr = 0.0;
    double cf = 0.0;
};

MetricReport evaluate(const Partition& pred, const Partition& truth);

} // namespace radnet
