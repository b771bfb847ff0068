#include "metaikg/kg.hpp"

#include <algorithm>

namespace metaikg {

KnowledgeGraph build_graph(const std::vector<Triplet>& triplets, int32_t n_entities,
                           int32_t n_relations) {
    if (n_entities < 0 || n_entities >= (1 << 26))
        throw DataError("entity id space out of range (limit 2^26)");
    if (n_relations < 0 || n_relations >= (1 << 12))
        throw DataError("relation id space out of range (limit 2^12)");

    KnowledgeGraph g;
    g.n_entities = n_entities;
    g.n_relations = n_relations;
    g.edges = triplets;
    g.out_adj.resize(size_t(n_entities));
    g.in_adj.resize(size_t(n_entities));
    g.relation_counts.assign(size_t(n_relations), 0);
    g.fact_keys.reserve(triplets.size() * 2);

    std::vector<char> active(size_t(n_entities), 0);
    for (const Triplet& t : triplets) {
        if (t.head < 0 || t.head >= n_entities || t.tail < 0 || t.tail >= n_entities)
            throw DataError("triplet entity id out of range");
        if (t.rel < 0 || t.rel >= n_relations)
            throw DataError("triplet relation id out of range");
        g.out_adj[size_t(t.head)].emplace_back(t.rel, t.tail);
        g.in_adj[size_t(t.tail)].emplace_back(t.rel, t.head);
        g.relation_counts[size_t(t.rel)]++;
        g.fact_keys.insert(KnowledgeGraph::pack(t.head, t.rel, t.tail));
        active[size_t(t.head)] = 1;
        active[size_t(t.tail)] = 1;
    }
    for (int32_t e = 0; e < n_entities; ++e)
        if (active[size_t(e)]) g.active_entities.push_back(e);
    return g;
}

std::vector<int64_t> count_relations(const std::vector<Triplet>& triplets,
                                     int32_t n_relations) {
    std::vector<int64_t> counts(size_t(n_relations), 0);
    for (const Triplet& t : triplets) {
        if (t.rel < 0 || t.rel >= n_relations)
            throw DataError("triplet relation id out of range");
        counts[size_t(t.rel)]++;
    }
    return counts;
}

double compute_threshold(int64_t n_train_triplets, int64_t n_relations, double gamma) {
    if (n_relations <= 0) throw DataError("relation count must be positive");
    if (gamma < 0.0) throw ConfigError("gamma must be non-negative");
    return double(n_train_triplets) / double(n_relations) * gamma;
}

RelationSplit split_relations(const std::vector<int64_t>& counts, double threshold) {
    RelationSplit s;
    s.threshold = threshold;
    for (size_t r = 0; r < counts.size(); ++r) {
        if (double(counts[r]) <= threshold)
            s.few_shot.push_back(int32_t(r));
        else
            s.large_shot.push_back(int32_t(r));
    }
    return s;
}

}  // namespace metaikg
