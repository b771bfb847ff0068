#pragma once

// Triplet store: interned vocabularies, a directed multigraph with per-node
// adjacency, exact fact membership, and the few/large-shot relation split.
//
// Ids are dense int32 in first-seen order. Fact membership uses an exact
// 64-bit packing (26 entity bits per side + 12 relation bits), so graphs are
// limited to < 2^26 entities and < 2^12 relations; build_graph enforces that.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "metaikg/common.hpp"

namespace metaikg {

class Vocabulary {
  public:
    int32_t intern(std::string_view name) {
        auto it = ids_.find(std::string(name));
        if (it != ids_.end()) return it->second;
        int32_t id = int32_t(names_.size());
        names_.emplace_back(name);
        ids_.emplace(names_.back(), id);
        return id;
    }

    std::optional<int32_t> find(std::string_view name) const {
        auto it = ids_.find(std::string(name));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(int32_t id) const { return names_.at(size_t(id)); }
    int32_t size() const { return int32_t(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

  private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int32_t> ids_;
};

struct Triplet {
    int32_t head = 0;
    int32_t rel = 0;
    int32_t tail = 0;
    bool operator==(const Triplet&) const = default;
};

struct KnowledgeGraph {
    int32_t n_entities = 0;   // vocabulary size, not just active entities
    int32_t n_relations = 0;
    std::vector<Triplet> edges;                                   // multiset, file order
    std::vector<std::vector<std::pair<int32_t, int32_t>>> out_adj;  // node -> (rel, tail)
    std::vector<std::vector<std::pair<int32_t, int32_t>>> in_adj;   // node -> (rel, head)
    std::vector<int64_t> relation_counts;                         // edge count per relation
    std::vector<int32_t> active_entities;                         // sorted, degree > 0
    std::unordered_set<uint64_t> fact_keys;

    static uint64_t pack(int32_t h, int32_t r, int32_t t) {
        return (uint64_t(uint32_t(h)) << 38) | (uint64_t(uint32_t(r)) << 26) |
               uint64_t(uint32_t(t));
    }

    bool has_fact(int32_t h, int32_t r, int32_t t) const {
        return fact_keys.count(pack(h, r, t)) != 0;
    }
    bool has_fact(const Triplet& t) const { return has_fact(t.head, t.rel, t.tail); }
};

// Builds adjacency and membership over a fixed id space. Throws DataError on
// out-of-range ids or if the id space exceeds the packing limits.
KnowledgeGraph build_graph(const std::vector<Triplet>& triplets, int32_t n_entities,
                           int32_t n_relations);

// Per-relation counts over an arbitrary triplet list.
std::vector<int64_t> count_relations(const std::vector<Triplet>& triplets,
                                     int32_t n_relations);

// K_T = n_T / n_R * gamma. n_T: training-target triplet count, n_R: relation
// count of the train graph.
double compute_threshold(int64_t n_train_triplets, int64_t n_relations, double gamma);

struct RelationSplit {
    double threshold = 0.0;
    std::vector<int32_t> few_shot;    // n_r <= threshold (boundary inclusive)
    std::vector<int32_t> large_shot;  // n_r >  threshold
};

RelationSplit split_relations(const std::vector<int64_t>& counts, double threshold);

}  // namespace metaikg
