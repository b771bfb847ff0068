#pragma once

// Directed enclosing subgraphs around a candidate triplet, with
// double-radius node labels.
//
// Node set (default mode): every node on at least one directed head->tail
// walk of length <= h+1, i.e. x with d(head->x) + d(x->tail) <= h+1 where
// distances are taken in the graph minus the target edge. The targets are
// always included. h+1 is therefore the maximum head->tail distance; a pair
// with no such walk has no subgraph at all.
//
// IntersectNeighborhoods mode keeps the other construction (h-hop incoming
// neighbours of the head intersected with h-hop outgoing neighbours of the
// tail); it exists for comparison and is reachable via
// --intersect-neighborhoods. It still requires a head->tail walk of length
// <= h+1 inside the induced subgraph, else no subgraph.
//
// Labels: per node (d_s, d_t) = (hops from head, hops to tail), measured
// inside the subgraph after target-edge removal, clamped to h; a side that
// is unreachable counts as h. The target head is forced to (0,1) and the
// target tail to (1,0) so the pair under prediction is unambiguous.

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "metaikg/kg.hpp"

namespace metaikg {

enum class DirectionMode { PathConsistent, IntersectNeighborhoods };

struct EnclosingSubgraph {
    int32_t hop = 0;
    std::vector<int32_t> nodes;  // original ids, ascending
    struct Edge {
        int32_t head = 0;  // local index
        int32_t rel = 0;
        int32_t tail = 0;  // local index
    };
    std::vector<Edge> edges;  // sorted by (head, rel, tail)
    std::vector<std::pair<int32_t, int32_t>> labels;  // (d_s, d_t) per node
    int32_t target_head = 0;  // local index
    int32_t target_tail = 0;  // local index
    int32_t target_rel = 0;

    int32_t local_of(int32_t original_id) const;  // -1 if absent
};

// Min-distance map from `seed` following outgoing (or incoming) edges, up to
// `hops` steps. The seed itself is excluded.
std::unordered_map<int32_t, int32_t> directed_neighbors(const KnowledgeGraph& g,
                                                        int32_t seed, int hops,
                                                        bool outgoing);

// The target edge (exact head/rel/tail matches, all copies) is removed
// before any distance computation and never appears in the result.
// Returns nullopt when no head->tail walk of length <= hops+1 survives.
std::optional<EnclosingSubgraph> extract_enclosing_subgraph(
    const KnowledgeGraph& g, const Triplet& target, int hops,
    DirectionMode mode = DirectionMode::PathConsistent);

// One-hot(d_s) concat one-hot(d_t) per node; row-major N x 2(hops+1).
std::vector<double> label_features(const EnclosingSubgraph& sg, int hops);

// Keeps the targets plus the nodes with smallest d_s + d_t (ties: smaller
// d_s, then smaller original id) until max_nodes remain. If that cuts every
// short head->tail path, the nodes of one shortest path are re-inserted, so
// the result can exceed max_nodes by the path length. Edges are re-induced
// and labels recomputed inside the pruned subgraph.
EnclosingSubgraph prune_subgraph(const EnclosingSubgraph& sg, int max_nodes);

nlohmann::ordered_json subgraph_to_json(const EnclosingSubgraph& sg,
                                        const Vocabulary* entities = nullptr,
                                        const Vocabulary* relations = nullptr);

}  // namespace metaikg
