#include "metaikg/subgraph.hpp"

#include <algorithm>

namespace metaikg {

namespace {

struct BfsResult {
    std::vector<int32_t> dist;     // dense, -1 = unreached within depth
    std::vector<int32_t> visited;  // ids in BFS order, seed first
};

// Depth-limited BFS, optionally skipping every copy of one exact edge.
BfsResult bfs_graph(const KnowledgeGraph& g, int32_t seed, int max_depth, bool outgoing,
                    const Triplet* skip) {
    BfsResult r;
    r.dist.assign(size_t(g.n_entities), -1);
    r.dist[size_t(seed)] = 0;
    r.visited.push_back(seed);
    size_t frontier_begin = 0;
    for (int depth = 1; depth <= max_depth; ++depth) {
        size_t frontier_end = r.visited.size();
        if (frontier_begin == frontier_end) break;
        for (size_t i = frontier_begin; i < frontier_end; ++i) {
            int32_t u = r.visited[i];
            const auto& adj = outgoing ? g.out_adj[size_t(u)] : g.in_adj[size_t(u)];
            for (auto [rel, v] : adj) {
                if (skip) {
                    int32_t eh = outgoing ? u : v;
                    int32_t et = outgoing ? v : u;
                    if (eh == skip->head && rel == skip->rel && et == skip->tail) continue;
                }
                if (r.dist[size_t(v)] == -1) {
                    r.dist[size_t(v)] = depth;
                    r.visited.push_back(v);
                }
            }
        }
        frontier_begin = frontier_end;
    }
    return r;
}

// Forward/backward BFS over the subgraph's own edges. -1 = unreached.
std::vector<int32_t> bfs_local(const EnclosingSubgraph& sg, int32_t start, bool forward) {
    std::vector<std::vector<int32_t>> adj(sg.nodes.size());
    for (const auto& e : sg.edges) {
        if (forward)
            adj[size_t(e.head)].push_back(e.tail);
        else
            adj[size_t(e.tail)].push_back(e.head);
    }
    std::vector<int32_t> dist(sg.nodes.size(), -1);
    std::vector<int32_t> queue{start};
    dist[size_t(start)] = 0;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        int32_t u = queue[qi];
        for (int32_t v : adj[size_t(u)])
            if (dist[size_t(v)] == -1) {
                dist[size_t(v)] = dist[size_t(u)] + 1;
                queue.push_back(v);
            }
    }
    return dist;
}

// Distances inside the subgraph, clamped to hop, unreachable = hop, targets
// forced to (0,1) / (1,0).
void relabel(EnclosingSubgraph& sg) {
    auto ds = bfs_local(sg, sg.target_head, true);
    auto dt = bfs_local(sg, sg.target_tail, false);
    sg.labels.resize(sg.nodes.size());
    for (size_t i = 0; i < sg.nodes.size(); ++i) {
        int32_t a = ds[i] < 0 ? sg.hop : std::min(ds[i], sg.hop);
        int32_t b = dt[i] < 0 ? sg.hop : std::min(dt[i], sg.hop);
        sg.labels[i] = {a, b};
    }
    sg.labels[size_t(sg.target_head)] = {0, 1};
    sg.labels[size_t(sg.target_tail)] = {1, 0};
}

void sort_edges(EnclosingSubgraph& sg) {
    std::sort(sg.edges.begin(), sg.edges.end(), [](const auto& a, const auto& b) {
        return std::tie(a.head, a.rel, a.tail) < std::tie(b.head, b.rel, b.tail);
    });
}

}  // namespace

int32_t EnclosingSubgraph::local_of(int32_t original_id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), original_id);
    if (it == nodes.end() || *it != original_id) return -1;
    return int32_t(it - nodes.begin());
}

std::unordered_map<int32_t, int32_t> directed_neighbors(const KnowledgeGraph& g,
                                                        int32_t seed, int hops,
                                                        bool outgoing) {
    if (seed < 0 || seed >= g.n_entities) throw DataError("unknown entity id");
    if (hops < 0) throw ConfigError("hops must be non-negative");
    BfsResult r = bfs_graph(g, seed, hops, outgoing, nullptr);
    std::unordered_map<int32_t, int32_t> out;
    for (int32_t v : r.visited)
        if (v != seed) out.emplace(v, r.dist[size_t(v)]);
    return out;
}

std::optional<EnclosingSubgraph> extract_enclosing_subgraph(const KnowledgeGraph& g,
                                                            const Triplet& target,
                                                            int hops,
                                                            DirectionMode mode) {
    if (hops < 1) throw ConfigError("hop count must be at least 1");
    if (target.head < 0 || target.head >= g.n_entities || target.tail < 0 ||
        target.tail >= g.n_entities)
        throw DataError("unknown entity id in target triplet");
    if (target.rel < 0 || target.rel >= g.n_relations)
        throw DataError("unknown relation id in target triplet");

    std::vector<int32_t> members;
    if (mode == DirectionMode::PathConsistent) {
        BfsResult from_head = bfs_graph(g, target.head, hops + 1, true, &target);
        if (from_head.dist[size_t(target.tail)] < 0) return std::nullopt;
        BfsResult to_tail = bfs_graph(g, target.tail, hops, false, &target);
        for (int32_t v : from_head.visited) {
            if (v == target.head || v == target.tail) continue;
            int32_t a = from_head.dist[size_t(v)];
            int32_t b = to_tail.dist[size_t(v)];
            if (a >= 1 && a <= hops && b >= 1 && b <= hops && a + b <= hops + 1)
                members.push_back(v);
        }
    } else {
        BfsResult to_head = bfs_graph(g, target.head, hops, false, &target);
        BfsResult from_tail = bfs_graph(g, target.tail, hops, true, &target);
        for (int32_t v : to_head.visited) {
            if (v == target.head || v == target.tail) continue;
            if (from_tail.dist[size_t(v)] >= 0) members.push_back(v);
        }
    }
    members.push_back(target.head);
    if (target.tail != target.head) members.push_back(target.tail);
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());

    EnclosingSubgraph sg;
    sg.hop = hops;
    sg.nodes = std::move(members);
    sg.target_rel = target.rel;
    sg.target_head = sg.local_of(target.head);
    sg.target_tail = sg.local_of(target.tail);

    std::unordered_map<int32_t, int32_t> local;
    local.reserve(sg.nodes.size() * 2);
    for (size_t i = 0; i < sg.nodes.size(); ++i) local.emplace(sg.nodes[i], int32_t(i));
    for (size_t li = 0; li < sg.nodes.size(); ++li) {
        int32_t u = sg.nodes[li];
        for (auto [rel, v] : g.out_adj[size_t(u)]) {
            if (u == target.head && rel == target.rel && v == target.tail) continue;
            auto it = local.find(v);
            if (it == local.end()) continue;
            sg.edges.push_back({int32_t(li), rel, it->second});
        }
    }
    sort_edges(sg);

    if (mode == DirectionMode::IntersectNeighborhoods) {
        // The intersection node set does not guarantee a surviving short walk.
        auto ds = bfs_local(sg, sg.target_head, true);
        int32_t d = ds[size_t(sg.target_tail)];
        if (d < 0 || d > hops + 1) return std::nullopt;
    }

    relabel(sg);
    return sg;
}

std::vector<double> label_features(const EnclosingSubgraph& sg, int hops) {
    if (hops != sg.hop) throw ConfigError("label dimension does not match extraction hop");
    const size_t w = 2 * (size_t(hops) + 1);
    std::vector<double> feats(sg.nodes.size() * w, 0.0);
    for (size_t i = 0; i < sg.nodes.size(); ++i) {
        feats[i * w + size_t(sg.labels[i].first)] = 1.0;
        feats[i * w + size_t(hops) + 1 + size_t(sg.labels[i].second)] = 1.0;
    }
    return feats;
}

EnclosingSubgraph prune_subgraph(const EnclosingSubgraph& sg, int max_nodes) {
    if (max_nodes < 2) throw ConfigError("max_nodes must be at least 2");
    if (int(sg.nodes.size()) <= max_nodes) return sg;

    std::vector<int32_t> order;  // local indices, non-targets
    order.reserve(sg.nodes.size());
    for (int32_t i = 0; i < int32_t(sg.nodes.size()); ++i)
        if (i != sg.target_head && i != sg.target_tail) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
        int32_t sa = sg.labels[size_t(a)].first + sg.labels[size_t(a)].second;
        int32_t sb = sg.labels[size_t(b)].first + sg.labels[size_t(b)].second;
        if (sa != sb) return sa < sb;
        if (sg.labels[size_t(a)].first != sg.labels[size_t(b)].first)
            return sg.labels[size_t(a)].first < sg.labels[size_t(b)].first;
        return sg.nodes[size_t(a)] < sg.nodes[size_t(b)];
    });

    size_t n_targets = sg.target_head == sg.target_tail ? 1 : 2;
    std::vector<char> keep(sg.nodes.size(), 0);
    keep[size_t(sg.target_head)] = 1;
    keep[size_t(sg.target_tail)] = 1;
    for (size_t i = 0; i < order.size() && i + n_targets < size_t(max_nodes); ++i)
        keep[size_t(order[i])] = 1;

    auto rebuild = [&](const std::vector<char>& kept) {
        EnclosingSubgraph out;
        out.hop = sg.hop;
        out.target_rel = sg.target_rel;
        std::vector<int32_t> remap(sg.nodes.size(), -1);
        for (size_t i = 0; i < sg.nodes.size(); ++i)
            if (kept[i]) {
                remap[i] = int32_t(out.nodes.size());
                out.nodes.push_back(sg.nodes[i]);  // ascending order preserved
            }
        for (const auto& e : sg.edges)
            if (remap[size_t(e.head)] >= 0 && remap[size_t(e.tail)] >= 0)
                out.edges.push_back({remap[size_t(e.head)], e.rel, remap[size_t(e.tail)]});
        sort_edges(out);
        out.target_head = remap[size_t(sg.target_head)];
        out.target_tail = remap[size_t(sg.target_tail)];
        relabel(out);
        return out;
    };

    EnclosingSubgraph pruned = rebuild(keep);
    auto ds = bfs_local(pruned, pruned.target_head, true);
    int32_t d = ds[size_t(pruned.target_tail)];
    if (d < 0 || d > sg.hop + 1) {
        // Re-insert one shortest head->tail path from the unpruned subgraph.
        std::vector<std::vector<std::pair<int32_t, int32_t>>> adj(sg.nodes.size());
        for (size_t ei = 0; ei < sg.edges.size(); ++ei)
            adj[size_t(sg.edges[ei].head)].emplace_back(sg.edges[ei].tail, int32_t(ei));
        std::vector<int32_t> parent(sg.nodes.size(), -2);
        std::vector<int32_t> queue{sg.target_head};
        parent[size_t(sg.target_head)] = -1;
        for (size_t qi = 0; qi < queue.size(); ++qi) {
            int32_t u = queue[qi];
            if (u == sg.target_tail && qi > 0) break;
            for (auto [v, ei] : adj[size_t(u)])
                if (parent[size_t(v)] == -2) {
                    parent[size_t(v)] = u;
                    queue.push_back(v);
                }
        }
        for (int32_t v = sg.target_tail; v >= 0; v = parent[size_t(v)]) keep[size_t(v)] = 1;
        pruned = rebuild(keep);
    }
    return pruned;
}

nlohmann::ordered_json subgraph_to_json(const EnclosingSubgraph& sg,
                                        const Vocabulary* entities,
                                        const Vocabulary* relations) {
    nlohmann::ordered_json j;
    j["hop"] = sg.hop;
    j["nodes"] = sg.nodes;
    if (entities) {
        std::vector<std::string> names;
        for (int32_t n : sg.nodes) names.push_back(entities->name(n));
        j["node_names"] = names;
    }
    nlohmann::ordered_json labels = nlohmann::ordered_json::array();
    for (auto [a, b] : sg.labels) labels.push_back({a, b});
    j["labels"] = labels;
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& e : sg.edges) {
        nlohmann::ordered_json row;
        row["head"] = e.head;
        row["tail"] = e.tail;
        if (relations)
            row["rel"] = relations->name(e.rel);
        else
            row["rel"] = e.rel;
        edges.push_back(row);
    }
    j["edges"] = edges;
    j["target"] = {{"head", sg.target_head},
                   {"rel", relations ? nlohmann::ordered_json(relations->name(sg.target_rel))
                                     : nlohmann::ordered_json(sg.target_rel)},
                   {"tail", sg.target_tail}};
    return j;
}

}  // namespace metaikg
