#include "metaikg/synthkg.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "metaikg/common.hpp"
#include "metaikg/kg_store.hpp"

namespace metaikg {

SynthSpec default_synth_spec() {
    SynthSpec s;
    int32_t rh0 = s.n_base_relations + s.n_noise_relations;
    for (int32_t i = 0; i < 4; ++i) s.rules.push_back({rh0 + i, 2 * i, 2 * i + 1});
    s.few_shot_budgets = {{rh0 + 2, 3}, {rh0 + 3, 5}};
    return s;
}

namespace {

struct RuleHead {
    int32_t x, z, witness;
};

void validate_spec(const SynthSpec& s) {
    if (s.n_entities_train < 2 || s.n_entities_test < 2)
        throw ConfigError("each entity set needs at least 2 entities");
    if (s.n_base_relations < 1) throw ConfigError("need at least one base relation");
    if (s.n_noise_relations < 0) throw ConfigError("noise relation count is negative");
    if (s.rules.empty()) throw ConfigError("need at least one rule");
    if (s.base_edge_density < 0) throw ConfigError("edge density is negative");
    int32_t n_body = s.n_base_relations + s.n_noise_relations;
    int32_t rh_lo = n_body, rh_hi = n_body + int32_t(s.rules.size());
    for (size_t i = 0; i < s.rules.size(); ++i) {
        const SynthRule& r = s.rules[i];
        if (r.head_rel != rh_lo + int32_t(i))
            throw ConfigError("rule heads must be consecutive ids after the body relations");
        if (r.body1 < 0 || r.body1 >= n_body || r.body2 < 0 || r.body2 >= n_body)
            throw ConfigError("rule body relations must be base or noise relations");
    }
    for (const auto& [rel, budget] : s.few_shot_budgets) {
        if (rel < rh_lo || rel >= rh_hi)
            throw ConfigError("few-shot budget names a relation that is not a rule head");
        if (budget < 1) throw ConfigError("few-shot budget must be at least 1");
    }
    auto frac_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (!frac_ok(s.train_target_fraction) || !frac_ok(s.valid_fraction) ||
        !frac_ok(s.test_holdout_fraction))
        throw ConfigError("fractions must lie in [0, 1]");
}

// Random base/noise edges over one entity set, ids offset into the shared
// space. Expected out-degree per (entity, relation) is the density.
std::vector<Triplet> sample_base_edges(const SynthSpec& s, int32_t n, int32_t offset,
                                       Rng& rng) {
    std::vector<Triplet> edges;
    double p = s.base_edge_density / double(n);
    int32_t n_body = s.n_base_relations + s.n_noise_relations;
    for (int32_t rel = 0; rel < n_body; ++rel)
        for (int32_t u = 0; u < n; ++u)
            for (int32_t v = 0; v < n; ++v) {
                if (u == v) continue;
                if (rng.uniform() < p) edges.push_back({offset + u, rel, offset + v});
            }
    return edges;
}

// All (x, z) with body1(x, y) and body2(y, z), x != z, deduplicated, with the
// first witness y in ascending adjacency order. Ascending (x, z) output.
std::vector<RuleHead> materialize_rule(const SynthRule& rule,
                                       const std::vector<std::vector<std::vector<int32_t>>>& out,
                                       int32_t n, int32_t offset) {
    std::map<std::pair<int32_t, int32_t>, int32_t> found;
    for (int32_t x = 0; x < n; ++x)
        for (int32_t y : out[size_t(rule.body1)][size_t(x)])
            for (int32_t z : out[size_t(rule.body2)][size_t(y)]) {
                if (z == x) continue;
                found.emplace(std::make_pair(x, z), y);
            }
    std::vector<RuleHead> heads;
    heads.reserve(found.size());
    for (const auto& [xz, y] : found)
        heads.push_back({offset + xz.first, offset + xz.second, offset + y});
    return heads;
}

std::vector<std::vector<std::vector<int32_t>>> adjacency(const std::vector<Triplet>& edges,
                                                         int32_t n_rel, int32_t n,
                                                         int32_t offset) {
    std::vector<std::vector<std::vector<int32_t>>> out(static_cast<size_t>(n_rel));
    for (auto& per_rel : out) per_rel.resize(static_cast<size_t>(n));
    for (const Triplet& e : edges)
        out[size_t(e.rel)][size_t(e.head - offset)].push_back(e.tail - offset);
    for (auto& per_rel : out)
        for (auto& lst : per_rel) std::sort(lst.begin(), lst.end());
    return out;
}

int64_t rounded_count(double fraction, size_t n) {
    return std::llround(fraction * double(n));
}

nlohmann::ordered_json heads_json(const std::vector<std::vector<RuleHead>>& by_rule,
                                  const SynthSpec& spec, const Vocabulary& entities,
                                  const Vocabulary& relations) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (size_t i = 0; i < by_rule.size(); ++i) {
        for (const RuleHead& h : by_rule[i]) {
            nlohmann::ordered_json row;
            row["triplet"] = {entities.name(h.x), relations.name(spec.rules[i].head_rel),
                              entities.name(h.z)};
            row["witness"] = entities.name(h.witness);
            arr.push_back(row);
        }
    }
    return arr;
}

}  // namespace

SynthDataset generate(const SynthSpec& spec) {
    validate_spec(spec);
    SynthDataset ds;
    ds.n_entities_train = spec.n_entities_train;

    char buf[32];
    for (int32_t i = 0; i < spec.n_entities_train; ++i) {
        std::snprintf(buf, sizeof buf, "t%04d", i);
        ds.entities.intern(buf);
    }
    for (int32_t i = 0; i < spec.n_entities_test; ++i) {
        std::snprintf(buf, sizeof buf, "u%04d", i);
        ds.entities.intern(buf);
    }
    for (int32_t i = 0; i < spec.n_base_relations; ++i) {
        std::snprintf(buf, sizeof buf, "base%d", i);
        ds.relations.intern(buf);
    }
    for (int32_t i = 0; i < spec.n_noise_relations; ++i) {
        std::snprintf(buf, sizeof buf, "noise%d", i);
        ds.relations.intern(buf);
    }
    for (size_t i = 0; i < spec.rules.size(); ++i) {
        std::snprintf(buf, sizeof buf, "rh%zu", i);
        ds.relations.intern(buf);
    }

    Rng rng(spec.seed);
    int32_t n_body = spec.n_base_relations + spec.n_noise_relations;
    int32_t test_offset = spec.n_entities_train;

    std::vector<Triplet> train_base =
        sample_base_edges(spec, spec.n_entities_train, 0, rng);
    std::vector<Triplet> test_base =
        sample_base_edges(spec, spec.n_entities_test, test_offset, rng);

    auto train_adj = adjacency(train_base, n_body, spec.n_entities_train, 0);
    auto test_adj = adjacency(test_base, n_body, spec.n_entities_test, test_offset);

    std::vector<std::vector<RuleHead>> train_heads, test_heads;
    for (const SynthRule& r : spec.rules) {
        train_heads.push_back(materialize_rule(r, train_adj, spec.n_entities_train, 0));
        test_heads.push_back(
            materialize_rule(r, test_adj, spec.n_entities_test, test_offset));
        if (train_heads.back().empty() || test_heads.back().empty())
            throw DataError("rule for relation '" +
                            ds.relations.name(r.head_rel) +
                            "' materialized no instances; raise density or entity count");
    }

    ds.train_graph_facts = train_base;
    ds.test_graph_facts = test_base;

    std::map<int32_t, int32_t> budgets(spec.few_shot_budgets.begin(),
                                       spec.few_shot_budgets.end());

    for (size_t i = 0; i < spec.rules.size(); ++i) {
        int32_t rel = spec.rules[i].head_rel;
        std::vector<RuleHead>& heads = train_heads[i];
        auto it = budgets.find(rel);
        if (it != budgets.end()) {
            size_t budget = size_t(it->second);
            if (heads.size() < budget)
                throw DataError("few-shot budget for relation '" + ds.relations.name(rel) +
                                "' exceeds its materialized instances");
            std::vector<size_t> pick = rng.sample_without_replacement(heads.size(), budget);
            std::sort(pick.begin(), pick.end());
            for (size_t k : pick) {
                Triplet t{heads[k].x, rel, heads[k].z};
                ds.train_graph_facts.push_back(t);
                ds.train_targets.push_back(t);
            }
            continue;
        }
        std::vector<size_t> order(heads.size());
        for (size_t k = 0; k < order.size(); ++k) order[k] = k;
        rng.shuffle(order);
        size_t n_valid = size_t(rounded_count(spec.valid_fraction, heads.size()));
        size_t n_rest = heads.size() - n_valid;
        size_t n_target = size_t(rounded_count(spec.train_target_fraction, n_rest));
        for (size_t k = 0; k < heads.size(); ++k) {
            Triplet t{heads[order[k]].x, rel, heads[order[k]].z};
            if (k < n_valid) {
                ds.valid_triplets.push_back(t);
                continue;
            }
            ds.train_graph_facts.push_back(t);
            if (k < n_valid + n_target) ds.train_targets.push_back(t);
        }
        if (n_rest == 0)
            throw DataError("validation split removed every train-side fact of relation '" +
                            ds.relations.name(rel) + "'");
    }

    for (size_t i = 0; i < spec.rules.size(); ++i) {
        int32_t rel = spec.rules[i].head_rel;
        std::vector<RuleHead>& heads = test_heads[i];
        std::vector<size_t> order(heads.size());
        for (size_t k = 0; k < order.size(); ++k) order[k] = k;
        rng.shuffle(order);
        size_t n_test = size_t(rounded_count(spec.test_holdout_fraction, heads.size()));
        if (n_test == 0) n_test = 1;  // always emit at least one query per rule
        for (size_t k = 0; k < heads.size(); ++k) {
            Triplet t{heads[order[k]].x, rel, heads[order[k]].z};
            if (k < n_test)
                ds.test_triplets.push_back(t);
            else
                ds.test_graph_facts.push_back(t);
        }
    }

    // The loader requires every test-side relation to already exist in the
    // train graph; rule heads are guaranteed above, body relations are not
    // at extreme densities.
    std::vector<int64_t> train_rel_counts(size_t(ds.relations.size()), 0);
    for (const Triplet& t : ds.train_graph_facts) ++train_rel_counts[size_t(t.rel)];
    std::set<int32_t> test_rels;
    for (const Triplet& t : ds.test_graph_facts) test_rels.insert(t.rel);
    for (const Triplet& t : ds.test_triplets) test_rels.insert(t.rel);
    for (int32_t rel : test_rels)
        if (train_rel_counts[size_t(rel)] == 0)
            throw DataError("relation '" + ds.relations.name(rel) +
                            "' occurs on the test side but has no train-side facts");

    nlohmann::ordered_json gt;
    gt["seed"] = spec.seed;
    gt["base_edge_density"] = spec.base_edge_density;
    nlohmann::ordered_json rules = nlohmann::ordered_json::array();
    for (const SynthRule& r : spec.rules) {
        nlohmann::ordered_json row;
        row["head"] = ds.relations.name(r.head_rel);
        row["body"] = {ds.relations.name(r.body1), ds.relations.name(r.body2)};
        rules.push_back(row);
    }
    gt["rules"] = rules;
    nlohmann::ordered_json budgets_json = nlohmann::ordered_json::array();
    for (const auto& [rel, budget] : spec.few_shot_budgets) {
        nlohmann::ordered_json row;
        row["relation"] = ds.relations.name(rel);
        row["budget"] = budget;
        budgets_json.push_back(row);
    }
    gt["few_shot_budgets"] = budgets_json;
    gt["train_heads"] = heads_json(train_heads, spec, ds.entities, ds.relations);
    gt["test_heads"] = heads_json(test_heads, spec, ds.entities, ds.relations);
    ds.ground_truth = std::move(gt);
    return ds;
}

void write_dataset(const SynthDataset& ds, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
    save_triplets(path("train.txt"), ds.train_graph_facts, ds.entities, ds.relations);
    save_triplets(path("train_triplets.txt"), ds.train_targets, ds.entities, ds.relations);
    save_triplets(path("valid.txt"), ds.valid_triplets, ds.entities, ds.relations);
    save_triplets(path("train_ind.txt"), ds.test_graph_facts, ds.entities, ds.relations);
    save_triplets(path("test_ind.txt"), ds.test_triplets, ds.entities, ds.relations);
    std::ofstream gt(path("ground_truth.json"), std::ios::binary);
    if (!gt) throw DataError("cannot write ground_truth.json in " + dir);
    gt << ds.ground_truth.dump(2) << "\n";
}

}  // namespace metaikg
