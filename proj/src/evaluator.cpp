#include "metaikg/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "metaikg/common.hpp"

namespace metaikg {

int64_t pessimistic_rank(const RankedQuery& q) {
    int64_t rank = 1;
    for (double s : q.negatives)
        if (s >= q.positive) ++rank;
    return rank;
}

int hits_at_k(const RankedQuery& q, int k) {
    if (k < 1) throw ConfigError("k must be at least 1");
    return pessimistic_rank(q) <= int64_t(k) ? 1 : 0;
}

double average_precision(const std::vector<double>& pos_scores,
                         const std::vector<double>& neg_scores) {
    if (pos_scores.empty()) throw ConfigError("average precision needs at least one positive");
    // (score, is_positive); ties put negatives first.
    std::vector<std::pair<double, int>> items;
    items.reserve(pos_scores.size() + neg_scores.size());
    for (double s : neg_scores) items.emplace_back(s, 0);
    for (double s : pos_scores) items.emplace_back(s, 1);
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    double sum = 0.0;
    int64_t seen_pos = 0;
    for (size_t i = 0; i < items.size(); ++i) {
        if (items[i].second == 1) {
            ++seen_pos;
            sum += double(seen_pos) / double(i + 1);
        }
    }
    return sum / double(pos_scores.size());
}

double auc_pr(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw ConfigError("auc_pr needs at least one score pair");
    std::vector<double> pos, neg;
    pos.reserve(pairs.size());
    neg.reserve(pairs.size());
    for (const auto& [p, n] : pairs) {
        pos.push_back(p);
        neg.push_back(n);
    }
    return average_precision(pos, neg);
}

EvalNegativeSampler::EvalNegativeSampler(const KnowledgeGraph& g,
                                         const std::vector<Triplet>& known_true,
                                         bool filtered, uint64_t seed)
    : g_(&g), filtered_(filtered), seed_(seed) {
    extra_true_.reserve(known_true.size() * 2);
    for (const Triplet& t : known_true)
        extra_true_.insert(KnowledgeGraph::pack(t.head, t.rel, t.tail));
}

std::optional<std::vector<Triplet>> EvalNegativeSampler::sample(const Triplet& t,
                                                                bool corrupt_head,
                                                                int n) const {
    if (n < 1) throw ConfigError("negative count must be at least 1");
    Rng rng(hash_mix({seed_, uint64_t(uint32_t(t.head)), uint64_t(uint32_t(t.rel)),
                      uint64_t(uint32_t(t.tail)), corrupt_head ? 1ull : 0ull}));
    std::vector<int32_t> pool = g_->active_entities;
    std::vector<Triplet> out;
    out.reserve(size_t(n));
    int32_t original = corrupt_head ? t.head : t.tail;
    for (size_t i = 0; i < pool.size() && out.size() < size_t(n); ++i) {
        size_t j = i + size_t(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
        int32_t e = pool[i];
        if (e == original) continue;
        Triplet c = corrupt_head ? Triplet{e, t.rel, t.tail} : Triplet{t.head, t.rel, e};
        if (filtered_) {
            if (g_->has_fact(c)) continue;
            if (extra_true_.count(KnowledgeGraph::pack(c.head, c.rel, c.tail))) continue;
        }
        out.push_back(c);
    }
    if (out.size() < size_t(n)) return std::nullopt;
    return out;
}

bool EvalNegativeSampler::auc_side_is_head(const Triplet& t) const {
    Rng rng(hash_mix({seed_, uint64_t(uint32_t(t.head)), uint64_t(uint32_t(t.rel)),
                      uint64_t(uint32_t(t.tail)), 2ull}));
    return rng.coin();
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct TripletOutcome {
    int status = 0;  // 0 used, 1 positive has no subgraph, 2 insufficient negatives
    double pos_score = kNegInf;
    int64_t rank_head = 0, rank_tail = 0;
    int hit_head = 0, hit_tail = 0;
    double auc_neg = kNegInf;
};

std::string num_str(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    return nlohmann::json(v).dump();
}

}  // namespace

EvalReport evaluate(const ModelParams& p, const KnowledgeGraph& test_graph,
                    const std::vector<Triplet>& test_triplets,
                    const std::vector<int64_t>& train_target_counts, double k_t,
                    const EvalConfig& cfg) {
    if (test_triplets.empty()) throw DataError("test triplet list is empty");
    if (cfg.n_negatives < 1) throw ConfigError("n_negatives must be at least 1");
    if (cfg.h != p.shape.h)
        throw ConfigError("evaluation hop count does not match the model's label range");

    EvalNegativeSampler sampler(test_graph, test_triplets, cfg.filtered, cfg.seed);
    std::vector<TripletOutcome> slots(test_triplets.size());

    par::parallel_for(test_triplets.size(), [&](size_t i) {
        const Triplet& t = test_triplets[i];
        TripletOutcome& out = slots[i];
        auto sg = extract_enclosing_subgraph(test_graph, t, cfg.h, cfg.direction);
        if (!sg) {
            out.status = 1;
            return;
        }
        auto heads = sampler.sample(t, true, cfg.n_negatives);
        auto tails = sampler.sample(t, false, cfg.n_negatives);
        if (!heads || !tails) {
            out.status = 2;
            return;
        }
        out.pos_score = score_subgraph(p, prune_subgraph(std::move(*sg), cfg.max_nodes));

        auto score_all = [&](const std::vector<Triplet>& cands) {
            std::vector<double> scores(cands.size(), kNegInf);
            for (size_t c = 0; c < cands.size(); ++c) {
                auto nsg = extract_enclosing_subgraph(test_graph, cands[c], cfg.h,
                                                      cfg.direction);
                if (nsg)
                    scores[c] =
                        score_subgraph(p, prune_subgraph(std::move(*nsg), cfg.max_nodes));
            }
            return scores;
        };
        std::vector<double> head_scores = score_all(*heads);
        std::vector<double> tail_scores = score_all(*tails);

        RankedQuery qh{out.pos_score, head_scores};
        RankedQuery qt{out.pos_score, tail_scores};
        out.rank_head = pessimistic_rank(qh);
        out.rank_tail = pessimistic_rank(qt);
        out.hit_head = hits_at_k(qh, cfg.hits_k);
        out.hit_tail = hits_at_k(qt, cfg.hits_k);
        out.auc_neg = sampler.auc_side_is_head(t) ? head_scores[0] : tail_scores[0];
    });

    EvalReport r;
    r.hits_k = cfg.hits_k;
    r.n_test_total = int64_t(test_triplets.size());

    auto count_of = [&](int32_t rel) -> int64_t {
        if (rel < 0 || size_t(rel) >= train_target_counts.size()) return 0;
        return train_target_counts[size_t(rel)];
    };

    std::vector<double> ap_pos, ap_neg;
    int64_t hit_sum = 0;
    std::vector<int64_t> rel_used, rel_hits;
    for (size_t i = 0; i < slots.size(); ++i) {
        const TripletOutcome& o = slots[i];
        if (o.status == 1) {
            ++r.skipped_no_subgraph;
            continue;
        }
        if (o.status == 2) {
            ++r.skipped_insufficient_negatives;
            continue;
        }
        ++r.n_test_used;
        hit_sum += o.hit_head + o.hit_tail;
        ap_pos.push_back(o.pos_score);
        ap_neg.push_back(o.auc_neg);
        int32_t rel = test_triplets[i].rel;
        if (size_t(rel) >= rel_used.size()) {
            rel_used.resize(size_t(rel) + 1, 0);
            rel_hits.resize(size_t(rel) + 1, 0);
        }
        ++rel_used[size_t(rel)];
        rel_hits[size_t(rel)] += o.hit_head + o.hit_tail;
        if (cfg.keep_query_rows)
            r.query_rows.push_back({test_triplets[i], o.pos_score, o.rank_head, o.rank_tail,
                                    o.auc_neg});
    }
    r.n_test_skipped = r.skipped_no_subgraph + r.skipped_insufficient_negatives;
    if (r.n_test_used == 0) throw DataError("no usable test triplets");

    r.hits = double(hit_sum) / double(2 * r.n_test_used);
    r.auc_pr = average_precision(ap_pos, ap_neg);

    for (size_t rel = 0; rel < rel_used.size(); ++rel) {
        if (rel_used[rel] == 0) continue;
        r.per_relation.push_back({int32_t(rel), rel_used[rel],
                                  double(rel_hits[rel]) / double(2 * rel_used[rel])});
    }

    struct SliceDef {
        const char* name;
        double threshold;
    };
    const SliceDef defs[] = {{"K<=5", 5.0}, {"K<=10", 10.0}, {"K<=K_T", k_t}};
    for (const SliceDef& d : defs) {
        int64_t n = 0, hits = 0;
        for (size_t i = 0; i < slots.size(); ++i) {
            if (slots[i].status != 0) continue;
            if (double(count_of(test_triplets[i].rel)) > d.threshold) continue;
            ++n;
            hits += slots[i].hit_head + slots[i].hit_tail;
        }
        if (n == 0) {
            r.notes.push_back(std::string("slice ") + d.name +
                              " has no test triplets on this dataset; omitted");
            continue;
        }
        r.slices.push_back({d.name, d.threshold, n, double(hits) / double(2 * n)});
    }
    r.notes.push_back("K_T = " + num_str(k_t));
    return r;
}

nlohmann::ordered_json report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["auc_pr"] = r.auc_pr;
    j["hits_at_" + std::to_string(r.hits_k)] = r.hits;
    j["n_test_total"] = r.n_test_total;
    j["n_test_used"] = r.n_test_used;
    j["n_test_skipped"] = r.n_test_skipped;
    j["skipped_no_subgraph"] = r.skipped_no_subgraph;
    j["skipped_insufficient_negatives"] = r.skipped_insufficient_negatives;
    nlohmann::ordered_json rels = nlohmann::ordered_json::array();
    for (const RelationStats& s : r.per_relation) {
        nlohmann::ordered_json row;
        row["relation"] = s.relation;
        row["n_triplets"] = s.n_triplets;
        row["hits"] = s.hits;
        rels.push_back(row);
    }
    j["per_relation"] = rels;
    nlohmann::ordered_json slices = nlohmann::ordered_json::array();
    for (const SliceStats& s : r.slices) {
        nlohmann::ordered_json row;
        row["name"] = s.name;
        row["threshold"] = s.threshold;
        row["n_triplets"] = s.n_triplets;
        row["hits"] = s.hits;
        slices.push_back(row);
    }
    j["slices"] = slices;
    j["notes"] = r.notes;
    return j;
}

std::string report_to_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "kind,name,count,value\n";
    os << "metric,auc_pr,," << num_str(r.auc_pr) << "\n";
    os << "metric,hits_at_" << r.hits_k << ",," << num_str(r.hits) << "\n";
    os << "metric,n_test_total," << r.n_test_total << ",\n";
    os << "metric,n_test_used," << r.n_test_used << ",\n";
    os << "metric,n_test_skipped," << r.n_test_skipped << ",\n";
    os << "metric,skipped_no_subgraph," << r.skipped_no_subgraph << ",\n";
    os << "metric,skipped_insufficient_negatives," << r.skipped_insufficient_negatives
       << ",\n";
    for (const SliceStats& s : r.slices)
        os << "slice," << s.name << "," << s.n_triplets << "," << num_str(s.hits) << "\n";
    for (const RelationStats& s : r.per_relation)
        os << "relation," << s.relation << "," << s.n_triplets << "," << num_str(s.hits)
           << "\n";
    return os.str();
}

std::string query_rows_tsv(const EvalReport& r) {
    std::ostringstream os;
    os << "head\trel\ttail\tpos_score\trank_head\trank_tail\tauc_neg_score\n";
    for (const QueryRow& q : r.query_rows)
        os << q.triplet.head << "\t" << q.triplet.rel << "\t" << q.triplet.tail << "\t"
           << num_str(q.pos_score) << "\t" << q.rank_head << "\t" << q.rank_tail << "\t"
           << num_str(q.auc_neg_score) << "\n";
    return os.str();
}

}  // namespace metaikg
