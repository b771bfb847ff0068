#pragma once

// Ranking evaluation over a test graph: Hits@k from 49 head-side plus 49
// tail-side corruptions per test triplet (each side is its own query), and
// AUC-PR from one paired negative per positive. All ties are pessimistic.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "metaikg/kg.hpp"
#include "metaikg/mpnn.hpp"
#include "metaikg/subgraph.hpp"

namespace metaikg {

struct RankedQuery {
    double positive = 0.0;
    std::vector<double> negatives;
};

// 1 + |{neg > pos}| + |{neg == pos}|
int64_t pessimistic_rank(const RankedQuery& q);
int hits_at_k(const RankedQuery& q, int k);

// Average precision with equal-score negatives ranked above positives.
// Deterministic summation: per-positive terms are added in descending score
// order with a single final division, so an independent implementation that
// follows the same order reproduces it bit for bit.
double average_precision(const std::vector<double>& pos_scores,
                         const std::vector<double>& neg_scores);

// AP over pooled (positive, negative) score pairs.
double auc_pr(const std::vector<std::pair<double, double>>& pairs);

// Corruptions of one side of a test triplet: distinct entities drawn
// uniformly from the test graph's active entities, excluding the original
// entity and (in filtered mode) any corruption that is a known true fact in
// the test graph or the test triplet list. Deterministic per
// (seed, triplet, side), independent of call order.
class EvalNegativeSampler {
  public:
    EvalNegativeSampler(const KnowledgeGraph& g, const std::vector<Triplet>& known_true,
                        bool filtered, uint64_t seed);

    // nullopt when fewer than n valid corruptions exist.
    std::optional<std::vector<Triplet>> sample(const Triplet& t, bool corrupt_head,
                                               int n) const;

    // Seeded per-triplet side choice for the AUC-PR negative.
    bool auc_side_is_head(const Triplet& t) const;

  private:
    const KnowledgeGraph* g_;
    std::unordered_set<uint64_t> extra_true_;
    bool filtered_;
    uint64_t seed_;
};

struct EvalConfig {
    int32_t n_negatives = 49;
    int32_t hits_k = 10;
    uint64_t seed = 1;
    bool filtered = true;
    int32_t h = 3;
    int32_t max_nodes = 500;
    DirectionMode direction = DirectionMode::PathConsistent;
    bool keep_query_rows = false;
};

struct RelationStats {
    int32_t relation = 0;
    int64_t n_triplets = 0;
    double hits = 0.0;
};

struct SliceStats {
    std::string name;
    double threshold = 0.0;
    int64_t n_triplets = 0;
    double hits = 0.0;
};

struct QueryRow {
    Triplet triplet;
    double pos_score = 0.0;
    int64_t rank_head = 0;
    int64_t rank_tail = 0;
    double auc_neg_score = 0.0;
};

struct EvalReport {
    double auc_pr = 0.0;
    double hits = 0.0;
    int32_t hits_k = 10;
    int64_t n_test_total = 0;
    int64_t n_test_used = 0;
    int64_t n_test_skipped = 0;
    int64_t skipped_no_subgraph = 0;
    int64_t skipped_insufficient_negatives = 0;
    std::vector<RelationStats> per_relation;  // ascending relation id
    std::vector<SliceStats> slices;           // empty slices omitted, noted
    std::vector<std::string> notes;
    std::vector<QueryRow> query_rows;  // filled when keep_query_rows
};

// train_target_counts: per-relation triplet counts from the TRAINING target
// list; they key the few-shot slices (K <= 5, K <= 10, K <= K_T). Relations
// beyond the vector count as 0.
EvalReport evaluate(const ModelParams& p, const KnowledgeGraph& test_graph,
                    const std::vector<Triplet>& test_triplets,
                    const std::vector<int64_t>& train_target_counts, double k_t,
                    const EvalConfig& cfg);

nlohmann::ordered_json report_to_json(const EvalReport& r);
std::string report_to_csv(const EvalReport& r);
std::string query_rows_tsv(const EvalReport& r);

}  // namespace metaikg
