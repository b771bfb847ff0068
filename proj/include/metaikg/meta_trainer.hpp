#pragma once

// Three-step meta-training over relation tasks.
//
// Relations are split by training-triplet count n_r against the threshold
// K_T = n_T / n_R * gamma (boundary inclusive on the few-shot side). Each
// meta-iteration:
//   1. inner step on a large-shot support batch:
//        theta_rl = theta - alpha (.) sum grad L_support(theta)
//   2. few-shot meta step on a query batch, taken from the base point:
//        theta_rf = theta - beta * sum grad L_query(theta_rl)
//   3. large-shot relation update (LRUP) re-using the support batch:
//        theta  <- theta_rf - beta' * sum grad L_support(theta_rf)
//   plus the element-wise learning-rate update
//        alpha  <- alpha - beta * (sum grad L_query(theta_rl)) (.) (-sum grad L_support(theta))
// All meta-gradients are first order: adapted parameters are treated as
// constants when differentiating, matching the update formulas above.
//
// Modes: meta-sgd (learned element-wise alpha), maml (fixed scalar alpha,
// no alpha update), no-lrup (step 3 skipped), no-rpo (both batches sampled
// from all relations, split ignored), plain (single SGD step per batch on
// all relations, no meta-structure).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metaikg/kg.hpp"
#include "metaikg/mpnn.hpp"
#include "metaikg/subgraph.hpp"

namespace metaikg {

enum class TrainMode { MetaSgd, Maml, NoLrup, NoRpo, Plain };

TrainMode parse_mode(const std::string& s);
std::string mode_name(TrainMode m);

struct TrainConfig {
    TrainMode mode = TrainMode::MetaSgd;
    int32_t h = 3;
    int32_t layers = 3;
    int32_t dim = 32;
    double gamma = 0.1;
    double beta = 1e-3;
    double beta_prime = 1e-4;
    double margin = 10.0;
    double alpha_init = 1e-3;
    int32_t epochs = 20;
    int32_t meta_updates = 100;  // per epoch
    int32_t max_nodes = 500;
    int32_t relations_per_batch = 2;
    int32_t instances_per_relation = 2;
    int32_t negatives_per_positive = 2;
    int32_t inner_steps = 1;
    bool adam_lrup = false;  // Adam wrapper on step 3 only
    DirectionMode direction = DirectionMode::PathConsistent;
    uint64_t seed = 1;
};

// Task pool: positives are training targets (not arbitrary graph facts);
// negatives are corruptions absent from the train graph.
struct TrainData {
    const KnowledgeGraph* graph = nullptr;
    const std::vector<Triplet>* targets = nullptr;
    std::vector<std::vector<int32_t>> by_relation;  // target indices
    RelationSplit split;
    std::vector<int32_t> pool_large;  // sampleable: >= 1 target triplet
    std::vector<int32_t> pool_few;
    std::vector<int32_t> pool_all;
    int32_t n_graph_relations = 0;  // n_R used for the threshold
};

TrainData make_train_data(const KnowledgeGraph& train_graph,
                          const std::vector<Triplet>& targets, double gamma);

enum class TaskSide { Large, Few, All };

struct TaskInstance {
    int32_t relation = 0;
    Triplet positive;
    std::vector<Triplet> negatives;
};

struct TaskBatch {
    std::vector<TaskInstance> instances;
};

// Relations uniformly without replacement (with replacement only when the
// pool is smaller than n_rel); per relation up to n_inst positives without
// replacement; per positive n_neg corruptions (head or tail replaced by a
// uniform train-graph entity) that are not train-graph facts.
TaskBatch sample_tasks(const TrainData& data, TaskSide side, int n_rel, int n_inst,
                       int n_neg, Rng& rng);

struct PreparedInstance {
    int32_t relation = 0;
    EnclosingSubgraph pos;
    std::vector<EnclosingSubgraph> negs;
};

// Extraction + pruning for a sampled batch. Instances whose positive has no
// enclosing subgraph, or whose negatives all lack one, are skipped and
// counted. Negatives without a subgraph are silently dropped (they can
// never out-rank anything).
struct PreparedBatch {
    std::vector<PreparedInstance> instances;
    int64_t skipped = 0;
};

PreparedBatch prepare_batch(const KnowledgeGraph& g, const TaskBatch& batch, int hops,
                            int max_nodes, DirectionMode mode);

struct BatchEval {
    double loss = 0.0;
    std::vector<double> grad;
};

// Per-instance losses/gradients may run in parallel; the reduction is always
// in ascending instance order, so results do not depend on thread count.
BatchEval batch_loss_and_grad(const ModelParams& p, const PreparedBatch& batch,
                              double margin);

// ----- update algebra (kept separate so the closed forms are testable) -----

std::vector<double> apply_inner_update(const std::vector<double>& theta,
                                       const std::vector<double>& alpha,
                                       const std::vector<double>& grad_sum);
std::vector<double> apply_inner_update(const std::vector<double>& theta, double alpha,
                                       const std::vector<double>& grad_sum);
std::vector<double> apply_meta_update(const std::vector<double>& theta, double beta,
                                      const std::vector<double>& query_grad_sum);
// beta_prime == 0 returns theta_rf unchanged (step disabled analytically).
std::vector<double> apply_lrup(const std::vector<double>& theta_rf, double beta_prime,
                               const std::vector<double>& support_grad_sum);
// alpha <- alpha - beta * query_grad (.) (-support_grad)
std::vector<double> apply_alpha_update(const std::vector<double>& alpha, double beta,
                                       const std::vector<double>& query_grad_sum,
                                       const std::vector<double>& support_grad_sum);

struct AdamState {
    std::vector<double> m, v;
    int64_t t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> step(const std::vector<double>& theta, double lr,
                             const std::vector<double>& grad);
};

struct MetaState {
    TrainMode mode = TrainMode::MetaSgd;
    ModelParams theta;
    std::vector<double> alpha;  // element-wise rates; empty in scalar-alpha modes
    double alpha_scalar = 1e-3;
    Rng rng{0};
    int64_t iteration = 0;
    int32_t epoch = 0;
};

// ----- op-level steps (each evaluates real losses, then applies algebra) -----

struct InnerResult {
    std::vector<double> theta_rl;
    std::vector<double> support_grad_sum;  // summed over inner steps
    double support_loss = 0.0;             // at the base point
};
InnerResult inner_update(const MetaState& s, const PreparedBatch& support, double margin,
                         int inner_steps);

struct MetaStepResult {
    std::vector<double> theta_rf;
    std::vector<double> query_grad_sum;  // at theta_rl
    double query_loss = 0.0;
};
MetaStepResult fewshot_meta_update(const MetaState& s, const std::vector<double>& theta_rl,
                                   const PreparedBatch& query, double margin, double beta);

struct LrupResult {
    std::vector<double> theta_next;
    double support_loss_at_rf = 0.0;
};
LrupResult large_shot_update(const MetaState& s, const std::vector<double>& theta_rf,
                             const PreparedBatch& support, double margin,
                             double beta_prime, AdamState* adam);

// ----- training loop -----

struct TrainLogRow {
    int64_t iteration = 0;
    double support_loss = 0.0;
    double query_loss = 0.0;
    double lrup_loss = 0.0;
    int64_t skipped_instances = 0;
};

struct TrainHooks {
    // Called after every completed epoch (checkpointing etc.).
    std::function<void(const MetaState&)> on_epoch_end;
};

struct ResumePoint {
    ModelParams params;
    std::optional<std::vector<double>> alpha;
    std::string rng_state;
    int64_t iteration = 0;
    int32_t epoch = 0;
};

struct TrainResult {
    MetaState state;
    std::vector<TrainLogRow> log;
};

TrainResult train(const TrainConfig& cfg, const TrainData& data, TrainHooks hooks = {},
                  const std::optional<ResumePoint>& resume = std::nullopt);

}  // namespace metaikg
