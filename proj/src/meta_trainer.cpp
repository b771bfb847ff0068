#include "metaikg/meta_trainer.hpp"

#include <algorithm>
#include <cmath>

#include "metaikg/common.hpp"

namespace metaikg {

TrainMode parse_mode(const std::string& s) {
    if (s == "meta-sgd") return TrainMode::MetaSgd;
    if (s == "maml") return TrainMode::Maml;
    if (s == "no-lrup") return TrainMode::NoLrup;
    if (s == "no-rpo") return TrainMode::NoRpo;
    if (s == "plain") return TrainMode::Plain;
    throw ConfigError("unknown mode '" + s +
                      "' (expected meta-sgd, maml, no-lrup, no-rpo, plain)");
}

std::string mode_name(TrainMode m) {
    switch (m) {
        case TrainMode::MetaSgd: return "meta-sgd";
        case TrainMode::Maml: return "maml";
        case TrainMode::NoLrup: return "no-lrup";
        case TrainMode::NoRpo: return "no-rpo";
        case TrainMode::Plain: return "plain";
    }
    return "meta-sgd";
}

TrainData make_train_data(const KnowledgeGraph& train_graph,
                          const std::vector<Triplet>& targets, double gamma) {
    if (targets.empty()) throw DataError("no training target triplets");
    TrainData d;
    d.graph = &train_graph;
    d.targets = &targets;
    d.by_relation.assign(size_t(train_graph.n_relations), {});
    for (size_t i = 0; i < targets.size(); ++i) {
        const Triplet& t = targets[i];
        if (t.rel < 0 || t.rel >= train_graph.n_relations)
            throw DataError("target triplet relation out of range");
        d.by_relation[size_t(t.rel)].push_back(int32_t(i));
    }
    d.n_graph_relations = 0;
    for (int32_t r = 0; r < train_graph.n_relations; ++r)
        if (train_graph.relation_counts[size_t(r)] > 0) ++d.n_graph_relations;
    if (d.n_graph_relations == 0) throw DataError("train graph has no edges");

    double k_t = compute_threshold(int64_t(targets.size()), d.n_graph_relations, gamma);
    std::vector<int64_t> target_counts(size_t(train_graph.n_relations), 0);
    for (const Triplet& t : targets) ++target_counts[size_t(t.rel)];
    d.split = split_relations(target_counts, k_t);

    for (int32_t r = 0; r < train_graph.n_relations; ++r) {
        if (d.by_relation[size_t(r)].empty()) continue;
        d.pool_all.push_back(r);
        if (double(target_counts[size_t(r)]) <= k_t)
            d.pool_few.push_back(r);
        else
            d.pool_large.push_back(r);
    }
    return d;
}

namespace {

std::optional<Triplet> sample_negative(const KnowledgeGraph& g, const Triplet& pos,
                                       Rng& rng) {
    const auto& pool = g.active_entities;
    if (pool.empty()) return std::nullopt;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        bool corrupt_head = rng.coin();
        int32_t e = pool[size_t(rng.below(pool.size()))];
        Triplet c = pos;
        if (corrupt_head)
            c.head = e;
        else
            c.tail = e;
        if (c == pos) continue;
        if (g.has_fact(c)) continue;
        return c;
    }
    return std::nullopt;
}

const std::vector<int32_t>& side_pool(const TrainData& d, TaskSide side) {
    switch (side) {
        case TaskSide::Large: return d.pool_large;
        case TaskSide::Few: return d.pool_few;
        case TaskSide::All: return d.pool_all;
    }
    return d.pool_all;
}

const char* side_name(TaskSide side) {
    switch (side) {
        case TaskSide::Large: return "large-shot";
        case TaskSide::Few: return "few-shot";
        case TaskSide::All: return "all";
    }
    return "all";
}

}  // namespace

TaskBatch sample_tasks(const TrainData& data, TaskSide side, int n_rel, int n_inst,
                       int n_neg, Rng& rng) {
    if (n_rel < 1 || n_inst < 1 || n_neg < 1)
        throw ConfigError("batch shape must be at least 1x1x1");
    const std::vector<int32_t>& pool = side_pool(data, side);
    if (pool.empty())
        throw DataError(std::string("no sampleable relations on the ") + side_name(side) +
                        " side");

    std::vector<int32_t> rels;
    rels.reserve(size_t(n_rel));
    if (pool.size() >= size_t(n_rel)) {
        for (size_t i : rng.sample_without_replacement(pool.size(), size_t(n_rel)))
            rels.push_back(pool[i]);
    } else {
        for (int i = 0; i < n_rel; ++i) rels.push_back(pool[size_t(rng.below(pool.size()))]);
    }

    TaskBatch batch;
    for (int32_t r : rels) {
        const std::vector<int32_t>& idxs = data.by_relation[size_t(r)];
        size_t take = std::min(size_t(n_inst), idxs.size());
        for (size_t i : rng.sample_without_replacement(idxs.size(), take)) {
            TaskInstance inst;
            inst.relation = r;
            inst.positive = (*data.targets)[size_t(idxs[i])];
            for (int k = 0; k < n_neg; ++k) {
                auto neg = sample_negative(*data.graph, inst.positive, rng);
                if (neg) inst.negatives.push_back(*neg);
            }
            batch.instances.push_back(std::move(inst));
        }
    }
    return batch;
}

PreparedBatch prepare_batch(const KnowledgeGraph& g, const TaskBatch& batch, int hops,
                            int max_nodes, DirectionMode mode) {
    std::vector<std::optional<PreparedInstance>> slots(batch.instances.size());
    par::parallel_for(batch.instances.size(), [&](size_t i) {
        const TaskInstance& inst = batch.instances[i];
        auto pos = extract_enclosing_subgraph(g, inst.positive, hops, mode);
        if (!pos) return;
        PreparedInstance out;
        out.relation = inst.relation;
        out.pos = prune_subgraph(std::move(*pos), max_nodes);
        for (const Triplet& n : inst.negatives) {
            auto sg = extract_enclosing_subgraph(g, n, hops, mode);
            if (sg) out.negs.push_back(prune_subgraph(std::move(*sg), max_nodes));
        }
        if (out.negs.empty()) return;
        slots[i] = std::move(out);
    });

    PreparedBatch out;
    for (auto& s : slots) {
        if (s)
            out.instances.push_back(std::move(*s));
        else
            ++out.skipped;
    }
    return out;
}

BatchEval batch_loss_and_grad(const ModelParams& p, const PreparedBatch& batch,
                              double margin) {
    if (batch.instances.empty()) throw DataError("batch has no usable instances");
    std::vector<double> losses(batch.instances.size(), 0.0);
    std::vector<std::vector<double>> grads(batch.instances.size());
    par::parallel_for(batch.instances.size(), [&](size_t i) {
        const PreparedInstance& inst = batch.instances[i];
        LossGrad lg = loss_and_grad(p, inst.pos, inst.negs, margin);
        losses[i] = lg.loss;
        grads[i] = std::move(lg.grad);
    });

    BatchEval out;
    out.grad.assign(p.values.size(), 0.0);
    for (size_t i = 0; i < losses.size(); ++i) {
        out.loss += losses[i];
        const std::vector<double>& g = grads[i];
        for (size_t j = 0; j < g.size(); ++j) out.grad[j] += g[j];
    }
    return out;
}

// ----- update algebra -----

namespace {
void check_same_size(size_t a, size_t b, const char* what) {
    if (a != b) throw ConfigError(std::string(what) + ": size mismatch");
}
}  // namespace

std::vector<double> apply_inner_update(const std::vector<double>& theta,
                                       const std::vector<double>& alpha,
                                       const std::vector<double>& grad_sum) {
    check_same_size(theta.size(), alpha.size(), "inner update (alpha)");
    check_same_size(theta.size(), grad_sum.size(), "inner update (grad)");
    std::vector<double> out(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] - alpha[i] * grad_sum[i];
    return out;
}

std::vector<double> apply_inner_update(const std::vector<double>& theta, double alpha,
                                       const std::vector<double>& grad_sum) {
    check_same_size(theta.size(), grad_sum.size(), "inner update (grad)");
    std::vector<double> out(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] - alpha * grad_sum[i];
    return out;
}

std::vector<double> apply_meta_update(const std::vector<double>& theta, double beta,
                                      const std::vector<double>& query_grad_sum) {
    check_same_size(theta.size(), query_grad_sum.size(), "meta update");
    std::vector<double> out(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] - beta * query_grad_sum[i];
    return out;
}

std::vector<double> apply_lrup(const std::vector<double>& theta_rf, double beta_prime,
                               const std::vector<double>& support_grad_sum) {
    if (beta_prime == 0.0) return theta_rf;
    check_same_size(theta_rf.size(), support_grad_sum.size(), "large-shot update");
    std::vector<double> out(theta_rf.size());
    for (size_t i = 0; i < theta_rf.size(); ++i)
        out[i] = theta_rf[i] - beta_prime * support_grad_sum[i];
    return out;
}

std::vector<double> apply_alpha_update(const std::vector<double>& alpha, double beta,
                                       const std::vector<double>& query_grad_sum,
                                       const std::vector<double>& support_grad_sum) {
    check_same_size(alpha.size(), query_grad_sum.size(), "alpha update (query)");
    check_same_size(alpha.size(), support_grad_sum.size(), "alpha update (support)");
    // alpha - beta * q (.) (-s) == alpha + beta * q (.) s
    std::vector<double> out(alpha.size());
    for (size_t i = 0; i < alpha.size(); ++i)
        out[i] = alpha[i] + beta * query_grad_sum[i] * support_grad_sum[i];
    return out;
}

std::vector<double> AdamState::step(const std::vector<double>& theta, double lr,
                                    const std::vector<double>& grad) {
    if (m.empty()) {
        m.assign(theta.size(), 0.0);
        v.assign(theta.size(), 0.0);
    }
    check_same_size(theta.size(), m.size(), "adam state");
    check_same_size(theta.size(), grad.size(), "adam grad");
    ++t;
    double c1 = 1.0 - std::pow(beta1, double(t));
    double c2 = 1.0 - std::pow(beta2, double(t));
    std::vector<double> out(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        out[i] = theta[i] - lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
    return out;
}

// ----- op-level steps -----

namespace {
ModelParams with_values(const ModelParams& base, std::vector<double> values) {
    ModelParams p;
    p.shape = base.shape;
    p.values = std::move(values);
    return p;
}
}  // namespace

InnerResult inner_update(const MetaState& s, const PreparedBatch& support, double margin,
                         int inner_steps) {
    if (inner_steps < 1) throw ConfigError("inner_steps must be at least 1");
    InnerResult r;
    r.theta_rl = s.theta.values;
    r.support_grad_sum.assign(s.theta.values.size(), 0.0);
    for (int k = 0; k < inner_steps; ++k) {
        BatchEval be = batch_loss_and_grad(with_values(s.theta, r.theta_rl), support, margin);
        if (k == 0) r.support_loss = be.loss;
        for (size_t i = 0; i < be.grad.size(); ++i) r.support_grad_sum[i] += be.grad[i];
        if (s.alpha.empty())
            r.theta_rl = apply_inner_update(r.theta_rl, s.alpha_scalar, be.grad);
        else
            r.theta_rl = apply_inner_update(r.theta_rl, s.alpha, be.grad);
    }
    return r;
}

MetaStepResult fewshot_meta_update(const MetaState& s, const std::vector<double>& theta_rl,
                                   const PreparedBatch& query, double margin, double beta) {
    BatchEval be = batch_loss_and_grad(with_values(s.theta, theta_rl), query, margin);
    MetaStepResult r;
    r.query_loss = be.loss;
    // The step is taken from the base parameters, not the adapted ones.
    r.theta_rf = apply_meta_update(s.theta.values, beta, be.grad);
    r.query_grad_sum = std::move(be.grad);
    return r;
}

LrupResult large_shot_update(const MetaState& s, const std::vector<double>& theta_rf,
                             const PreparedBatch& support, double margin,
                             double beta_prime, AdamState* adam) {
    LrupResult r;
    if (beta_prime == 0.0 && adam == nullptr) {
        r.theta_next = theta_rf;
        return r;
    }
    BatchEval be = batch_loss_and_grad(with_values(s.theta, theta_rf), support, margin);
    r.support_loss_at_rf = be.loss;
    if (adam)
        r.theta_next = adam->step(theta_rf, beta_prime, be.grad);
    else
        r.theta_next = apply_lrup(theta_rf, beta_prime, be.grad);
    return r;
}

// ----- training loop -----

namespace {

// maml fixes a scalar rate; plain has no inner loop at all. Every other mode
// learns element-wise rates.
bool elementwise_alpha(TrainMode m) {
    return m == TrainMode::MetaSgd || m == TrainMode::NoLrup || m == TrainMode::NoRpo;
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.h < 1) throw ConfigError("h must be at least 1");
    if (cfg.layers < 1) throw ConfigError("layers must be at least 1");
    if (cfg.dim < 1) throw ConfigError("dim must be at least 1");
    if (cfg.epochs < 0) throw ConfigError("epochs must be non-negative");
    if (cfg.meta_updates < 1) throw ConfigError("meta-updates must be at least 1");
    if (cfg.max_nodes < 2) throw ConfigError("max-nodes must be at least 2");
    if (cfg.beta <= 0) throw ConfigError("beta must be positive");
    if (cfg.beta_prime < 0) throw ConfigError("beta-prime must be non-negative");
    if (cfg.gamma < 0) throw ConfigError("gamma must be non-negative");
    if (cfg.margin < 0) throw ConfigError("margin must be non-negative");
    if (cfg.alpha_init <= 0) throw ConfigError("alpha-init must be positive");
}

MetaState init_state(const TrainConfig& cfg, const TrainData& data,
                     const std::optional<ResumePoint>& resume) {
    MetaState s;
    s.mode = cfg.mode;
    if (resume) {
        s.theta = resume->params;
        if (s.theta.shape.n_relations != data.graph->n_relations ||
            s.theta.shape.d != cfg.dim || s.theta.shape.h != cfg.h ||
            s.theta.shape.l != cfg.layers)
            throw DataError("checkpoint shape does not match the training configuration");
        if (elementwise_alpha(cfg.mode)) {
            if (!resume->alpha)
                throw DataError(
                    "checkpoint has no per-parameter learning rates; cannot resume " +
                    mode_name(cfg.mode) + " training from it");
            s.alpha = *resume->alpha;
            if (s.alpha.size() != s.theta.values.size())
                throw DataError("checkpoint learning-rate vector has the wrong size");
        }
        s.alpha_scalar = cfg.alpha_init;
        s.rng.set_state(resume->rng_state);
        s.iteration = resume->iteration;
        s.epoch = resume->epoch;
        return s;
    }
    // Distinct streams for initialization and sampling.
    s.theta = init_params(data.graph->n_relations, cfg.dim, cfg.h, cfg.layers,
                          hash_mix({cfg.seed, 1}));
    if (elementwise_alpha(cfg.mode))
        s.alpha.assign(s.theta.values.size(), cfg.alpha_init);
    s.alpha_scalar = cfg.alpha_init;
    s.rng = Rng(hash_mix({cfg.seed, 2}));
    return s;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const TrainData& data, TrainHooks hooks,
                  const std::optional<ResumePoint>& resume) {
    validate_config(cfg);
    TrainResult res;
    res.state = init_state(cfg, data, resume);
    MetaState& s = res.state;

    const bool meta = cfg.mode != TrainMode::Plain;
    const TaskSide support_side =
        (cfg.mode == TrainMode::NoRpo || !meta) ? TaskSide::All : TaskSide::Large;
    const TaskSide query_side =
        (cfg.mode == TrainMode::NoRpo) ? TaskSide::All : TaskSide::Few;

    AdamState adam;
    AdamState* adam_ptr = (meta && cfg.adam_lrup) ? &adam : nullptr;

    for (; s.epoch < cfg.epochs; ++s.epoch) {
        for (int32_t u = 0; u < cfg.meta_updates; ++u) {
            TrainLogRow row;
            TaskBatch tb_s =
                sample_tasks(data, support_side, cfg.relations_per_batch,
                             cfg.instances_per_relation, cfg.negatives_per_positive, s.rng);
            PreparedBatch pb_s =
                prepare_batch(*data.graph, tb_s, cfg.h, cfg.max_nodes, cfg.direction);
            row.skipped_instances += pb_s.skipped;
            if (pb_s.instances.empty())
                throw DataError("degenerate batch: every sampled instance was skipped");

            if (!meta) {
                BatchEval be = batch_loss_and_grad(s.theta, pb_s, cfg.margin);
                row.support_loss = be.loss;
                s.theta.values = apply_meta_update(s.theta.values, cfg.beta, be.grad);
            } else {
                InnerResult ir = inner_update(s, pb_s, cfg.margin, cfg.inner_steps);
                row.support_loss = ir.support_loss;

                TaskBatch tb_q = sample_tasks(data, query_side, cfg.relations_per_batch,
                                              cfg.instances_per_relation,
                                              cfg.negatives_per_positive, s.rng);
                PreparedBatch pb_q =
                    prepare_batch(*data.graph, tb_q, cfg.h, cfg.max_nodes, cfg.direction);
                row.skipped_instances += pb_q.skipped;
                if (pb_q.instances.empty())
                    throw DataError("degenerate batch: every sampled instance was skipped");

                MetaStepResult ms =
                    fewshot_meta_update(s, ir.theta_rl, pb_q, cfg.margin, cfg.beta);
                row.query_loss = ms.query_loss;

                if (cfg.mode == TrainMode::NoLrup) {
                    s.theta.values = std::move(ms.theta_rf);
                } else {
                    LrupResult lr = large_shot_update(s, ms.theta_rf, pb_s, cfg.margin,
                                                      cfg.beta_prime, adam_ptr);
                    row.lrup_loss = lr.support_loss_at_rf;
                    s.theta.values = std::move(lr.theta_next);
                }

                if (elementwise_alpha(cfg.mode))
                    s.alpha = apply_alpha_update(s.alpha, cfg.beta, ms.query_grad_sum,
                                                 ir.support_grad_sum);
            }

            ++s.iteration;
            row.iteration = s.iteration;
            res.log.push_back(row);
        }
        if (hooks.on_epoch_end) hooks.on_epoch_end(s);
    }
    return res;
}

}  // namespace metaikg
