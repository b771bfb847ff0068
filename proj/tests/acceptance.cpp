// Acceptance gate. Each numbered check prints one [PASS]/[FAIL]/[SKIP] line
// with its runtime; the process exits non-zero when any required check
// fails. Check 8 is best-effort: it reports but never fails the run.
//
// Set METAIKG_BENCHMARKS to a directory holding the real benchmark splits
// (subdirectories fb-v1..fb-v4, nell-v1..nell-v4) to run checks 1 and 8
// against them; without it, check 1 runs on generated datasets with the
// published per-file counts and check 8 is skipped.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "metaikg/common.hpp"
#include "metaikg/evaluator.hpp"
#include "metaikg/kg.hpp"
#include "metaikg/kg_store.hpp"
#include "metaikg/meta_trainer.hpp"
#include "metaikg/mpnn.hpp"
#include "metaikg/subgraph.hpp"
#include "metaikg/synthkg.hpp"

#include "oracles.hpp"
#include "testdata.hpp"

namespace fs = std::filesystem;
using namespace metaikg;

namespace {

struct Outcome {
    bool ok = true;
    bool skipped = false;
    std::vector<std::string> details;

    void fail(const std::string& msg) {
        ok = false;
        if (details.size() < 12) details.push_back(msg);
    }
    void note(const std::string& msg) {
        if (details.size() < 12) details.push_back(msg);
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::optional<fs::path> benchmark_dir(const char* split) {
    const char* root = std::getenv("METAIKG_BENCHMARKS");
    if (!root) return std::nullopt;
    fs::path p = fs::path(root) / split;
    if (fs::is_directory(p)) return p;
    return std::nullopt;
}

// ----- 1: dataset statistics -----

Outcome check_dataset_stats() {
    Outcome out;
    bool any_real = false;
    for (const testdata::TableRow& row : testdata::benchmark_rows()) {
        fs::path dir;
        std::optional<testdata::TempDir> tmp;
        if (auto real = benchmark_dir(row.name)) {
            dir = *real;
            any_real = true;
        } else {
            tmp.emplace(std::string("acc1_") + row.name);
            testdata::write_shaped_dataset(tmp->path(), row);
            dir = tmp->path();
        }
        const auto t0 = std::chrono::steady_clock::now();
        nlohmann::ordered_json stats;
        try {
            stats = dataset_stats(load_inductive_dataset(dir.string()));
        } catch (const std::exception& e) {
            out.fail(std::string(row.name) + ": " + e.what());
            continue;
        }
        const double dt = seconds_since(t0);
        auto expect = [&](const char* key, int64_t want) {
            int64_t got = stats[key].get<int64_t>();
            if (got != want)
                out.fail(std::string(row.name) + " " + key + ": got " +
                         std::to_string(got) + ", want " + std::to_string(want));
        };
        expect("train_relations", row.train_relations);
        expect("train_graph", row.train_graph);
        expect("train_triplets", row.train_triplets);
        expect("validation_triplets", row.validation_triplets);
        expect("test_relations", row.test_relations);
        expect("test_graph", row.test_graph);
        expect("test_triplets", row.test_triplets);
        if (dt >= 10.0)
            out.fail(std::string(row.name) + ": load+stats took " + std::to_string(dt) +
                     "s (budget 10s)");
    }
    out.note(any_real ? "verified against on-disk benchmark splits"
                      : "verified on generated datasets with the published counts "
                        "(METAIKG_BENCHMARKS unset)");
    return out;
}

// ----- 2: extraction vs walk-enumeration oracle -----

Outcome check_extraction_oracle() {
    Outcome out;
    Rng rng(0xacce97a2ce01ull);
    int nonempty = 0;
    for (int trial = 0; trial < 500; ++trial) {
        oracles::RandomCase rc = oracles::random_case(rng, 12, 3);
        oracles::WalkSubgraph want = oracles::walk_oracle(rc.g, rc.target, rc.h);
        std::optional<EnclosingSubgraph> got =
            extract_enclosing_subgraph(rc.g, rc.target, rc.h, DirectionMode::PathConsistent);
        if (want.empty != !got.has_value()) {
            out.fail("trial " + std::to_string(trial) + ": emptiness mismatch");
            continue;
        }
        if (want.empty) continue;
        ++nonempty;
        std::set<int32_t> got_nodes(got->nodes.begin(), got->nodes.end());
        if (got_nodes != want.nodes) {
            out.fail("trial " + std::to_string(trial) + ": node set mismatch");
            continue;
        }
        std::multiset<std::tuple<int32_t, int32_t, int32_t>> got_edges;
        for (const auto& e : got->edges)
            got_edges.insert({got->nodes[size_t(e.head)], e.rel, got->nodes[size_t(e.tail)]});
        if (got_edges != want.edges)
            out.fail("trial " + std::to_string(trial) + ": edge multiset mismatch");
    }
    out.note(std::to_string(nonempty) + "/500 graphs had a non-empty subgraph");
    if (nonempty < 50) out.fail("too few non-empty cases for a meaningful check");
    return out;
}

// ----- 3: analytic gradients vs central finite differences -----

Outcome check_gradient_fidelity() {
    Outcome out;
    Rng rng(0xacce97a2ce03ull);
    const double eps = 1e-5;
    const double rel_tol = 1e-4;
    int done = 0;
    int64_t coords = 0;
    while (done < 100) {
        oracles::RandomCase rc = oracles::random_case(rng, 8, 3);
        auto pos = extract_enclosing_subgraph(rc.g, rc.target, rc.h,
                                              DirectionMode::PathConsistent);
        if (!pos) continue;
        std::vector<EnclosingSubgraph> negs;
        for (int k = 0; k < 2; ++k) {
            Triplet neg = rc.target;
            neg.tail = int32_t(rng.below(uint64_t(rc.g.n_entities)));
            auto nsg = extract_enclosing_subgraph(rc.g, neg, rc.h,
                                                  DirectionMode::PathConsistent);
            if (nsg) negs.push_back(std::move(*nsg));
        }
        if (negs.empty()) continue;  // the loss needs at least one negative
        ModelParams p = init_params(rc.g.n_relations, 4, rc.h, 2,
                                    hash_mix({0xf00du, uint64_t(done)}));
        // Central differences sample both sides of each hinge; a pair sitting
        // within eps of its kink would compare a one-sided slope against the
        // subgradient. Redraw those rare cases.
        const double s_pos = score_subgraph(p, *pos);
        bool near_kink = false;
        for (const auto& n : negs) {
            double slack = 10.0 - (s_pos - score_subgraph(p, n));
            if (std::fabs(slack) < 1e-3) near_kink = true;
        }
        if (near_kink) continue;

        LossGrad lg = loss_and_grad(p, *pos, negs, 10.0);
        std::vector<double> fd = oracles::fd_grad(p, *pos, negs, 10.0, eps);
        for (size_t i = 0; i < fd.size(); ++i) {
            ++coords;
            const double diff = std::fabs(lg.grad[i] - fd[i]);
            if (diff > std::max(1e-9, rel_tol * std::fabs(fd[i]))) {
                out.fail("case " + std::to_string(done) + " coord " + std::to_string(i) +
                         ": analytic " + std::to_string(lg.grad[i]) + " vs fd " +
                         std::to_string(fd[i]));
                break;
            }
        }
        ++done;
    }
    out.note(std::to_string(coords) + " coordinates compared over 100 cases");
    return out;
}

// ----- 4: metric oracles -----

Outcome check_metric_oracles() {
    Outcome out;
    Rng rng(0xacce97a2ce04ull);
    for (int trial = 0; trial < 10000; ++trial) {
        const size_t np = 1 + rng.below(4);
        const size_t nn = 1 + rng.below(4);
        std::vector<double> pos(np), neg(nn);
        // Quarter-integer scores make exact ties common.
        for (double& v : pos) v = 0.25 * double(rng.below(9));
        for (double& v : neg) v = 0.25 * double(rng.below(9));
        const double got = average_precision(pos, neg);
        const double want = oracles::brute_ap(pos, neg);
        if (got != want) {
            out.fail("trial " + std::to_string(trial) + ": ap " + std::to_string(got) +
                     " vs brute force " + std::to_string(want));
            break;
        }
    }

    // Documented tie-rule examples for hits@10 over 49 negatives.
    {
        RankedQuery top{0.9, std::vector<double>(49, 0.1)};
        if (pessimistic_rank(top) != 1 || hits_at_k(top, 10) != 1)
            out.fail("all-negatives-below example: expected rank 1, hit");
    }
    {
        RankedQuery bottom{0.1, std::vector<double>(49, 0.9)};
        if (pessimistic_rank(bottom) != 50 || hits_at_k(bottom, 10) != 0)
            out.fail("all-negatives-above example: expected rank 50, miss");
    }
    {
        RankedQuery tied{0.5, {}};
        tied.negatives.assign(10, 0.5);
        for (int i = 0; i < 39; ++i) tied.negatives.push_back(0.1);
        if (pessimistic_rank(tied) != 11 || hits_at_k(tied, 10) != 0)
            out.fail("ten-way-tie example: expected rank 11, miss");
    }
    return out;
}

// ----- shared tiny dataset for 5 and 7 -----

// Directed 8-ring with step +1, step -1, and step +2 relations: every
// ordered pair is joined by a walk of at most 3 edges, so extraction at
// h = 2 never comes up empty.
struct RingData {
    KnowledgeGraph g;
    std::vector<Triplet> targets;
    RingData() {
        std::vector<Triplet> edges;
        for (int32_t i = 0; i < 8; ++i) {
            edges.push_back({i, 0, (i + 1) % 8});
            edges.push_back({(i + 1) % 8, 1, i});
            edges.push_back({i, 2, (i + 2) % 8});
        }
        g = build_graph(edges, 8, 3);
        for (int32_t i = 0; i < 5; ++i) targets.push_back({i, 0, (i + 1) % 8});
        targets.push_back({0, 2, 2});
    }
};

TrainConfig ring_config() {
    TrainConfig cfg;
    cfg.h = 2;
    cfg.layers = 1;
    cfg.dim = 6;
    cfg.gamma = 1.0;  // threshold 2: relation 0 large-shot, relation 2 few-shot
    cfg.margin = 2.0;
    cfg.epochs = 3;
    cfg.meta_updates = 4;
    cfg.seed = 11;
    return cfg;
}

// ----- 5: update closed forms + ablation bit-identity -----

Outcome check_update_closed_forms() {
    Outcome out;
    auto expect_exact = [&](const char* what, double got, double want) {
        if (got != want)
            out.fail(std::string(what) + ": got " + std::to_string(got) + ", want " +
                     std::to_string(want));
    };
    // One-parameter worked examples; the right-hand sides repeat the
    // documented arithmetic with the implementation's operand order, so
    // equality is exact, not approximate.
    expect_exact("inner update", apply_inner_update({1.0}, {0.1}, {0.5})[0],
                 1.0 - 0.1 * 0.5);  // 0.95
    expect_exact("meta update", apply_meta_update({1.0}, 0.01, {0.2})[0],
                 1.0 - 0.01 * 0.2);  // 0.998
    expect_exact("large-shot update", apply_lrup({0.998}, 0.0001, {1.0})[0],
                 0.998 - 0.0001 * 1.0);  // 0.9979
    expect_exact("rate update", apply_alpha_update({0.1}, 0.01, {0.2}, {0.5})[0],
                 0.1 + 0.01 * 0.2 * 0.5);  // 0.101
    expect_exact("zero-gradient inner update", apply_inner_update({1.0}, {0.1}, {0.0})[0],
                 1.0);
    expect_exact("disabled large-shot update", apply_lrup({0.998}, 0.0, {1e300})[0],
                 0.998);

    RingData ring;
    TrainData data = make_train_data(ring.g, ring.targets, ring_config().gamma);
    TrainConfig without = ring_config();
    without.mode = TrainMode::NoLrup;
    without.beta_prime = 0.5;  // must be ignored entirely
    TrainConfig zeroed = ring_config();
    zeroed.mode = TrainMode::MetaSgd;
    zeroed.beta_prime = 0.0;
    TrainResult a = train(without, data);
    TrainResult b = train(zeroed, data);
    if (a.state.theta.values != b.state.theta.values)
        out.fail("ablated run and zero-rate run diverged in parameters");
    if (a.state.alpha != b.state.alpha)
        out.fail("ablated run and zero-rate run diverged in learned rates");
    if (a.log.size() != b.log.size()) {
        out.fail("ablated run and zero-rate run logged different lengths");
    } else {
        for (size_t i = 0; i < a.log.size(); ++i) {
            const TrainLogRow &ra = a.log[i], &rb = b.log[i];
            if (ra.support_loss != rb.support_loss || ra.query_loss != rb.query_loss ||
                ra.lrup_loss != rb.lrup_loss || ra.skipped_instances != rb.skipped_instances) {
                out.fail("ablated run and zero-rate run diverged at logged step " +
                         std::to_string(i));
                break;
            }
        }
    }
    return out;
}

// ----- 6: synthetic inductive generalization -----

struct SynthRun {
    double hits = 0.0;
    double auc = 0.0;
    double few_hits = 0.0;  // weighted over the budget-3 and budget-5 relations
    int selected_epoch = -1;
};

// The element-wise learning rates receive additive gradient-product updates
// with no clamp, so long runs eventually push some coordinates past the point
// where an inner step overshoots and the parameters blow up. Each run
// therefore keeps the per-epoch checkpoint that ranks a held-out set best and
// reports that model; blown-up epochs never win because their ranking metric
// is NaN or their weights trip the magnitude guard.
SynthRun run_synth_once(const InductiveDataset& ds, TrainMode mode, uint64_t seed,
                        Outcome& out) {
    TrainConfig cfg;
    cfg.mode = mode;
    cfg.h = 1;
    cfg.layers = 2;
    cfg.dim = 12;
    cfg.gamma = 1.0;
    cfg.beta = 1e-3;
    cfg.beta_prime = 5e-4;
    cfg.margin = 1.0;
    cfg.alpha_init = 1e-3;
    cfg.epochs = 500;
    cfg.meta_updates = 100;
    cfg.max_nodes = 30;
    cfg.relations_per_batch = 2;
    cfg.instances_per_relation = 3;
    cfg.negatives_per_positive = 3;
    cfg.seed = seed;

    TrainData data = make_train_data(ds.train_graph, ds.train_triplets, cfg.gamma);

    std::vector<int64_t> counts(size_t(ds.train_graph.n_relations), 0);
    for (const Triplet& t : ds.train_triplets) ++counts[size_t(t.rel)];
    const double k_t = double(ds.train_triplets.size()) /
                       double(data.n_graph_relations) * cfg.gamma;

    // Selection set: the held-out validation triplets plus the few-shot
    // training triplets. The latter keep the low-budget relation rows in the
    // picture; validation alone covers only the high-budget relations and
    // would miss damage confined to the low-budget rows.
    std::vector<Triplet> sel_triplets = ds.valid_triplets;
    for (const Triplet& t : ds.train_triplets)
        if (double(counts[size_t(t.rel)]) <= k_t) sel_triplets.push_back(t);

    EvalConfig sel_cfg;
    sel_cfg.h = cfg.h;
    sel_cfg.max_nodes = cfg.max_nodes;
    sel_cfg.seed = 1234;
    sel_cfg.n_negatives = 99;

    std::vector<double> best_theta;
    double best_score = -1.0;
    int best_epoch = -1;
    TrainHooks hooks;
    hooks.on_epoch_end = [&](const MetaState& s) {
        if (s.epoch % 3 != 0) return;
        double max_abs = 0.0;
        for (double x : s.theta.values) max_abs = std::max(max_abs, std::fabs(x));
        if (!(max_abs < 1e3)) return;
        EvalReport v =
            evaluate(s.theta, ds.train_graph, sel_triplets, counts, k_t, sel_cfg);
        double few_n = 0.0, few_acc = 0.0;
        for (const RelationStats& rs : v.per_relation) {
            if (counts[size_t(rs.relation)] > 0 &&
                double(counts[size_t(rs.relation)]) <= k_t) {
                few_n += double(rs.n_triplets);
                few_acc += rs.hits * double(rs.n_triplets);
            }
        }
        const double score =
            (v.auc_pr + v.hits + (few_n > 0.0 ? few_acc / few_n : 0.0)) / 3.0;
        if (std::isnan(score) || score <= best_score) return;
        best_score = score;
        best_epoch = int(s.epoch);
        best_theta = s.theta.values;
    };

    std::string abort_reason;
    try {
        train(cfg, data, hooks);
    } catch (const std::exception& e) {
        // A batch whose sampled instances all lack subgraphs aborts the loop;
        // the checkpoint chosen so far still stands.
        abort_reason = e.what();
    }

    SynthRun run;
    if (best_theta.empty()) {
        out.fail(mode_name(mode) + " seed " + std::to_string(seed) +
                 ": no usable checkpoint" +
                 (abort_reason.empty() ? "" : " (" + abort_reason + ")"));
        return run;
    }
    run.selected_epoch = best_epoch;

    ModelParams p;
    p.shape = {data.n_graph_relations, cfg.dim, cfg.h, cfg.layers};
    p.values = std::move(best_theta);

    EvalConfig ec;
    ec.h = cfg.h;
    ec.max_nodes = cfg.max_nodes;
    ec.seed = seed;
    EvalReport rep = evaluate(p, ds.test_graph, ds.test_triplets, counts, k_t, ec);

    run.hits = rep.hits;
    run.auc = rep.auc_pr;
    int64_t few_n = 0;
    double few_acc = 0.0;
    for (const RelationStats& rs : rep.per_relation) {
        if (counts[size_t(rs.relation)] > 0 && double(counts[size_t(rs.relation)]) <= k_t) {
            few_n += rs.n_triplets;
            few_acc += rs.hits * double(rs.n_triplets);
        }
    }
    if (few_n == 0)
        out.fail(mode_name(mode) + " seed " + std::to_string(seed) +
                 ": no usable queries on the few-shot relations");
    else
        run.few_hits = few_acc / double(few_n);
    return run;
}

Outcome check_synthetic_generalization() {
    Outcome out;
    // Write the generated dataset out and reload it so the check runs the
    // same pipeline as the command-line tools. Reloading also pins the id
    // numbering (assigned by file order) that the sampled negatives depend on.
    testdata::TempDir dir("synthgen");
    write_dataset(generate(default_synth_spec()), dir.path().string());
    InductiveDataset ds = load_inductive_dataset(dir.path().string());

    const std::vector<uint64_t> seeds = {1, 2, 3, 4};
    double full_hits = 0.0, full_auc = 0.0, full_few = 0.0, ablated_few = 0.0;
    for (uint64_t s : seeds) {
        SynthRun full = run_synth_once(ds, TrainMode::MetaSgd, s, out);
        SynthRun norpo = run_synth_once(ds, TrainMode::NoRpo, s, out);
        std::ostringstream row;
        row.precision(4);
        row << "seed " << s << ": full auc " << full.auc << " hits " << full.hits
            << " few " << full.few_hits << " (epoch " << full.selected_epoch
            << "), ablated few " << norpo.few_hits;
        out.note(row.str());
        full_hits += full.hits;
        full_auc += full.auc;
        full_few += full.few_hits;
        ablated_few += norpo.few_hits;
    }
    const double n = double(seeds.size());
    full_hits /= n;
    full_auc /= n;
    full_few /= n;
    ablated_few /= n;

    std::ostringstream detail;
    detail.precision(4);
    detail << "hits@10 " << full_hits << ", auc-pr " << full_auc << ", few-shot hits@10 "
           << full_few << " (ablated " << ablated_few << "), mean of " << seeds.size()
           << " seeds";
    out.note(detail.str());

    if (full_hits < 0.90) out.fail("hits@10 below 0.90");
    if (full_auc < 0.95) out.fail("auc-pr below 0.95");
    if (full_few < 0.80) out.fail("few-shot hits@10 below 0.80");
    if (!(ablated_few < full_few))
        out.fail("single-pool ablation did not score strictly lower on few-shot relations");
    return out;
}

// ----- 7: overfit one fixed batch -----

Outcome check_overfit_one_batch() {
    Outcome out;
    RingData ring;
    TrainData data = make_train_data(ring.g, ring.targets, 1.0);
    Rng rng(0xacce97a2ce07ull);
    TaskBatch tasks = sample_tasks(data, TaskSide::All, 2, 2, 2, rng);
    PreparedBatch batch = prepare_batch(ring.g, tasks, 2, 500,
                                        DirectionMode::PathConsistent);
    if (batch.instances.empty()) {
        out.fail("fixed batch came up empty");
        return out;
    }
    ModelParams p = init_params(ring.g.n_relations, 8, 2, 1, 0xbeef);
    AdamState adam;
    double loss = 0.0;
    for (int it = 0; it < 200; ++it) {
        BatchEval be = batch_loss_and_grad(p, batch, 10.0);
        loss = be.loss;
        if (loss < 0.01) break;
        p.values = adam.step(p.values, 5e-2, be.grad);
    }
    std::ostringstream detail;
    detail.precision(4);
    detail << "final hinge loss " << loss << " on " << batch.instances.size()
           << " instances";
    out.note(detail.str());
    if (!(loss < 0.01)) out.fail("hinge loss did not reach 0.01 within 200 iterations");
    return out;
}

// ----- 8: ballpark benchmark (best effort) -----

Outcome check_ballpark_benchmark() {
    Outcome out;
    auto dir = benchmark_dir("fb-v1");
    if (!dir) {
        out.skipped = true;
        out.note("no on-disk fb-v1 split (set METAIKG_BENCHMARKS); nothing to run");
        return out;
    }
    InductiveDataset ds = load_inductive_dataset(dir->string());
    const std::vector<uint64_t> seeds = {1, 2, 3, 4};
    double mean_auc = 0.0;
    for (uint64_t s : seeds) {
        TrainConfig cfg;  // defaults: h=3, gamma=0.1, beta=1e-3, 20 x 100 updates
        cfg.seed = s;
        TrainData data = make_train_data(ds.train_graph, ds.train_triplets, cfg.gamma);
        TrainResult res = train(cfg, data);
        for (const TrainLogRow& row : res.log)
            if (row.iteration % 100 == 0)
                std::printf("        seed %llu iter %lld support %.4f query %.4f\n",
                            (unsigned long long)s, (long long)row.iteration,
                            row.support_loss, row.query_loss);
        std::vector<int64_t> counts(size_t(ds.train_graph.n_relations), 0);
        for (const Triplet& t : ds.train_triplets) ++counts[size_t(t.rel)];
        const double k_t = double(ds.train_triplets.size()) /
                           double(data.n_graph_relations) * cfg.gamma;
        EvalConfig ec;
        ec.seed = s;
        EvalReport rep = evaluate(res.state.theta, ds.test_graph, ds.test_triplets,
                                  counts, k_t, ec);
        mean_auc += rep.auc_pr / double(seeds.size());
    }
    std::ostringstream detail;
    detail.precision(4);
    detail << "mean auc-pr " << mean_auc << " over 4 seeds (threshold 0.70)";
    out.note(detail.str());
    if (mean_auc < 0.70) out.fail("below the 0.70 ballpark");
    return out;
}

}  // namespace

int main() {
    struct Check {
        int num;
        const char* name;
        bool required;
        Outcome (*fn)();
    };
    const std::vector<Check> checks = {
        {1, "dataset statistics match the published split tables", true,
         check_dataset_stats},
        {2, "subgraph extraction matches the walk-enumeration oracle", true,
         check_extraction_oracle},
        {3, "analytic gradients match central finite differences", true,
         check_gradient_fidelity},
        {4, "ranking metrics match brute-force oracles", true, check_metric_oracles},
        {5, "update equations hold in closed form; ablation is bit-identical", true,
         check_update_closed_forms},
        {6, "synthetic dataset: generalization to unseen entities", true,
         check_synthetic_generalization},
        {7, "one fixed batch overfits to near-zero hinge loss", true,
         check_overfit_one_batch},
        {8, "ballpark score on the real benchmark (best effort)", false,
         check_ballpark_benchmark},
    };

    int failures = 0;
    for (const Check& c : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out.fail(std::string("unhandled error: ") + e.what());
        }
        const double dt = seconds_since(t0);
        const char* tag = out.skipped ? "SKIP" : (out.ok ? "PASS" : (c.required ? "FAIL" : "WARN"));
        std::printf("[%s] %d. %s  (%.1fs)\n", tag, c.num, c.name, dt);
        for (const std::string& d : out.details) std::printf("       - %s\n", d.c_str());
        if (!out.ok && c.required) ++failures;
    }
    if (failures > 0) {
        std::printf("%d required check(s) failed\n", failures);
        return 1;
    }
    std::printf("all required checks passed\n");
    return 0;
}
