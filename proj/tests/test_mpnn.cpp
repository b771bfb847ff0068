#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "metaikg/kg.hpp"
#include "metaikg/mpnn.hpp"
#include "metaikg/subgraph.hpp"
#include "oracles.hpp"
#include "testdata.hpp"

using namespace metaikg;

namespace {

bool close_rel(double got, double want, double rtol, double atol = 1e-12) {
    return std::abs(got - want) <= atol + rtol * std::max(1.0, std::abs(want));
}

// One positive plus tail-corrupted negatives drawn from a random graph.
struct FdCase {
    EnclosingSubgraph pos;
    std::vector<EnclosingSubgraph> negs;
    oracles::RandomCase c;
};

std::optional<FdCase> draw_fd_case(Rng& rng) {
    oracles::RandomCase c = oracles::random_case(rng, 8, 3);
    auto pos = extract_enclosing_subgraph(c.g, c.target, c.h);
    if (!pos) return std::nullopt;
    std::vector<EnclosingSubgraph> negs;
    for (int k = 0; k < 12 && negs.size() < 2; ++k) {
        Triplet t = c.target;
        t.tail = int32_t(rng.below(uint64_t(c.g.n_entities)));
        if (t == c.target) continue;
        if (auto n = extract_enclosing_subgraph(c.g, t, c.h)) negs.push_back(std::move(*n));
    }
    if (negs.empty()) return std::nullopt;
    return FdCase{std::move(*pos), std::move(negs), std::move(c)};
}

}  // namespace

TEST_CASE("parameter layout and count") {
    ModelShape s{183, 32, 3, 3};
    CHECK(s.in_dim() == 8);
    CHECK(s.total_params() == 27744);
    CHECK(s.rel_off() == 0);
    CHECK(s.w_in_off() == 183 * 32);
    CHECK(s.w_edge_init_off() == s.w_in_off() + 32 * 8);
    CHECK(s.w_gate_off(0) == s.w_edge_off(0) + 3 * 32 * 32);
    CHECK(s.w_node_off(0) == s.w_edge_off(0) + 5 * 32 * 32);
    CHECK(s.layer_off(1) == s.layer_off(0) + 6 * 32 * 32);
    CHECK(s.w_out_off() + 4 * 32 == s.total_params());
}

TEST_CASE("initialisation is seed-deterministic and bounded") {
    ModelParams a = init_params(7, 8, 2, 2, 42);
    ModelParams b = init_params(7, 8, 2, 2, 42);
    ModelParams c = init_params(7, 8, 2, 2, 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    CHECK(a.values.size() == a.shape.total_params());
    double mx = 0.0;
    for (double v : a.values) mx = std::max(mx, std::abs(v));
    CHECK(mx <= 1.0);
    CHECK(mx > 0.0);
}

TEST_CASE("all-zero parameters score zero") {
    KnowledgeGraph g = build_graph({{0, 0, 1}, {1, 1, 2}, {0, 2, 2}}, 3, 3);
    auto sg = extract_enclosing_subgraph(g, {0, 2, 2}, 1);
    REQUIRE(sg.has_value());
    ModelParams p;
    p.shape = {3, 4, 1, 2};
    p.values.assign(p.shape.total_params(), 0.0);
    CHECK(score_subgraph(p, *sg) == 0.0);
}

TEST_CASE("readout-only parameters give closed-form loss and gradient") {
    // Only the target-relation embedding feeds the score: S = R[rel][0].
    KnowledgeGraph g = build_graph({{0, 2, 1}}, 2, 3);
    auto pos = extract_enclosing_subgraph(g, {0, 0, 1}, 1);
    auto neg = extract_enclosing_subgraph(g, {0, 1, 1}, 1);
    REQUIRE(pos.has_value());
    REQUIRE(neg.has_value());

    ModelParams p;
    p.shape = {3, 4, 1, 1};
    p.values.assign(p.shape.total_params(), 0.0);
    const size_t d = 4;
    p.values[0 * d + 0] = 5.0;                  // R[0][0], positive target
    p.values[1 * d + 0] = 1.0;                  // R[1][0], negative target
    p.values[p.shape.w_out_off() + 2 * d] = 1.0;

    CHECK(score_subgraph(p, *pos) == 5.0);
    CHECK(score_subgraph(p, *neg) == 1.0);
    CHECK(hinge_loss(p, *pos, {*neg}, 10.0) == 6.0);
    CHECK(hinge_loss(p, *pos, {*neg}, 3.0) == 0.0);

    auto lg = loss_and_grad(p, *pos, {*neg}, 10.0);
    CHECK(lg.loss == 6.0);
    CHECK(lg.active_hinges == 1);
    REQUIRE(lg.grad.size() == p.values.size());
    for (size_t i = 0; i < lg.grad.size(); ++i) {
        double want = 0.0;
        if (i == 0) want = -1.0;                        // R[0][0]
        if (i == d) want = 1.0;                         // R[1][0]
        if (i == p.shape.w_out_off() + 2 * d) want = -4.0;
        CHECK(lg.grad[i] == want);
    }

    auto slack = loss_and_grad(p, *pos, {*neg}, 3.0);
    CHECK(slack.loss == 0.0);
    CHECK(slack.active_hinges == 0);
    for (double v : slack.grad) CHECK(v == 0.0);

    auto two = loss_and_grad(p, *pos, {*neg, *neg}, 10.0);
    CHECK(two.loss == 12.0);
    CHECK(two.active_hinges == 2);
}

TEST_CASE("forward pass matches the straight-line oracle") {
    Rng rng(0x50f7);
    int done = 0;
    for (int trial = 0; trial < 400 && done < 40; ++trial) {
        oracles::RandomCase c = oracles::random_case(rng, 9, 3);
        auto sg = extract_enclosing_subgraph(c.g, c.target, c.h);
        if (!sg) continue;
        ModelParams p = init_params(c.g.n_relations, 5, c.h, 2, 1000 + uint64_t(trial));
        double got = score_subgraph(p, *sg);
        double want = oracles::straightline_score(p, *sg);
        CAPTURE(trial);
        CHECK(close_rel(got, want, 1e-9));
        ++done;
    }
    CHECK(done == 40);
}

TEST_CASE("score is invariant to entity id permutation") {
    Rng rng(0xbeef);
    int done = 0;
    for (int trial = 0; trial < 300 && done < 25; ++trial) {
        oracles::RandomCase c = oracles::random_case(rng, 10, 3);
        auto sg1 = extract_enclosing_subgraph(c.g, c.target, c.h);
        if (!sg1) continue;

        std::vector<int32_t> perm(size_t(c.g.n_entities));
        for (size_t i = 0; i < perm.size(); ++i) perm[i] = int32_t(i);
        rng.shuffle(perm);
        std::vector<Triplet> edges;
        for (const auto& t : c.g.edges)
            edges.push_back({perm[size_t(t.head)], t.rel, perm[size_t(t.tail)]});
        KnowledgeGraph g2 = build_graph(edges, c.g.n_entities, c.g.n_relations);
        Triplet t2{perm[size_t(c.target.head)], c.target.rel, perm[size_t(c.target.tail)]};
        auto sg2 = extract_enclosing_subgraph(g2, t2, c.h);
        REQUIRE(sg2.has_value());
        REQUIRE(sg2->nodes.size() == sg1->nodes.size());

        ModelParams p = init_params(c.g.n_relations, 6, c.h, 2, 7 + uint64_t(trial));
        double s1 = score_subgraph(p, *sg1);
        double s2 = score_subgraph(p, *sg2);
        CAPTURE(trial);
        CHECK(close_rel(s2, s1, 1e-9));
        ++done;
    }
    CHECK(done == 25);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(0x6d);
    int done = 0;
    for (int trial = 0; trial < 200 && done < 8; ++trial) {
        auto fc = draw_fd_case(rng);
        if (!fc) continue;
        ModelParams p = init_params(fc->c.g.n_relations, 4, fc->c.h, 2, 500 + uint64_t(done));
        auto lg = loss_and_grad(p, fc->pos, fc->negs, 10.0);
        auto fd = oracles::fd_grad(p, fc->pos, fc->negs, 10.0, 1e-5);
        REQUIRE(fd.size() == lg.grad.size());
        size_t bad = 0;
        double worst = 0.0;
        for (size_t i = 0; i < fd.size(); ++i) {
            double err = std::abs(lg.grad[i] - fd[i]);
            double tol = 1e-9 + 1e-4 * std::abs(fd[i]);
            if (err > tol) ++bad;
            worst = std::max(worst, err);
        }
        CAPTURE(trial);
        CAPTURE(worst);
        CHECK(bad == 0);
        CHECK(lg.loss > 0.0);  // margin 10 keeps the hinge active from init
        ++done;
    }
    CHECK(done == 8);
}

TEST_CASE("relation embeddings only receive gradient from present relations") {
    Rng rng(0x10c);
    int done = 0;
    for (int trial = 0; trial < 200 && done < 10; ++trial) {
        auto fc = draw_fd_case(rng);
        if (!fc) continue;
        const int32_t n_rel = fc->c.g.n_relations + 3;  // leave absent rows
        ModelParams p = init_params(n_rel, 4, fc->c.h, 2, 900 + uint64_t(done));
        auto lg = loss_and_grad(p, fc->pos, fc->negs, 10.0);

        std::set<int32_t> present{fc->pos.target_rel};
        for (const auto& e : fc->pos.edges) present.insert(e.rel);
        for (const auto& n : fc->negs) {
            present.insert(n.target_rel);
            for (const auto& e : n.edges) present.insert(e.rel);
        }
        for (int32_t r = 0; r < n_rel; ++r) {
            if (present.count(r)) continue;
            for (int32_t k = 0; k < 4; ++k) CHECK(lg.grad[size_t(r) * 4 + size_t(k)] == 0.0);
        }
        ++done;
    }
    CHECK(done == 10);
}

TEST_CASE("scoring validates its inputs") {
    ModelParams p = init_params(3, 4, 2, 1, 1);
    EnclosingSubgraph empty;
    CHECK_THROWS_AS(score_subgraph(p, empty), DataError);

    KnowledgeGraph g = build_graph({{0, 0, 1}, {1, 1, 2}}, 3, 3);
    auto sg = extract_enclosing_subgraph(g, {0, 2, 2}, 1);
    REQUIRE(sg.has_value());
    CHECK_THROWS_AS(score_subgraph(p, *sg), DataError);  // hop 1 vs model h 2

    auto sg2 = extract_enclosing_subgraph(g, {0, 2, 2}, 2);
    REQUIRE(sg2.has_value());
    EnclosingSubgraph bad_rel = *sg2;
    bad_rel.target_rel = 99;
    CHECK_THROWS_AS(score_subgraph(p, bad_rel), DataError);
}

TEST_CASE("checkpoints round-trip every field") {
    testdata::TempDir dir("ckpt");
    std::string path = (dir.path() / "model.ckpt").string();

    ModelParams p = init_params(7, 6, 2, 2, 11);
    std::vector<double> alpha(p.values.size());
    for (size_t i = 0; i < alpha.size(); ++i) alpha[i] = 1e-3 + 1e-6 * double(i);
    CheckpointMeta meta;
    meta.vocab_hash = 0xabcdef0123456789ull;
    meta.rng_state = Rng(5).state();
    meta.iteration = 42;
    meta.epoch = 3;
    meta.seed = 9;
    meta.mode = "meta-sgd";
    save_checkpoint(path, p, alpha, meta);

    Checkpoint ck = load_checkpoint(path);
    CHECK(ck.params.shape == p.shape);
    CHECK(ck.params.values == p.values);
    REQUIRE(ck.alpha.has_value());
    CHECK(*ck.alpha == alpha);
    CHECK(ck.meta.vocab_hash == meta.vocab_hash);
    CHECK(ck.meta.rng_state == meta.rng_state);
    CHECK(ck.meta.iteration == 42);
    CHECK(ck.meta.epoch == 3);
    CHECK(ck.meta.seed == 9);
    CHECK(ck.meta.mode == "meta-sgd");

    std::string path2 = (dir.path() / "noalpha.ckpt").string();
    save_checkpoint(path2, p, std::nullopt, meta);
    Checkpoint ck2 = load_checkpoint(path2);
    CHECK_FALSE(ck2.alpha.has_value());
    CHECK(ck2.params.values == p.values);
}

TEST_CASE("corrupted checkpoints are rejected") {
    testdata::TempDir dir("ckptbad");
    std::string good = (dir.path() / "good.ckpt").string();
    ModelParams p = init_params(3, 4, 1, 1, 2);
    CheckpointMeta meta;
    save_checkpoint(good, p, std::nullopt, meta);

    CHECK_THROWS_AS(load_checkpoint((dir.path() / "missing.ckpt").string()), DataError);

    std::string text = (dir.path() / "text.ckpt").string();
    std::ofstream(text) << "not a checkpoint\n";
    CHECK_THROWS_AS(load_checkpoint(text), DataError);

    std::ifstream in(good, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string bytes = buf.str();
    size_t nl = bytes.find('\n');
    REQUIRE(nl != std::string::npos);

    auto header = nlohmann::json::parse(bytes.substr(0, nl));
    header["flatten_order"] = "bogus";
    std::string reordered = (dir.path() / "order.ckpt").string();
    std::ofstream(reordered, std::ios::binary)
        << header.dump() << '\n' << bytes.substr(nl + 1);
    CHECK_THROWS_WITH_AS(load_checkpoint(reordered),
                         doctest::Contains("flattening"), DataError);

    std::string cut = (dir.path() / "cut.ckpt").string();
    std::ofstream(cut, std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    CHECK_THROWS_AS(load_checkpoint(cut), DataError);
}
