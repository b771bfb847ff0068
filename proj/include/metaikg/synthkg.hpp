#pragma once

// Rule-governed synthetic datasets with disjoint train/test entity sets.
//
// Base (and noise) relations are random directed edges; each rule head
// r_h(x, z) is materialized exactly where a 2-hop body r_1(x, y), r_2(y, z)
// holds with x != z. Train-side rule heads are split into graph facts,
// training targets, and validation; designated few-shot relations keep only
// a fixed budget. Test-side rule heads are split into test-graph facts and
// held-out test triplets, so every body-supported pair stays a known true
// fact and filtered corruptions can never be rule-derivable.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "metaikg/kg.hpp"

namespace metaikg {

struct SynthRule {
    int32_t head_rel = 0;
    int32_t body1 = 0;
    int32_t body2 = 0;
};

struct SynthSpec {
    int32_t n_entities_train = 200;
    int32_t n_entities_test = 100;
    int32_t n_base_relations = 8;
    int32_t n_noise_relations = 2;
    std::vector<SynthRule> rules;  // relation ids; see default_synth_spec
    double base_edge_density = 1.0;  // expected out-degree per entity per relation
    std::vector<std::pair<int32_t, int32_t>> few_shot_budgets;  // (head_rel, budget)
    double train_target_fraction = 0.5;  // of large-shot graph facts, listed as targets
    double valid_fraction = 0.1;         // of large-shot heads, held out for validation
    double test_holdout_fraction = 0.5;  // of test-side heads, held out as test triplets
    uint64_t seed = 7;
};

// 8 base + 2 noise relations, 4 rules rh_i(x,z) <- base_{2i}(x,y) ^
// base_{2i+1}(y,z), with rh2 and rh3 few-shot at budgets 3 and 5.
SynthSpec default_synth_spec();

struct SynthDataset {
    Vocabulary entities;   // train entities first, then test entities
    Vocabulary relations;  // base, noise, rule heads, in id order
    int32_t n_entities_train = 0;
    std::vector<Triplet> train_graph_facts;
    std::vector<Triplet> train_targets;  // subset of train_graph_facts
    std::vector<Triplet> valid_triplets;
    std::vector<Triplet> test_graph_facts;
    std::vector<Triplet> test_triplets;  // disjoint from test_graph_facts
    nlohmann::ordered_json ground_truth;
};

SynthDataset generate(const SynthSpec& spec);

// Writes the TSV layout the dataset loader consumes (train.txt,
// train_triplets.txt, valid.txt, train_ind.txt, test_ind.txt) plus
// ground_truth.json. Creates the directory if needed.
void write_dataset(const SynthDataset& ds, const std::string& dir);

}  // namespace metaikg
