#pragma once

// Disk layer for inductive link-prediction datasets.
//
// A dataset directory holds UTF-8 tab-separated triplet files:
//   train.txt           train graph facts
//   train_triplets.txt  training targets (optional; defaults to train.txt).
//                       Benchmark releases filter targets down to triplets
//                       that have an enclosing subgraph, so the target list
//                       is usually a strict subset of the graph.
//   valid.txt           validation triplets (never inserted into any graph)
//   train_ind.txt       test graph facts (fresh entities, known relations)
//   test_ind.txt        test triplets (not edges of the test graph)
//
// Vocabularies are shared across all files; relations appearing in the two
// inductive files must already exist in the train graph (hard error
// otherwise). Test entities are expected to be fresh but that is only
// checked and reported, never enforced.

#include <string>
#include <vector>

#include "json.hpp"
#include "metaikg/kg.hpp"

namespace metaikg {

// Parses one TSV triplet file. Lines are trimmed, blank lines skipped;
// a line without exactly three tab-separated fields raises DataError with
// the line number. Duplicate triplets are preserved (multiplicity matters).
std::vector<Triplet> load_triplets(const std::string& path, Vocabulary& entities,
                                   Vocabulary& relations);

void save_triplets(const std::string& path, const std::vector<Triplet>& triplets,
                   const Vocabulary& entities, const Vocabulary& relations);

struct DatasetLayout {
    std::string train = "train.txt";
    std::string train_targets = "train_triplets.txt";  // optional on disk
    std::string valid = "valid.txt";
    std::string test_graph = "train_ind.txt";
    std::string test = "test_ind.txt";
};

struct InductiveDataset {
    Vocabulary entities;
    Vocabulary relations;
    KnowledgeGraph train_graph;
    KnowledgeGraph test_graph;
    std::vector<Triplet> train_triplets;  // training targets
    std::vector<Triplet> valid_triplets;
    std::vector<Triplet> test_triplets;
    int32_t n_train_relations = 0;  // distinct relations in the train graph
    int32_t n_test_relations = 0;   // distinct relations in test graph + test triplets
    int64_t train_entities = 0;     // active in train graph
    int64_t test_entities = 0;      // active in test graph
    int64_t test_entities_seen_in_train = 0;
    bool has_targets_file = false;
};

InductiveDataset load_inductive_dataset(const std::string& dir,
                                        const DatasetLayout& layout = {});

// Counts report matching the benchmark table columns plus entity accounting.
nlohmann::ordered_json dataset_stats(const InductiveDataset& ds);

// Order-sensitive hash over both vocabularies; stored in checkpoints so a
// model is never scored against a differently-interned dataset.
uint64_t vocab_hash(const Vocabulary& entities, const Vocabulary& relations);

}  // namespace metaikg
