#include "metaikg/kg_store.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_set>

namespace metaikg {

namespace {

std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return s.substr(b, e - b);
}

}  // namespace

std::vector<Triplet> load_triplets(const std::string& path, Vocabulary& entities,
                                   Vocabulary& relations) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open triplet file: " + path);

    std::vector<Triplet> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view full = trim(line);
        if (full.empty()) continue;

        std::string_view fields[3];
        size_t n_fields = 0;
        size_t start = 0;
        bool overflow = false;
        for (size_t i = 0; i <= full.size(); ++i) {
            if (i == full.size() || full[i] == '\t') {
                std::string_view f = trim(full.substr(start, i - start));
                if (n_fields < 3)
                    fields[n_fields] = f;
                else
                    overflow = true;
                ++n_fields;
                start = i + 1;
            }
        }
        if (n_fields != 3 || overflow || fields[0].empty() || fields[1].empty() ||
            fields[2].empty())
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected 3 tab-separated fields, got " +
                            std::to_string(n_fields));

        Triplet t;
        t.head = entities.intern(fields[0]);
        t.rel = relations.intern(fields[1]);
        t.tail = entities.intern(fields[2]);
        out.push_back(t);
    }
    return out;
}

void save_triplets(const std::string& path, const std::vector<Triplet>& triplets,
                   const Vocabulary& entities, const Vocabulary& relations) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write triplet file: " + path);
    for (const Triplet& t : triplets)
        out << entities.name(t.head) << '\t' << relations.name(t.rel) << '\t'
            << entities.name(t.tail) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

InductiveDataset load_inductive_dataset(const std::string& dir,
                                        const DatasetLayout& layout) {
    namespace fs = std::filesystem;
    auto path_of = [&](const std::string& f) { return (fs::path(dir) / f).string(); };

    InductiveDataset ds;

    std::vector<Triplet> train_facts =
        load_triplets(path_of(layout.train), ds.entities, ds.relations);
    const int32_t train_rel_vocab = ds.relations.size();
    ds.n_train_relations = train_rel_vocab;

    if (fs::exists(path_of(layout.train_targets))) {
        ds.train_triplets =
            load_triplets(path_of(layout.train_targets), ds.entities, ds.relations);
        ds.has_targets_file = true;
    } else {
        ds.train_triplets = train_facts;
    }

    ds.valid_triplets = load_triplets(path_of(layout.valid), ds.entities, ds.relations);

    // The two inductive files may introduce entities but never relations.
    auto check_relations = [&](const std::vector<Triplet>& ts, const std::string& file) {
        for (const Triplet& t : ts)
            if (t.rel >= train_rel_vocab)
                throw DataError(file + ": relation '" + ds.relations.name(t.rel) +
                                "' does not occur in the train graph");
    };
    std::vector<Triplet> test_facts =
        load_triplets(path_of(layout.test_graph), ds.entities, ds.relations);
    check_relations(test_facts, layout.test_graph);
    ds.test_triplets = load_triplets(path_of(layout.test), ds.entities, ds.relations);
    check_relations(ds.test_triplets, layout.test);

    // Graphs share the final id space so subgraphs and scoring use one vocab.
    ds.train_graph = build_graph(train_facts, ds.entities.size(), ds.relations.size());
    ds.test_graph = build_graph(test_facts, ds.entities.size(), ds.relations.size());

    std::unordered_set<int32_t> test_rels;
    for (const Triplet& t : test_facts) test_rels.insert(t.rel);
    for (const Triplet& t : ds.test_triplets) test_rels.insert(t.rel);
    ds.n_test_relations = int32_t(test_rels.size());

    ds.train_entities = int64_t(ds.train_graph.active_entities.size());
    ds.test_entities = int64_t(ds.test_graph.active_entities.size());
    {
        std::unordered_set<int32_t> train_ents(ds.train_graph.active_entities.begin(),
                                               ds.train_graph.active_entities.end());
        int64_t overlap = 0;
        for (int32_t e : ds.test_graph.active_entities)
            if (train_ents.count(e)) ++overlap;
        ds.test_entities_seen_in_train = overlap;
    }
    return ds;
}

nlohmann::ordered_json dataset_stats(const InductiveDataset& ds) {
    nlohmann::ordered_json j;
    j["train_relations"] = ds.n_train_relations;
    j["train_graph"] = ds.train_graph.edges.size();
    j["train_triplets"] = ds.train_triplets.size();
    j["validation_triplets"] = ds.valid_triplets.size();
    j["test_relations"] = ds.n_test_relations;
    j["test_graph"] = ds.test_graph.edges.size();
    j["test_triplets"] = ds.test_triplets.size();
    j["train_entities"] = ds.train_entities;
    j["test_entities"] = ds.test_entities;
    j["test_entities_seen_in_train"] = ds.test_entities_seen_in_train;
    j["has_targets_file"] = ds.has_targets_file;
    return j;
}

uint64_t vocab_hash(const Vocabulary& entities, const Vocabulary& relations) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const std::string& n : entities.names()) {
        h = fnv1a64("e:", h);
        h = fnv1a64(n, h);
    }
    for (const std::string& n : relations.names()) {
        h = fnv1a64("r:", h);
        h = fnv1a64(n, h);
    }
    return h;
}

}  // namespace metaikg
