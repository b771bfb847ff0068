// Command-line front end: dataset statistics, training (full and ablations),
// evaluation, the K-sweep experiment, and synthetic dataset generation.
//
// Exit codes: 0 success, 2 configuration/usage errors, 3 data errors,
// 4 anything else.

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "metaikg/common.hpp"
#include "metaikg/evaluator.hpp"
#include "metaikg/kg.hpp"
#include "metaikg/kg_store.hpp"
#include "metaikg/meta_trainer.hpp"
#include "metaikg/mpnn.hpp"
#include "metaikg/subgraph.hpp"
#include "metaikg/synthkg.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace metaikg;

namespace {

struct CliConfig {
    std::string dataset;
    std::string out;
    std::string mode = "meta-sgd";
    int32_t h = 3;
    int32_t layers = 3;
    int32_t dim = 32;
    double gamma = 0.1;
    double beta = 1e-3;
    double beta_prime = 1e-4;
    double margin = 10.0;
    double alpha_init = 1e-3;
    int32_t epochs = 20;
    int32_t meta_updates = 100;
    int32_t max_nodes = 500;
    int32_t relations_per_batch = 2;
    int32_t instances_per_relation = 2;
    int32_t negatives_per_positive = 2;
    int32_t inner_steps = 1;
    bool adam_lrup = false;
    std::vector<uint64_t> seeds = {1, 2, 3, 4};
    bool intersect_neighborhoods = false;
    bool unfiltered_negatives = false;
    int32_t eval_negatives = 49;
    bool per_query = false;
    std::string checkpoint;
    std::string resume;
    std::string config_echo;  // --config is pre-scanned; this only echoes it
    // ksweep
    std::vector<std::string> k_values;
    double select_min = 10.0;
    double select_max = 0.0;  // 0 means the computed threshold K_T
    // synth
    uint64_t synth_seed = 7;
    double density = 1.0;
    int32_t train_entities = 200;
    int32_t test_entities = 100;
};

// Exclusive lock file in the output directory: a second writer fails fast
// instead of interleaving files.
class DirLock {
  public:
    explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
        fs::create_directories(dir);
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            throw ConfigError("output directory '" + dir.string() +
                              "' is locked by another run; remove " + path_.string() +
                              " if that run is gone");
        std::string pid = std::to_string(::getpid()) + "\n";
        ssize_t n = ::write(fd_, pid.data(), pid.size());
        (void)n;
    }
    ~DirLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            ::unlink(path_.c_str());
        }
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

  private:
    fs::path path_;
    int fd_ = -1;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f << text;
}

std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return "";
}

void apply_json_config(const std::string& path, CliConfig& c) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    for (const auto& [key, val] : j.items()) {
        try {
            if (key == "dataset") c.dataset = val.get<std::string>();
            else if (key == "out") c.out = val.get<std::string>();
            else if (key == "mode") c.mode = val.get<std::string>();
            else if (key == "h") c.h = val.get<int32_t>();
            else if (key == "layers") c.layers = val.get<int32_t>();
            else if (key == "dim") c.dim = val.get<int32_t>();
            else if (key == "gamma") c.gamma = val.get<double>();
            else if (key == "beta") c.beta = val.get<double>();
            else if (key == "beta_prime") c.beta_prime = val.get<double>();
            else if (key == "margin") c.margin = val.get<double>();
            else if (key == "alpha_init") c.alpha_init = val.get<double>();
            else if (key == "epochs") c.epochs = val.get<int32_t>();
            else if (key == "meta_updates") c.meta_updates = val.get<int32_t>();
            else if (key == "max_nodes") c.max_nodes = val.get<int32_t>();
            else if (key == "relations_per_batch") c.relations_per_batch = val.get<int32_t>();
            else if (key == "instances_per_relation")
                c.instances_per_relation = val.get<int32_t>();
            else if (key == "negatives_per_positive")
                c.negatives_per_positive = val.get<int32_t>();
            else if (key == "inner_steps") c.inner_steps = val.get<int32_t>();
            else if (key == "adam_lrup") c.adam_lrup = val.get<bool>();
            else if (key == "seeds") c.seeds = val.get<std::vector<uint64_t>>();
            else if (key == "intersect_neighborhoods")
                c.intersect_neighborhoods = val.get<bool>();
            else if (key == "unfiltered_negatives") c.unfiltered_negatives = val.get<bool>();
            else if (key == "eval_negatives") c.eval_negatives = val.get<int32_t>();
            else if (key == "per_query") c.per_query = val.get<bool>();
            else if (key == "checkpoint") c.checkpoint = val.get<std::string>();
            else if (key == "resume") c.resume = val.get<std::string>();
            else if (key == "k_values") c.k_values = val.get<std::vector<std::string>>();
            else if (key == "select_min") c.select_min = val.get<double>();
            else if (key == "select_max") c.select_max = val.get<double>();
            else if (key == "synth_seed") c.synth_seed = val.get<uint64_t>();
            else if (key == "density") c.density = val.get<double>();
            else if (key == "train_entities") c.train_entities = val.get<int32_t>();
            else if (key == "test_entities") c.test_entities = val.get<int32_t>();
            else throw ConfigError("config file " + path + ": unknown key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config file " + path + ", key '" + key + "': " + e.what());
        }
    }
}

ordered_json effective_config(const CliConfig& c, const std::string& command) {
    ordered_json j;
    j["command"] = command;
    j["dataset"] = c.dataset;
    j["out"] = c.out;
    j["mode"] = c.mode;
    j["h"] = c.h;
    j["layers"] = c.layers;
    j["dim"] = c.dim;
    j["gamma"] = c.gamma;
    j["beta"] = c.beta;
    j["beta_prime"] = c.beta_prime;
    j["margin"] = c.margin;
    j["alpha_init"] = c.alpha_init;
    j["epochs"] = c.epochs;
    j["meta_updates"] = c.meta_updates;
    j["max_nodes"] = c.max_nodes;
    j["relations_per_batch"] = c.relations_per_batch;
    j["instances_per_relation"] = c.instances_per_relation;
    j["negatives_per_positive"] = c.negatives_per_positive;
    j["inner_steps"] = c.inner_steps;
    j["adam_lrup"] = c.adam_lrup;
    j["seeds"] = c.seeds;
    j["intersect_neighborhoods"] = c.intersect_neighborhoods;
    j["unfiltered_negatives"] = c.unfiltered_negatives;
    j["eval_negatives"] = c.eval_negatives;
    j["per_query"] = c.per_query;
    if (!c.checkpoint.empty()) j["checkpoint"] = c.checkpoint;
    if (!c.resume.empty()) j["resume"] = c.resume;
    if (!c.k_values.empty()) {
        j["k_values"] = c.k_values;
        j["select_min"] = c.select_min;
        j["select_max"] = c.select_max;
    }
    if (command == "synth") {
        j["synth_seed"] = c.synth_seed;
        j["density"] = c.density;
        j["train_entities"] = c.train_entities;
        j["test_entities"] = c.test_entities;
    }
    return j;
}

TrainConfig to_train_config(const CliConfig& c, uint64_t seed) {
    TrainConfig t;
    t.mode = parse_mode(c.mode);
    t.h = c.h;
    t.layers = c.layers;
    t.dim = c.dim;
    t.gamma = c.gamma;
    t.beta = c.beta;
    t.beta_prime = c.beta_prime;
    t.margin = c.margin;
    t.alpha_init = c.alpha_init;
    t.epochs = c.epochs;
    t.meta_updates = c.meta_updates;
    t.max_nodes = c.max_nodes;
    t.relations_per_batch = c.relations_per_batch;
    t.instances_per_relation = c.instances_per_relation;
    t.negatives_per_positive = c.negatives_per_positive;
    t.inner_steps = c.inner_steps;
    t.adam_lrup = c.adam_lrup;
    t.direction = c.intersect_neighborhoods ? DirectionMode::IntersectNeighborhoods
                                             : DirectionMode::PathConsistent;
    t.seed = seed;
    return t;
}

EvalConfig to_eval_config(const CliConfig& c, uint64_t seed) {
    EvalConfig e;
    e.n_negatives = c.eval_negatives;
    e.seed = seed;
    e.filtered = !c.unfiltered_negatives;
    e.h = c.h;
    e.max_nodes = c.max_nodes;
    e.direction = c.intersect_neighborhoods ? DirectionMode::IntersectNeighborhoods
                                             : DirectionMode::PathConsistent;
    e.keep_query_rows = c.per_query;
    return e;
}

std::string train_log_csv(const std::vector<TrainLogRow>& log) {
    std::ostringstream os;
    os << "iteration,support_loss,query_loss,lrup_loss,skipped_instances\n";
    for (const TrainLogRow& r : log)
        os << r.iteration << "," << r.support_loss << "," << r.query_loss << ","
           << r.lrup_loss << "," << r.skipped_instances << "\n";
    return os.str();
}

std::vector<int64_t> target_counts(const InductiveDataset& ds) {
    std::vector<int64_t> counts(size_t(ds.relations.size()), 0);
    for (const Triplet& t : ds.train_triplets) ++counts[size_t(t.rel)];
    return counts;
}

EvalReport eval_dataset(const ModelParams& params, const InductiveDataset& ds,
                        const std::vector<Triplet>& test_triplets, const CliConfig& c,
                        uint64_t seed, double k_t) {
    return evaluate(params, ds.test_graph, test_triplets, target_counts(ds), k_t,
                    to_eval_config(c, seed));
}

int cmd_stats(const CliConfig& c) {
    InductiveDataset ds = load_inductive_dataset(c.dataset);
    ordered_json stats = dataset_stats(ds);
    std::string text = stats.dump(2) + "\n";
    std::cout << text;
    if (!c.out.empty()) {
        fs::create_directories(fs::path(c.out).parent_path().empty()
                                   ? fs::path(".")
                                   : fs::path(c.out).parent_path());
        write_text(c.out, text);
    }
    return 0;
}

int cmd_train(const CliConfig& c, const CLI::App* sub) {
    if (c.out.empty()) throw ConfigError("train requires --out");
    TrainMode mode = parse_mode(c.mode);
    if (mode == TrainMode::NoLrup && sub->count("--beta-prime") > 0)
        std::cerr << "warning: --beta-prime is ignored in no-lrup mode\n";
    if (mode == TrainMode::NoRpo && sub->count("--gamma") > 0)
        std::cerr << "warning: --gamma does not affect task sampling in no-rpo mode\n";

    InductiveDataset ds = load_inductive_dataset(c.dataset);
    uint64_t vhash = vocab_hash(ds.entities, ds.relations);
    TrainData data = make_train_data(ds.train_graph, ds.train_triplets, c.gamma);

    std::optional<ResumePoint> resume;
    std::vector<uint64_t> seeds = c.seeds;
    if (!c.resume.empty()) {
        if (seeds.size() != 1)
            throw ConfigError("--resume continues a single run; pass exactly one seed");
        Checkpoint ck = load_checkpoint(c.resume);
        if (ck.meta.vocab_hash != vhash)
            throw DataError("checkpoint was trained on a different dataset (vocab mismatch)");
        if (ck.meta.mode != c.mode)
            throw ConfigError("checkpoint was trained in mode '" + ck.meta.mode +
                              "', not '" + c.mode + "'");
        if (ck.meta.seed != seeds[0]) {
            std::cerr << "warning: using the checkpoint's seed " << ck.meta.seed << "\n";
            seeds[0] = ck.meta.seed;
        }
        resume = ResumePoint{ck.params, ck.alpha, ck.meta.rng_state, ck.meta.iteration,
                             ck.meta.epoch};
    }

    DirLock lock(c.out);
    write_text(fs::path(c.out) / "config.json", effective_config(c, "train").dump(2) + "\n");

    double k_t = data.split.threshold;
    ordered_json per_seed = ordered_json::array();
    double sum_auc = 0.0, sum_hits = 0.0;
    for (uint64_t seed : seeds) {
        fs::path seed_dir = fs::path(c.out) / ("seed_" + std::to_string(seed));
        fs::create_directories(seed_dir);
        TrainConfig tcfg = to_train_config(c, seed);

        TrainHooks hooks;
        hooks.on_epoch_end = [&](const MetaState& s) {
            CheckpointMeta meta{vhash, s.rng.state(), s.iteration, s.epoch + 1, seed,
                                mode_name(s.mode)};
            std::optional<std::vector<double>> alpha;
            if (!s.alpha.empty()) alpha = s.alpha;
            save_checkpoint((seed_dir / ("epoch_" + std::to_string(s.epoch + 1) + ".ckpt"))
                                .string(),
                            s.theta, alpha, meta);
        };
        TrainResult res = train(tcfg, data, hooks, resume);

        CheckpointMeta meta{vhash, res.state.rng.state(), res.state.iteration,
                            res.state.epoch, seed, mode_name(res.state.mode)};
        std::optional<std::vector<double>> alpha;
        if (!res.state.alpha.empty()) alpha = res.state.alpha;
        save_checkpoint((seed_dir / "final.ckpt").string(), res.state.theta, alpha, meta);
        write_text(seed_dir / "log.csv", train_log_csv(res.log));

        EvalReport report = eval_dataset(res.state.theta, ds, ds.test_triplets, c, seed, k_t);
        write_text(seed_dir / "report.json", report_to_json(report).dump(2) + "\n");
        write_text(seed_dir / "report.csv", report_to_csv(report));
        if (c.per_query) write_text(seed_dir / "queries.tsv", query_rows_tsv(report));

        ordered_json row;
        row["seed"] = seed;
        row["auc_pr"] = report.auc_pr;
        row["hits_at_" + std::to_string(report.hits_k)] = report.hits;
        row["n_test_used"] = report.n_test_used;
        per_seed.push_back(row);
        sum_auc += report.auc_pr;
        sum_hits += report.hits;
        std::cout << "seed " << seed << ": auc_pr=" << report.auc_pr
                  << " hits@" << report.hits_k << "=" << report.hits << "\n";
    }

    ordered_json summary;
    summary["mode"] = c.mode;
    summary["k_t"] = k_t;
    summary["seeds"] = seeds;
    summary["per_seed"] = per_seed;
    summary["mean_auc_pr"] = sum_auc / double(seeds.size());
    summary["mean_hits_at_10"] = sum_hits / double(seeds.size());
    write_text(fs::path(c.out) / "summary.json", summary.dump(2) + "\n");
    std::cout << "mean auc_pr=" << sum_auc / double(seeds.size())
              << " mean hits=" << sum_hits / double(seeds.size()) << "\n";
    return 0;
}

int cmd_eval(const CliConfig& c, const CLI::App* sub) {
    if (c.out.empty()) throw ConfigError("eval requires --out");
    if (c.checkpoint.empty()) throw ConfigError("eval requires --checkpoint");
    InductiveDataset ds = load_inductive_dataset(c.dataset);
    Checkpoint ck = load_checkpoint(c.checkpoint);
    if (ck.meta.vocab_hash != vocab_hash(ds.entities, ds.relations))
        throw DataError("checkpoint was trained on a different dataset (vocab mismatch)");
    if (sub->count("--h") > 0 && c.h != ck.params.shape.h)
        throw ConfigError("--h disagrees with the checkpoint's hop count");

    CliConfig cc = c;
    cc.h = ck.params.shape.h;

    TrainData data = make_train_data(ds.train_graph, ds.train_triplets, c.gamma);
    DirLock lock(c.out);
    write_text(fs::path(c.out) / "config.json", effective_config(cc, "eval").dump(2) + "\n");

    EvalReport report = eval_dataset(ck.params, ds, ds.test_triplets, cc, cc.seeds.empty()
                                         ? 1 : cc.seeds[0], data.split.threshold);
    write_text(fs::path(c.out) / "report.json", report_to_json(report).dump(2) + "\n");
    write_text(fs::path(c.out) / "report.csv", report_to_csv(report));
    if (c.per_query) write_text(fs::path(c.out) / "queries.tsv", query_rows_tsv(report));
    std::cout << report_to_json(report).dump(2) << "\n";
    return 0;
}

struct KValue {
    bool baseline = false;  // the unmodified split
    int32_t k = 0;
};

KValue parse_k(const std::string& s) {
    if (s == "inf" || s == "INF" || s == "Inf") return {true, 0};
    KValue v;
    try {
        size_t pos = 0;
        v.k = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
        throw ConfigError("bad K value '" + s + "' (expected an integer in 2..10 or inf)");
    }
    if (v.k < 2 || v.k > 10)
        throw ConfigError("K value " + s + " outside the supported range 2..10");
    return v;
}

int cmd_ksweep(const CliConfig& c) {
    if (c.out.empty()) throw ConfigError("ksweep requires --out");
    if (c.k_values.empty()) throw ConfigError("ksweep requires --k-values");
    std::vector<KValue> ks;
    for (const std::string& s : c.k_values) ks.push_back(parse_k(s));

    InductiveDataset ds = load_inductive_dataset(c.dataset);
    std::vector<int64_t> counts = target_counts(ds);
    TrainData base_data = make_train_data(ds.train_graph, ds.train_triplets, c.gamma);
    double select_max =
        c.select_max > 0 ? c.select_max : base_data.split.threshold;

    std::vector<int32_t> selected;
    for (int32_t r = 0; r < ds.relations.size(); ++r) {
        double n = double(counts[size_t(r)]);
        if (n >= c.select_min && n <= select_max) selected.push_back(r);
    }
    if (selected.empty())
        throw DataError("no relation has a training-triplet count in [" +
                        std::to_string(c.select_min) + ", " + std::to_string(select_max) +
                        "]");
    std::set<int32_t> selected_set(selected.begin(), selected.end());

    std::vector<Triplet> eval_triplets;
    for (const Triplet& t : ds.test_triplets)
        if (selected_set.count(t.rel)) eval_triplets.push_back(t);
    if (eval_triplets.empty())
        throw DataError("the selected relations have no test triplets");

    DirLock lock(c.out);
    write_text(fs::path(c.out) / "config.json", effective_config(c, "ksweep").dump(2) + "\n");

    std::ostringstream csv;
    csv << "k,auc_pr,hits_at_10,n_queries\n";
    for (const KValue& kv : ks) {
        std::vector<Triplet> targets;
        std::vector<Triplet> graph_edges = ds.train_graph.edges;
        if (kv.baseline) {
            targets = ds.train_triplets;
        } else {
            // Keep K random targets per selected relation; drop the rest from
            // the target list and one graph copy each.
            std::map<int32_t, std::vector<size_t>> per_rel;
            for (size_t i = 0; i < ds.train_triplets.size(); ++i)
                if (selected_set.count(ds.train_triplets[i].rel))
                    per_rel[ds.train_triplets[i].rel].push_back(i);
            std::set<size_t> dropped;
            for (const auto& [rel, idxs] : per_rel) {
                if (int64_t(idxs.size()) <= kv.k) continue;
                Rng rng(hash_mix({c.seeds.empty() ? 1 : c.seeds[0], uint64_t(rel),
                                  uint64_t(kv.k)}));
                std::vector<size_t> keep =
                    rng.sample_without_replacement(idxs.size(), size_t(kv.k));
                std::set<size_t> keep_set(keep.begin(), keep.end());
                for (size_t j = 0; j < idxs.size(); ++j)
                    if (!keep_set.count(j)) dropped.insert(idxs[j]);
            }
            std::map<uint64_t, int64_t> remove_multiplicity;
            for (size_t i = 0; i < ds.train_triplets.size(); ++i) {
                const Triplet& t = ds.train_triplets[i];
                if (dropped.count(i))
                    ++remove_multiplicity[KnowledgeGraph::pack(t.head, t.rel, t.tail)];
                else
                    targets.push_back(t);
            }
            std::vector<Triplet> kept_edges;
            kept_edges.reserve(graph_edges.size());
            for (const Triplet& e : graph_edges) {
                auto it = remove_multiplicity.find(KnowledgeGraph::pack(e.head, e.rel, e.tail));
                if (it != remove_multiplicity.end() && it->second > 0) {
                    --it->second;
                    continue;
                }
                kept_edges.push_back(e);
            }
            graph_edges = std::move(kept_edges);
        }

        KnowledgeGraph graph = build_graph(graph_edges, ds.train_graph.n_entities,
                                           ds.train_graph.n_relations);
        TrainData data = make_train_data(graph, targets, c.gamma);

        double sum_auc = 0.0, sum_hits = 0.0;
        int64_t n_queries = 0;
        for (uint64_t seed : c.seeds) {
            TrainConfig tcfg = to_train_config(c, seed);
            TrainResult res = train(tcfg, data);
            CliConfig cc = c;
            EvalReport rep = evaluate(res.state.theta, ds.test_graph, eval_triplets,
                                      [&] {
                                          std::vector<int64_t> tc(size_t(ds.relations.size()), 0);
                                          for (const Triplet& t : targets) ++tc[size_t(t.rel)];
                                          return tc;
                                      }(),
                                      data.split.threshold, to_eval_config(cc, seed));
            sum_auc += rep.auc_pr;
            sum_hits += rep.hits;
            n_queries = rep.n_test_used;
        }
        std::string klabel = kv.baseline ? "inf" : std::to_string(kv.k);
        csv << klabel << "," << sum_auc / double(c.seeds.size()) << ","
            << sum_hits / double(c.seeds.size()) << "," << n_queries << "\n";
        std::cout << "k=" << klabel << " auc_pr=" << sum_auc / double(c.seeds.size())
                  << " hits=" << sum_hits / double(c.seeds.size()) << "\n";
    }
    write_text(fs::path(c.out) / "ksweep.csv", csv.str());
    return 0;
}

int cmd_synth(const CliConfig& c) {
    if (c.out.empty()) throw ConfigError("synth requires --out");
    SynthSpec spec = default_synth_spec();
    spec.seed = c.synth_seed;
    spec.base_edge_density = c.density;
    spec.n_entities_train = c.train_entities;
    spec.n_entities_test = c.test_entities;
    SynthDataset synth = generate(spec);
    DirLock lock(c.out);
    write_dataset(synth, c.out);
    write_text(fs::path(c.out) / "synth_config.json",
               effective_config(c, "synth").dump(2) + "\n");
    InductiveDataset ds = load_inductive_dataset(c.out);
    std::cout << dataset_stats(ds).dump(2) << "\n";
    return 0;
}

void add_common_options(CLI::App* sub, CliConfig& c) {
    // The hop-count option is spelled --h; free the single-letter help alias.
    sub->set_help_flag("--help", "print help and exit");
    sub->add_option("--config", c.config_echo, "JSON config file; flags override its fields")
        ->check(CLI::ExistingFile);
    sub->add_option("--dataset", c.dataset, "dataset directory");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--mode", c.mode, "meta-sgd | maml | no-lrup | no-rpo | plain");
    sub->add_option("--h", c.h, "enclosing-subgraph hop count");
    sub->add_option("--layers", c.layers, "message-passing layers");
    sub->add_option("--dim", c.dim, "hidden dimension");
    sub->add_option("--gamma", c.gamma, "few-shot threshold factor");
    sub->add_option("--beta", c.beta, "meta learning rate");
    sub->add_option("--beta-prime", c.beta_prime, "large-shot relation update rate");
    sub->add_option("--margin", c.margin, "hinge margin");
    sub->add_option("--alpha-init", c.alpha_init, "initial inner-loop learning rate");
    sub->add_option("--epochs", c.epochs, "training epochs");
    sub->add_option("--meta-updates", c.meta_updates, "meta-updates per epoch");
    sub->add_option("--max-nodes", c.max_nodes, "subgraph node cap");
    sub->add_option("--relations-per-batch", c.relations_per_batch, "relations per batch");
    sub->add_option("--instances-per-relation", c.instances_per_relation,
                    "positives per relation");
    sub->add_option("--negatives-per-positive", c.negatives_per_positive,
                    "training negatives per positive");
    sub->add_option("--inner-steps", c.inner_steps, "inner-loop steps");
    sub->add_flag("--adam-lrup", c.adam_lrup, "Adam on the large-shot relation update");
    sub->add_option("--seeds", c.seeds, "comma-separated seeds")->delimiter(',');
    sub->add_flag("--intersect-neighborhoods", c.intersect_neighborhoods,
                  "node set = head's h-hop incoming reach intersected with tail's "
                  "h-hop outgoing reach");
    sub->add_flag("--unfiltered-negatives", c.unfiltered_negatives,
                  "do not exclude known true facts when sampling evaluation negatives");
    sub->add_option("--eval-negatives", c.eval_negatives, "corruptions per side");
    sub->add_flag("--per-query", c.per_query, "dump per-query ranks as TSV");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"few-shot inductive link prediction over knowledge graphs"};
    app.require_subcommand(1);
    CliConfig c;

    std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) {
        try {
            apply_json_config(config_path, c);
        } catch (const ConfigError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }

    CLI::App* stats = app.add_subcommand("stats", "dataset statistics as JSON");
    stats->add_option("--dataset", c.dataset, "dataset directory")->required();
    stats->add_option("--out", c.out, "also write the JSON to this file");

    CLI::App* train = app.add_subcommand("train", "meta-train and evaluate per seed");
    add_common_options(train, c);
    train->add_option("--resume", c.resume, "checkpoint to continue from");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common_options(eval, c);
    eval->add_option("--checkpoint", c.checkpoint, "checkpoint file");

    CLI::App* ksweep = app.add_subcommand(
        "ksweep", "retrain with selected relations capped at K training triplets");
    add_common_options(ksweep, c);
    ksweep->add_option("--k-values", c.k_values, "K values (2..10 or inf)")->delimiter(',');
    ksweep->add_option("--select-min", c.select_min, "relation selection window lower bound");
    ksweep->add_option("--select-max", c.select_max,
                       "relation selection window upper bound (0 = threshold K_T)");

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--out", c.out, "output dataset directory")->required();
    synth->add_option("--seed", c.synth_seed, "generator seed");
    synth->add_option("--density", c.density, "expected out-degree per entity per relation");
    synth->add_option("--train-entities", c.train_entities, "train-side entity count");
    synth->add_option("--test-entities", c.test_entities, "test-side entity count");
    synth->add_option("--config", c.config_echo, "JSON config file; flags override its fields")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (stats->parsed()) return cmd_stats(c);
        if (train->parsed()) return cmd_train(c, train);
        if (eval->parsed()) return cmd_eval(c, eval);
        if (ksweep->parsed()) return cmd_ksweep(c);
        if (synth->parsed()) return cmd_synth(c);
        throw ConfigError("no command given");
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
