#include "metaikg/mpnn.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace metaikg {

namespace {

inline void matvec(const double* W, size_t rows, size_t cols, const double* x,
                   double* y) {
    for (size_t r = 0; r < rows; ++r) {
        const double* row = W + r * cols;
        double acc = 0.0;
        for (size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

// dx += W^T dy
inline void matvec_t_acc(const double* W, size_t rows, size_t cols, const double* dy,
                         double* dx) {
    for (size_t r = 0; r < rows; ++r) {
        const double* row = W + r * cols;
        const double g = dy[r];
        if (g == 0.0) continue;
        for (size_t c = 0; c < cols; ++c) dx[c] += row[c] * g;
    }
}

// dW += dy x^T
inline void outer_acc(double* dW, size_t rows, size_t cols, const double* dy,
                      const double* x) {
    for (size_t r = 0; r < rows; ++r) {
        double* row = dW + r * cols;
        const double g = dy[r];
        if (g == 0.0) continue;
        for (size_t c = 0; c < cols; ++c) row[c] += g * x[c];
    }
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_subgraph(const ModelParams& p, const EnclosingSubgraph& sg) {
    if (sg.nodes.empty()) throw DataError("cannot score an empty subgraph");
    if (sg.hop != p.shape.h)
        throw DataError("subgraph hop count does not match the model");
    if (sg.target_rel < 0 || sg.target_rel >= p.shape.n_relations)
        throw DataError("target relation id outside the model's relation space");
    for (const auto& e : sg.edges)
        if (e.rel < 0 || e.rel >= p.shape.n_relations)
            throw DataError("edge relation id outside the model's relation space");
}

}  // namespace

ModelParams init_params(int32_t n_relations, int32_t d, int32_t h, int32_t l,
                        uint64_t seed) {
    if (n_relations < 1 || d < 1 || h < 1 || l < 1)
        throw ConfigError("model shape values must be positive");
    ModelParams p;
    p.shape = {n_relations, d, h, l};
    p.values.assign(p.shape.total_params(), 0.0);
    Rng rng(seed);

    auto fill = [&](size_t off, size_t rows, size_t cols) {
        const double bound = 1.0 / std::sqrt(double(cols));
        double* w = p.at(off);
        for (size_t i = 0; i < rows * cols; ++i)
            w[i] = (2.0 * rng.uniform() - 1.0) * bound;
    };
    const size_t d_ = size_t(d);
    fill(p.shape.rel_off(), size_t(n_relations), d_);
    fill(p.shape.w_in_off(), d_, p.shape.in_dim());
    fill(p.shape.w_edge_init_off(), d_, 3 * d_);
    for (int t = 0; t < l; ++t) {
        fill(p.shape.w_edge_off(t), d_, 3 * d_);
        fill(p.shape.w_gate_off(t), d_, 2 * d_);
        fill(p.shape.w_node_off(t), d_, d_);
    }
    fill(p.shape.w_out_off(), 1, 4 * d_);
    return p;
}

double score_subgraph(const ModelParams& p, const EnclosingSubgraph& sg,
                      ForwardTrace* trace) {
    check_subgraph(p, sg);
    const size_t N = sg.nodes.size();
    const size_t E = sg.edges.size();
    const size_t d = size_t(p.shape.d);
    const int l = p.shape.l;
    const size_t in_dim = p.shape.in_dim();

    ForwardTrace local;
    ForwardTrace& tr = trace ? *trace : local;
    tr.feats = label_features(sg, p.shape.h);
    tr.node_state.assign(size_t(l) + 1, std::vector<double>(N * d, 0.0));
    tr.msg.assign(size_t(l) + 1, std::vector<double>(E * d, 0.0));
    tr.agg.assign(size_t(l), std::vector<double>(N * d, 0.0));
    tr.gate.assign(size_t(l), std::vector<double>(N * d, 0.0));
    tr.upd.assign(size_t(l), std::vector<double>(N * d, 0.0));

    // n^0
    for (size_t i = 0; i < N; ++i)
        matvec(p.at(p.shape.w_in_off()), d, in_dim, &tr.feats[i * in_dim],
               &tr.node_state[0][i * d]);

    // m^0 (initial edge states)
    std::vector<double> cat3(3 * d), out(d);
    for (size_t e = 0; e < E; ++e) {
        const auto& ed = sg.edges[e];
        std::memcpy(cat3.data(), &tr.node_state[0][size_t(ed.head) * d], d * 8);
        std::memcpy(cat3.data() + d, p.at(p.shape.rel_off() + size_t(ed.rel) * d), d * 8);
        std::memcpy(cat3.data() + 2 * d, &tr.node_state[0][size_t(ed.tail) * d], d * 8);
        matvec(p.at(p.shape.w_edge_init_off()), d, 3 * d, cat3.data(), out.data());
        for (size_t k = 0; k < d; ++k) tr.msg[0][e * d + k] = relu(out[k]);
    }

    std::vector<double> cat2(2 * d);
    for (int t = 1; t <= l; ++t) {
        const auto& n_prev = tr.node_state[size_t(t) - 1];
        const auto& m_prev = tr.msg[size_t(t) - 1];
        auto& m_cur = tr.msg[size_t(t)];
        auto& s_cur = tr.agg[size_t(t) - 1];
        auto& g_cur = tr.gate[size_t(t) - 1];
        auto& u_cur = tr.upd[size_t(t) - 1];
        auto& n_cur = tr.node_state[size_t(t)];

        for (size_t e = 0; e < E; ++e) {
            const auto& ed = sg.edges[e];
            std::memcpy(cat3.data(), &n_prev[size_t(ed.head) * d], d * 8);
            std::memcpy(cat3.data() + d, &m_prev[e * d], d * 8);
            std::memcpy(cat3.data() + 2 * d, &n_prev[size_t(ed.tail) * d], d * 8);
            matvec(p.at(p.shape.w_edge_off(t - 1)), d, 3 * d, cat3.data(), out.data());
            for (size_t k = 0; k < d; ++k) m_cur[e * d + k] = relu(out[k]);
            // fixed edge order makes the incoming sums deterministic
            double* s_tail = &s_cur[size_t(ed.tail) * d];
            for (size_t k = 0; k < d; ++k) s_tail[k] += m_cur[e * d + k];
        }
        for (size_t v = 0; v < N; ++v) {
            std::memcpy(cat2.data(), &n_prev[v * d], d * 8);
            std::memcpy(cat2.data() + d, &s_cur[v * d], d * 8);
            matvec(p.at(p.shape.w_gate_off(t - 1)), d, 2 * d, cat2.data(), out.data());
            for (size_t k = 0; k < d; ++k) g_cur[v * d + k] = logistic(out[k]);
            matvec(p.at(p.shape.w_node_off(t - 1)), d, d, &s_cur[v * d], out.data());
            for (size_t k = 0; k < d; ++k) {
                const double u = relu(out[k]);
                u_cur[v * d + k] = u;
                n_cur[v * d + k] = g_cur[v * d + k] * n_prev[v * d + k] +
                                   (1.0 - g_cur[v * d + k]) * u;
            }
        }
    }

    const auto& n_last = tr.node_state[size_t(l)];
    std::vector<double> cat4(4 * d, 0.0);
    for (size_t i = 0; i < N; ++i)
        for (size_t k = 0; k < d; ++k) cat4[k] += n_last[i * d + k];
    std::memcpy(cat4.data() + d, &n_last[size_t(sg.target_head) * d], d * 8);
    std::memcpy(cat4.data() + 2 * d, p.at(p.shape.rel_off() + size_t(sg.target_rel) * d),
                d * 8);
    std::memcpy(cat4.data() + 3 * d, &n_last[size_t(sg.target_tail) * d], d * 8);

    double s = 0.0;
    const double* w_out = p.at(p.shape.w_out_off());
    for (size_t k = 0; k < 4 * d; ++k) s += w_out[k] * cat4[k];
    tr.score = s;
    return s;
}

void backward_into(const ModelParams& p, const EnclosingSubgraph& sg,
                   const ForwardTrace& tr, double dscore, std::vector<double>& grad) {
    if (grad.size() != p.shape.total_params())
        throw ConfigError("gradient buffer has the wrong size");
    if (dscore == 0.0) return;
    const size_t N = sg.nodes.size();
    const size_t E = sg.edges.size();
    const size_t d = size_t(p.shape.d);
    const int l = p.shape.l;
    const size_t in_dim = p.shape.in_dim();

    // readout
    const auto& n_last = tr.node_state[size_t(l)];
    std::vector<double> cat4(4 * d, 0.0);
    for (size_t i = 0; i < N; ++i)
        for (size_t k = 0; k < d; ++k) cat4[k] += n_last[i * d + k];
    std::memcpy(cat4.data() + d, &n_last[size_t(sg.target_head) * d], d * 8);
    std::memcpy(cat4.data() + 2 * d, p.at(p.shape.rel_off() + size_t(sg.target_rel) * d),
                d * 8);
    std::memcpy(cat4.data() + 3 * d, &n_last[size_t(sg.target_tail) * d], d * 8);

    double* g_w_out = grad.data() + p.shape.w_out_off();
    const double* w_out = p.at(p.shape.w_out_off());
    for (size_t k = 0; k < 4 * d; ++k) g_w_out[k] += dscore * cat4[k];

    std::vector<double> dn(N * d, 0.0);  // d loss / d n^t, current layer t
    for (size_t i = 0; i < N; ++i)
        for (size_t k = 0; k < d; ++k) dn[i * d + k] += dscore * w_out[k];
    for (size_t k = 0; k < d; ++k) {
        dn[size_t(sg.target_head) * d + k] += dscore * w_out[d + k];
        dn[size_t(sg.target_tail) * d + k] += dscore * w_out[3 * d + k];
    }
    {
        double* g_rel = grad.data() + p.shape.rel_off() + size_t(sg.target_rel) * d;
        for (size_t k = 0; k < d; ++k) g_rel[k] += dscore * w_out[2 * d + k];
    }

    std::vector<double> dm_next(E * d, 0.0);  // contribution flowing into m^{t}
    std::vector<double> dn_prev(N * d);
    std::vector<double> ds(N * d);
    std::vector<double> scratch(d), cat3(3 * d), cat2(2 * d), dcat3(3 * d), dcat2(2 * d);

    for (int t = l; t >= 1; --t) {
        const auto& n_prev = tr.node_state[size_t(t) - 1];
        const auto& m_prev = tr.msg[size_t(t) - 1];
        const auto& m_cur = tr.msg[size_t(t)];
        const auto& s_cur = tr.agg[size_t(t) - 1];
        const auto& g_cur = tr.gate[size_t(t) - 1];
        const auto& u_cur = tr.upd[size_t(t) - 1];
        std::fill(dn_prev.begin(), dn_prev.end(), 0.0);
        std::fill(ds.begin(), ds.end(), 0.0);

        double* g_gate = grad.data() + p.shape.w_gate_off(t - 1);
        double* g_node = grad.data() + p.shape.w_node_off(t - 1);
        double* g_edge = grad.data() + p.shape.w_edge_off(t - 1);
        const double* w_gate = p.at(p.shape.w_gate_off(t - 1));
        const double* w_node = p.at(p.shape.w_node_off(t - 1));
        const double* w_edge = p.at(p.shape.w_edge_off(t - 1));

        for (size_t v = 0; v < N; ++v) {
            // n_v^t = g * n_v^{t-1} + (1-g) * u
            for (size_t k = 0; k < d; ++k) {
                const size_t i = v * d + k;
                const double g = g_cur[i];
                dn_prev[i] += dn[i] * g;
                const double du = dn[i] * (1.0 - g);
                // gate pre-activation
                const double dq = dn[i] * (n_prev[i] - u_cur[i]) * g * (1.0 - g);
                scratch[k] = dq;
                // node-update pre-activation (ReLU mask from stored output)
                dcat2[k] = u_cur[i] > 0.0 ? du : 0.0;  // reuse as dz_n scratch
            }
            // gate weight grads and inputs
            std::memcpy(cat2.data(), &n_prev[v * d], d * 8);
            std::memcpy(cat2.data() + d, &s_cur[v * d], d * 8);
            outer_acc(g_gate, d, 2 * d, scratch.data(), cat2.data());
            std::fill(dcat3.begin(), dcat3.begin() + ptrdiff_t(2 * d), 0.0);
            matvec_t_acc(w_gate, d, 2 * d, scratch.data(), dcat3.data());
            for (size_t k = 0; k < d; ++k) {
                dn_prev[v * d + k] += dcat3[k];
                ds[v * d + k] += dcat3[d + k];
            }
            // node-update weight grads
            outer_acc(g_node, d, d, dcat2.data(), &s_cur[v * d]);
            matvec_t_acc(w_node, d, d, dcat2.data(), &ds[v * d]);
        }

        for (size_t e = 0; e < E; ++e) {
            const auto& ed = sg.edges[e];
            // m_e^t feeds its tail's aggregation plus layer t+1's edge input
            for (size_t k = 0; k < d; ++k) {
                const double dm = ds[size_t(ed.tail) * d + k] + dm_next[e * d + k];
                scratch[k] = m_cur[e * d + k] > 0.0 ? dm : 0.0;  // dz_e
            }
            std::memcpy(cat3.data(), &n_prev[size_t(ed.head) * d], d * 8);
            std::memcpy(cat3.data() + d, &m_prev[e * d], d * 8);
            std::memcpy(cat3.data() + 2 * d, &n_prev[size_t(ed.tail) * d], d * 8);
            outer_acc(g_edge, d, 3 * d, scratch.data(), cat3.data());
            std::fill(dcat3.begin(), dcat3.end(), 0.0);
            matvec_t_acc(w_edge, d, 3 * d, scratch.data(), dcat3.data());
            for (size_t k = 0; k < d; ++k) {
                dn_prev[size_t(ed.head) * d + k] += dcat3[k];
                dm_next[e * d + k] = dcat3[d + k];  // becomes dm for layer t-1
                dn_prev[size_t(ed.tail) * d + k] += dcat3[2 * d + k];
            }
        }
        dn.swap(dn_prev);
    }

    // edge init: m^0 = relu(W_edge_init . [n^0_u | R_r | n^0_v])
    {
        const auto& n0 = tr.node_state[0];
        const auto& m0 = tr.msg[0];
        double* g_ei = grad.data() + p.shape.w_edge_init_off();
        const double* w_ei = p.at(p.shape.w_edge_init_off());
        for (size_t e = 0; e < E; ++e) {
            const auto& ed = sg.edges[e];
            for (size_t k = 0; k < d; ++k)
                scratch[k] = m0[e * d + k] > 0.0 ? dm_next[e * d + k] : 0.0;
            std::memcpy(cat3.data(), &n0[size_t(ed.head) * d], d * 8);
            std::memcpy(cat3.data() + d, p.at(p.shape.rel_off() + size_t(ed.rel) * d),
                        d * 8);
            std::memcpy(cat3.data() + 2 * d, &n0[size_t(ed.tail) * d], d * 8);
            outer_acc(g_ei, d, 3 * d, scratch.data(), cat3.data());
            std::fill(dcat3.begin(), dcat3.end(), 0.0);
            matvec_t_acc(w_ei, d, 3 * d, scratch.data(), dcat3.data());
            double* g_rel = grad.data() + p.shape.rel_off() + size_t(ed.rel) * d;
            for (size_t k = 0; k < d; ++k) {
                dn[size_t(ed.head) * d + k] += dcat3[k];
                g_rel[k] += dcat3[d + k];
                dn[size_t(ed.tail) * d + k] += dcat3[2 * d + k];
            }
        }
    }

    // node init: n^0 = W_node_in . label
    {
        double* g_in = grad.data() + p.shape.w_in_off();
        for (size_t i = 0; i < N; ++i)
            outer_acc(g_in, d, in_dim, &dn[i * d], &tr.feats[i * in_dim]);
    }
}

LossGrad loss_and_grad(const ModelParams& p, const EnclosingSubgraph& pos,
                       const std::vector<EnclosingSubgraph>& negs, double margin) {
    if (negs.empty()) throw ConfigError("loss requires at least one negative");
    if (margin < 0.0) throw ConfigError("margin must be non-negative");

    LossGrad out;
    out.grad.assign(p.shape.total_params(), 0.0);

    ForwardTrace pos_trace;
    const double s_pos = score_subgraph(p, pos, &pos_trace);

    std::vector<ForwardTrace> neg_traces(negs.size());
    std::vector<char> active(negs.size(), 0);
    for (size_t j = 0; j < negs.size(); ++j) {
        const double s_neg = score_subgraph(p, negs[j], &neg_traces[j]);
        const double term = margin + s_neg - s_pos;
        if (term > 0.0) {
            out.loss += term;
            active[j] = 1;
            ++out.active_hinges;
        }
    }
    for (size_t j = 0; j < negs.size(); ++j)
        if (active[j]) backward_into(p, negs[j], neg_traces[j], 1.0, out.grad);
    if (out.active_hinges > 0)
        backward_into(p, pos, pos_trace, -double(out.active_hinges), out.grad);
    return out;
}

double hinge_loss(const ModelParams& p, const EnclosingSubgraph& pos,
                  const std::vector<EnclosingSubgraph>& negs, double margin) {
    if (negs.empty()) throw ConfigError("loss requires at least one negative");
    const double s_pos = score_subgraph(p, pos);
    double loss = 0.0;
    for (const auto& n : negs) {
        const double term = margin + score_subgraph(p, n) - s_pos;
        if (term > 0.0) loss += term;
    }
    return loss;
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const std::optional<std::vector<double>>& alpha,
                     const CheckpointMeta& meta) {
    if (alpha && alpha->size() != params.values.size())
        throw ConfigError("alpha tensor size does not match parameters");
    nlohmann::ordered_json h;
    h["magic"] = "metaikg-ckpt";
    h["version"] = 1;
    h["n_relations"] = params.shape.n_relations;
    h["d"] = params.shape.d;
    h["h"] = params.shape.h;
    h["l"] = params.shape.l;
    h["param_count"] = params.values.size();
    h["flatten_order"] = ModelShape::flatten_order;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)meta.vocab_hash);
    h["vocab_hash"] = hex;
    h["alpha_present"] = bool(alpha);
    h["rng_state"] = meta.rng_state;
    h["iteration"] = meta.iteration;
    h["epoch"] = meta.epoch;
    h["seed"] = std::to_string(meta.seed);
    h["mode"] = meta.mode;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write checkpoint: " + path);
    os << h.dump() << '\n';
    write_f64_le(os, params.values.data(), params.values.size());
    if (alpha) write_f64_le(os, alpha->data(), alpha->size());
    if (!os) throw DataError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path);
    std::string header;
    if (!std::getline(is, header)) throw DataError("checkpoint missing header line");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }
    if (h.value("magic", "") != std::string("metaikg-ckpt"))
        throw DataError("not a checkpoint file: " + path);
    if (h.value("version", 0) != 1) throw DataError("unsupported checkpoint version");
    if (h.value("flatten_order", "") != std::string(ModelShape::flatten_order))
        throw DataError("checkpoint uses an unknown parameter flattening order");

    Checkpoint c;
    c.params.shape = {h.at("n_relations").get<int32_t>(), h.at("d").get<int32_t>(),
                      h.at("h").get<int32_t>(), h.at("l").get<int32_t>()};
    const size_t count = h.at("param_count").get<size_t>();
    if (count != c.params.shape.total_params())
        throw DataError("checkpoint parameter count does not match its shape");
    c.params.values.resize(count);
    read_f64_le(is, c.params.values.data(), count);
    if (h.value("alpha_present", false)) {
        std::vector<double> a(count);
        read_f64_le(is, a.data(), count);
        c.alpha = std::move(a);
    }
    c.meta.vocab_hash =
        std::stoull(h.value("vocab_hash", std::string("0")), nullptr, 16);
    c.meta.rng_state = h.value("rng_state", std::string());
    c.meta.iteration = h.value("iteration", int64_t(0));
    c.meta.epoch = h.value("epoch", int32_t(0));
    c.meta.seed = std::stoull(h.value("seed", std::string("0")));
    c.meta.mode = h.value("mode", std::string());
    return c;
}

}  // namespace metaikg
