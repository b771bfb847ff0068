#pragma once

// Hand-written message-passing network over labeled enclosing subgraphs,
// with exact reverse-mode gradients (no autodiff).
//
// Forward pass, sigma = ReLU:
//   n_i^0   = W_node_in . label_i
//   e_uv^0  = sigma(W_edge_init . [n_u^0 | R_r | n_v^0])
//   layer t = 1..l, edge states are the previous layer's messages (m^0 = e^0):
//     m_e^t = sigma(W_edge^t . [n_u^{t-1} | m_e^{t-1} | n_v^{t-1}])
//     s_v^t = sum of m_e^t over edges into v
//     g     = logistic(W_gate^t . [n_v^{t-1} | s_v^t])
//     n_v^t = g * n_v^{t-1} + (1-g) * sigma(W_node^t . s_v^t)
//   g_G = sum_i n_i^l
//   S   = w_out . [g_G | n_head^l | R_target | n_tail^l]
//
// Loss per instance: sum_j max(0, margin + S(neg_j) - S(pos)).
//
// Parameters live in one flat float64 vector. Flattening order (also the
// checkpoint payload order):
//   R (n_relations x d) | W_node_in (d x 2(h+1)) | W_edge_init (d x 3d)
//   | per layer: W_edge (d x 3d), W_gate (d x 2d), W_node (d x d)
//   | w_out (4d)
// All matrices are row-major. Initialisation is uniform in
// [-1/sqrt(fan_in), 1/sqrt(fan_in)] drawn in flattening order, so a seed
// pins every bit of the initial state.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metaikg/common.hpp"
#include "metaikg/subgraph.hpp"

namespace metaikg {

struct ModelShape {
    int32_t n_relations = 0;
    int32_t d = 32;
    int32_t h = 3;
    int32_t l = 3;

    bool operator==(const ModelShape&) const = default;

    size_t in_dim() const { return 2 * (size_t(h) + 1); }
    size_t rel_off() const { return 0; }
    size_t w_in_off() const { return size_t(n_relations) * d; }
    size_t w_edge_init_off() const { return w_in_off() + size_t(d) * in_dim(); }
    size_t layer_off(int t) const {  // t in [0, l)
        return w_edge_init_off() + 3 * size_t(d) * d + size_t(t) * 6 * size_t(d) * d;
    }
    size_t w_edge_off(int t) const { return layer_off(t); }
    size_t w_gate_off(int t) const { return layer_off(t) + 3 * size_t(d) * d; }
    size_t w_node_off(int t) const { return layer_off(t) + 5 * size_t(d) * d; }
    size_t w_out_off() const { return layer_off(l); }
    size_t total_params() const { return w_out_off() + 4 * size_t(d); }

    static constexpr const char* flatten_order =
        "R|W_node_in|W_edge_init|(W_edge,W_gate,W_node)*layers|w_out";
};

struct ModelParams {
    ModelShape shape;
    std::vector<double> values;

    const double* at(size_t off) const { return values.data() + off; }
    double* at(size_t off) { return values.data() + off; }
};

ModelParams init_params(int32_t n_relations, int32_t d, int32_t h, int32_t l,
                        uint64_t seed);

// Cached activations of one forward pass; consumed by backward_into.
struct ForwardTrace {
    std::vector<double> feats;                    // N x in_dim
    std::vector<std::vector<double>> node_state;  // (l+1) x (N*d)
    std::vector<std::vector<double>> msg;         // (l+1) x (E*d)
    std::vector<std::vector<double>> agg;         // l x (N*d)
    std::vector<std::vector<double>> gate;        // l x (N*d)
    std::vector<std::vector<double>> upd;         // l x (N*d)
    double score = 0.0;
};

double score_subgraph(const ModelParams& p, const EnclosingSubgraph& sg,
                      ForwardTrace* trace = nullptr);

// Accumulates d(dscore * S)/d(params) into grad (size total_params).
void backward_into(const ModelParams& p, const EnclosingSubgraph& sg,
                   const ForwardTrace& trace, double dscore, std::vector<double>& grad);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
    size_t active_hinges = 0;
};

// Margin ranking loss for one positive against its negatives, with exact
// gradients. Requires at least one negative.
LossGrad loss_and_grad(const ModelParams& p, const EnclosingSubgraph& pos,
                       const std::vector<EnclosingSubgraph>& negs, double margin);

// Loss only (no gradient); used by logging and tests.
double hinge_loss(const ModelParams& p, const EnclosingSubgraph& pos,
                  const std::vector<EnclosingSubgraph>& negs, double margin);

// ----- checkpoints -----
//
// One JSON header line (shape, flattening order, vocab hash, rng state,
// progress counters) followed by the raw little-endian float64 payload:
// params, then the element-wise learning rates when present.

struct CheckpointMeta {
    uint64_t vocab_hash = 0;
    std::string rng_state;
    int64_t iteration = 0;
    int32_t epoch = 0;
    uint64_t seed = 0;
    std::string mode;
};

struct Checkpoint {
    ModelParams params;
    std::optional<std::vector<double>> alpha;
    CheckpointMeta meta;
};

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const std::optional<std::vector<double>>& alpha,
                     const CheckpointMeta& meta);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace metaikg
