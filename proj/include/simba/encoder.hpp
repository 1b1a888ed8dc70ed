#pragma once

#include <span>
#include <string>
#include <vector>

#include "simba/autodiff.hpp"
#include "simba/graph.hpp"
#include "simba/parameters.hpp"
#include "simba/rng.hpp"

namespace simba {

enum class Backbone { GIN, GCN, SAGE };

std::string to_string(Backbone b);
Backbone parse_backbone(const std::string& s);

// Graph-level readout of each layer: self-attentive weighting, or the plain
// node sum of a standard GIN/GCN graph classifier.
enum class Readout { Attention, Sum };

std::string to_string(Readout r);
Readout parse_readout(const std::string& s);

struct EncoderConfig {
    Backbone backbone = Backbone::GIN;
    Readout readout = Readout::Attention;
    std::size_t layers = 3;
    std::size_t hidden_dim = 32;     // r
    std::size_t attention_dim = 32;  // q
    std::size_t mlp_hidden = 64;     // hidden width of the pooling perceptron
    double gin_eps = 0.0;
    bool batch_norm = false;
    double dropout = 0.0;
};

void validate(const EncoderConfig& config);

// Several graphs stacked into one node matrix, with the aggregation operators
// each backbone needs precomputed over the block-diagonal adjacency.
struct GraphBatch {
    std::vector<std::size_t> graph_ids;
    Tensor features;         // total_nodes x d
    Segments segments;       // node rows of each graph
    SparseRows neighbor_sum;   // sum over neighbours (GIN)
    SparseRows gcn_operator;   // D~^-1/2 (A + I) D~^-1/2 (GCN)
    SparseRows neighbor_mean;  // mean over neighbours, zero for isolated nodes (SAGE)

    std::size_t graph_count() const { return segments.count(); }
};

GraphBatch make_batch(const GraphSet& set, std::span<const std::size_t> ids);
GraphBatch make_batch(const Graph& graph);

struct ForwardContext {
    bool training = false;
    Rng* rng = nullptr;  // required when training with dropout
};

// Trainable weights of one message-passing layer. GIN uses w/b (first linear)
// and w2/b2 (second linear); GCN and SAGE use w/b only.
struct LayerWeights {
    Parameter* w = nullptr;
    Parameter* b = nullptr;
    Parameter* w2 = nullptr;
    Parameter* b2 = nullptr;
    Parameter* bn_gamma = nullptr;
    Parameter* bn_beta = nullptr;
    Parameter* bn_mean = nullptr;  // running statistics, not trainable
    Parameter* bn_var = nullptr;
};

struct LayerOptions {
    Backbone backbone = Backbone::GIN;
    double gin_eps = 0.0;
    bool activation = true;
};

// One message-passing step on the stacked node matrix `h`:
//   GIN  : relu(relu(((1 + eps) h_v + sum_u h_u) W + b) W2 + b2)
//   GCN  : relu(D~^-1/2 (A + I) D~^-1/2 h W + b)
//   SAGE : relu([h_v, mean_u h_u] W + b)
// With activation = false the outer rectifier is skipped (the inner GIN one
// is kept). Batch normalization, when weights carry it, precedes the outer
// rectifier.
Var gnn_layer_forward(Tape& tape, const GraphBatch& batch, const Var& h, const LayerWeights& weights,
                      const LayerOptions& options, const ForwardContext& ctx = {});

struct AttentionReadout {
    Var attention;  // total_nodes x 1; within each graph the entries sum to 1
    Var readout;    // graphs x r
};

// Self-attentive readout: scores = tanh(h W1) W2 per node, softmax over the
// nodes of each graph, readout = attention-weighted sum of node rows.
// w1 is r x q and w2 is q x 1 (the transposes of the row-vector convention).
AttentionReadout attention_readout(const Var& h, const Var& w1, const Var& w2, const Segments& segments);

struct PoolWeights {
    Var w1, b1, w2, b2;
};

// Concatenates omega_l * readout_l over layers and applies the two-layer
// perceptron relu(x W1 + b1) W2 + b2. readouts and omegas must both have L
// entries.
Var multi_level_pool(std::span<const Var> readouts, std::span<const Var> omegas, const PoolWeights& mlp,
                     std::size_t expected_layers);

struct EncoderTrace {
    std::vector<Tensor> node_embeddings;  // per layer, total_nodes x r
    std::vector<Tensor> attention;        // per layer, total_nodes x 1
    std::vector<Tensor> readouts;         // per layer, graphs x r
};

class Encoder {
public:
    // Registers parameters "enc.*" in `store`, Glorot-initialized from `rng`.
    Encoder(const EncoderConfig& config, std::size_t input_dim, ParameterStore& store, Rng& rng);

    // graphs x r embeddings. When ctx.training is false, parameters enter the
    // tape as constants and batch normalization uses running statistics.
    Var forward(Tape& tape, const GraphBatch& batch, const ForwardContext& ctx, EncoderTrace* trace = nullptr) const;

    // Inference shortcut (no gradients).
    Tensor embed(const GraphBatch& batch, EncoderTrace* trace = nullptr) const;

    const EncoderConfig& config() const { return config_; }
    std::size_t input_dim() const { return input_dim_; }

private:
    EncoderConfig config_;
    std::size_t input_dim_;
    std::vector<LayerWeights> layers_;
    std::vector<Parameter*> att_w1_;
    std::vector<Parameter*> att_w2_;
    std::vector<Parameter*> omega_;
    Parameter* pool_w1_ = nullptr;
    Parameter* pool_b1_ = nullptr;
    Parameter* pool_w2_ = nullptr;
    Parameter* pool_b2_ = nullptr;
};

// Encodes a single graph: 1 x r.
Tensor encode_graph(const Graph& graph, const Encoder& encoder);

}  // namespace simba
