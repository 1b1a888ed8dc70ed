#include "simba/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "simba/errors.hpp"

namespace simba {

std::string to_string(Backbone b) {
    switch (b) {
        case Backbone::GIN: return "gin";
        case Backbone::GCN: return "gcn";
        case Backbone::SAGE: return "sage";
    }
    return "?";
}

Backbone parse_backbone(const std::string& s) {
    if (s == "gin" || s == "GIN") return Backbone::GIN;
    if (s == "gcn" || s == "GCN") return Backbone::GCN;
    if (s == "sage" || s == "SAGE") return Backbone::SAGE;
    throw ArgumentError("unknown backbone '" + s + "' (expected gin, gcn or sage)");
}

std::string to_string(Readout r) { return r == Readout::Sum ? "sum" : "attention"; }

Readout parse_readout(const std::string& s) {
    if (s == "attention") return Readout::Attention;
    if (s == "sum") return Readout::Sum;
    throw ArgumentError("unknown readout '" + s + "' (expected attention or sum)");
}

void validate(const EncoderConfig& c) {
    if (c.layers < 1) throw ArgumentError("encoder needs at least one layer");
    if (c.hidden_dim < 1 || c.attention_dim < 1 || c.mlp_hidden < 1) {
        throw ArgumentError("encoder dimensions must be >= 1");
    }
    if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ArgumentError("dropout must lie in [0, 1)");
}

namespace {

constexpr double kBatchNormEps = 1e-5;
constexpr double kBatchNormMomentum = 0.1;

void push_row(SparseRows& op) { op.offsets.push_back(op.index.size()); }

}  // namespace

GraphBatch make_batch(const GraphSet& set, std::span<const std::size_t> ids) {
    GraphBatch b;
    b.graph_ids.assign(ids.begin(), ids.end());
    std::size_t total = 0;
    for (std::size_t id : ids) {
        const Graph& g = set.graphs.at(id);
        if (g.features.rows() != g.node_count) {
            throw ConsistencyError("graph " + std::to_string(id) + ": feature rows do not match node count");
        }
        total += g.node_count;
        b.segments.offsets.push_back(total);
    }
    const std::size_t d = ids.empty() ? set.feature_dim : set.graphs[ids[0]].features.cols();
    b.features = Tensor(total, d);

    std::vector<std::vector<std::size_t>> adj(total);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const Graph& g = set.graphs[ids[k]];
        if (g.features.cols() != d) throw ConsistencyError("feature width differs between graphs");
        const std::size_t base = b.segments.begin(k);
        std::copy(g.features.data().begin(), g.features.data().end(),
                  b.features.data().begin() + std::ptrdiff_t(base * d));
        for (const auto& [u, v] : g.edges) {
            if (u >= g.node_count || v >= g.node_count) {
                throw ConsistencyError("graph " + std::to_string(ids[k]) + ": neighbour index out of range");
            }
            adj[base + u].push_back(base + v);
            adj[base + v].push_back(base + u);
        }
    }
    for (auto* op : {&b.neighbor_sum, &b.gcn_operator, &b.neighbor_mean}) {
        op->rows = total;
        op->cols = total;
    }
    for (std::size_t v = 0; v < total; ++v) {
        std::sort(adj[v].begin(), adj[v].end());
        const double deg = double(adj[v].size());
        const double self_norm = 1.0 / (deg + 1.0);
        b.gcn_operator.index.push_back(v);
        b.gcn_operator.weight.push_back(self_norm);
        for (std::size_t u : adj[v]) {
            b.neighbor_sum.index.push_back(u);
            b.neighbor_sum.weight.push_back(1.0);
            b.neighbor_mean.index.push_back(u);
            b.neighbor_mean.weight.push_back(1.0 / deg);
            b.gcn_operator.index.push_back(u);
            b.gcn_operator.weight.push_back(1.0 / std::sqrt((deg + 1.0) * (double(adj[u].size()) + 1.0)));
        }
        push_row(b.neighbor_sum);
        push_row(b.gcn_operator);
        push_row(b.neighbor_mean);
    }
    return b;
}

GraphBatch make_batch(const Graph& graph) {
    GraphSet one;
    one.feature_dim = graph.features.cols();
    one.num_classes = graph.label + 1;
    one.graphs.push_back(graph);
    const std::size_t id = 0;
    return make_batch(one, std::span<const std::size_t>(&id, 1));
}

namespace {

Var bind(Tape& tape, Parameter* p, bool grad) {
    return grad ? tape.parameter(*p) : tape.constant(p->value);
}

Var batch_norm(Tape& tape, const Var& x, const LayerWeights& w, const ForwardContext& ctx) {
    const bool grad = ctx.training;
    if (ctx.training) {
        const Tensor& v = x.value();
        const double n = double(v.rows());
        for (std::size_t c = 0; c < v.cols(); ++c) {
            double mean = 0.0, var = 0.0;
            for (std::size_t r = 0; r < v.rows(); ++r) mean += v(r, c);
            mean /= n;
            for (std::size_t r = 0; r < v.rows(); ++r) var += (v(r, c) - mean) * (v(r, c) - mean);
            var /= n;
            w.bn_mean->value[c] = (1.0 - kBatchNormMomentum) * w.bn_mean->value[c] + kBatchNormMomentum * mean;
            w.bn_var->value[c] = (1.0 - kBatchNormMomentum) * w.bn_var->value[c] + kBatchNormMomentum * var;
        }
        Var xhat = ops::column_standardize(x, kBatchNormEps);
        return ops::add_row(ops::mul_row(xhat, bind(tape, w.bn_gamma, grad)), bind(tape, w.bn_beta, grad));
    }
    const std::size_t c = x.cols();
    Tensor shift(1, c), inv(1, c);
    for (std::size_t k = 0; k < c; ++k) {
        shift[k] = -w.bn_mean->value[k];
        inv[k] = 1.0 / std::sqrt(w.bn_var->value[k] + kBatchNormEps);
    }
    Var xhat = ops::mul_row(ops::add_row(x, tape.constant(shift)), tape.constant(inv));
    return ops::add_row(ops::mul_row(xhat, bind(tape, w.bn_gamma, false)), bind(tape, w.bn_beta, false));
}

}  // namespace

Var gnn_layer_forward(Tape& tape, const GraphBatch& batch, const Var& h, const LayerWeights& w,
                      const LayerOptions& options, const ForwardContext& ctx) {
    if (h.rows() != batch.segments.total()) {
        throw DimensionError("gnn layer: node matrix " + shape_string(h.value()) + " for " +
                             std::to_string(batch.segments.total()) + " nodes");
    }
    const bool grad = ctx.training;
    Var pre;
    switch (options.backbone) {
        case Backbone::GIN: {
            Var agg = ops::add(ops::scale(h, 1.0 + options.gin_eps), ops::sparse_apply(batch.neighbor_sum, h));
            Var hidden = ops::relu(ops::add_row(ops::matmul(agg, bind(tape, w.w, grad)), bind(tape, w.b, grad)));
            pre = ops::add_row(ops::matmul(hidden, bind(tape, w.w2, grad)), bind(tape, w.b2, grad));
            break;
        }
        case Backbone::GCN: {
            Var agg = ops::sparse_apply(batch.gcn_operator, h);
            pre = ops::add_row(ops::matmul(agg, bind(tape, w.w, grad)), bind(tape, w.b, grad));
            break;
        }
        case Backbone::SAGE: {
            Var parts[] = {h, ops::sparse_apply(batch.neighbor_mean, h)};
            pre = ops::add_row(ops::matmul(ops::concat_cols(parts), bind(tape, w.w, grad)), bind(tape, w.b, grad));
            break;
        }
    }
    if (w.bn_gamma != nullptr) {
        pre = batch_norm(tape, pre, w, ctx);
    }
    return options.activation ? ops::relu(pre) : pre;
}

AttentionReadout attention_readout(const Var& h, const Var& w1, const Var& w2, const Segments& segments) {
    if (h.rows() == 0 || segments.count() == 0) {
        throw ArgumentError("attention readout over an empty graph");
    }
    if (w1.rows() != h.cols() || w2.rows() != w1.cols() || w2.cols() != 1) {
        throw DimensionError("attention readout: h " + shape_string(h.value()) + ", w1 " + shape_string(w1.value()) +
                             ", w2 " + shape_string(w2.value()));
    }
    Var scores = ops::matmul(ops::tanh(ops::matmul(h, w1)), w2);
    Var attention = ops::segment_softmax(scores, segments);
    return {attention, ops::segment_weighted_sum(attention, h, segments)};
}

Var multi_level_pool(std::span<const Var> readouts, std::span<const Var> omegas, const PoolWeights& mlp,
                     std::size_t expected_layers) {
    if (readouts.size() != expected_layers || omegas.size() != expected_layers) {
        throw ArgumentError("multi-level pooling expects " + std::to_string(expected_layers) + " readouts, got " +
                            std::to_string(readouts.size()) + " readouts and " + std::to_string(omegas.size()) +
                            " weights");
    }
    std::vector<Var> scaled;
    scaled.reserve(readouts.size());
    for (std::size_t l = 0; l < readouts.size(); ++l) scaled.push_back(ops::scale_by(readouts[l], omegas[l]));
    Var cat = ops::concat_cols(scaled);
    Var hidden = ops::relu(ops::add_row(ops::matmul(cat, mlp.w1), mlp.b1));
    return ops::add_row(ops::matmul(hidden, mlp.w2), mlp.b2);
}

Encoder::Encoder(const EncoderConfig& config, std::size_t input_dim, ParameterStore& store, Rng& rng)
    : config_(config), input_dim_(input_dim) {
    validate(config_);
    if (input_dim == 0) throw ArgumentError("encoder input dimension must be >= 1");
    const std::size_t r = config_.hidden_dim;
    const std::size_t q = config_.attention_dim;
    for (std::size_t l = 0; l < config_.layers; ++l) {
        const std::string p = "enc.l" + std::to_string(l) + ".";
        const std::size_t in = l == 0 ? input_dim : r;
        LayerWeights w;
        switch (config_.backbone) {
            case Backbone::GIN:
                w.w = &store.add(p + "w", glorot_uniform(in, r, rng));
                w.b = &store.add(p + "b", Tensor(1, r));
                w.w2 = &store.add(p + "w2", glorot_uniform(r, r, rng));
                w.b2 = &store.add(p + "b2", Tensor(1, r));
                break;
            case Backbone::GCN:
                w.w = &store.add(p + "w", glorot_uniform(in, r, rng));
                w.b = &store.add(p + "b", Tensor(1, r));
                break;
            case Backbone::SAGE:
                w.w = &store.add(p + "w", glorot_uniform(2 * in, r, rng));
                w.b = &store.add(p + "b", Tensor(1, r));
                break;
        }
        if (config_.batch_norm) {
            w.bn_gamma = &store.add(p + "bn_gamma", Tensor(1, r, 1.0));
            w.bn_beta = &store.add(p + "bn_beta", Tensor(1, r));
            w.bn_mean = &store.add(p + "bn_mean", Tensor(1, r), false);
            w.bn_var = &store.add(p + "bn_var", Tensor(1, r, 1.0), false);
        }
        layers_.push_back(w);
        if (config_.readout == Readout::Attention) {
            att_w1_.push_back(&store.add(p + "att_w1", glorot_uniform(r, q, rng)));
            att_w2_.push_back(&store.add(p + "att_w2", glorot_uniform(q, 1, rng)));
        }
        omega_.push_back(&store.add(p + "omega", Tensor(1, 1, 1.0)));
    }
    pool_w1_ = &store.add("enc.pool.w1", glorot_uniform(config_.layers * r, config_.mlp_hidden, rng));
    pool_b1_ = &store.add("enc.pool.b1", Tensor(1, config_.mlp_hidden));
    pool_w2_ = &store.add("enc.pool.w2", glorot_uniform(config_.mlp_hidden, r, rng));
    pool_b2_ = &store.add("enc.pool.b2", Tensor(1, r));
}

Var Encoder::forward(Tape& tape, const GraphBatch& batch, const ForwardContext& ctx, EncoderTrace* trace) const {
    if (batch.features.cols() != input_dim_) {
        throw DimensionError("encoder expects " + std::to_string(input_dim_) + " input features, batch has " +
                             shape_string(batch.features));
    }
    if (batch.graph_count() == 0) throw ArgumentError("encoder: empty batch");
    if (ctx.training && config_.dropout > 0.0 && ctx.rng == nullptr) {
        throw ArgumentError("encoder: dropout needs a random source");
    }
    const bool grad = ctx.training;
    const LayerOptions options{config_.backbone, config_.gin_eps, true};
    Var h = tape.constant(batch.features);
    std::vector<Var> readouts;
    std::vector<Var> omegas;
    for (std::size_t l = 0; l < config_.layers; ++l) {
        h = gnn_layer_forward(tape, batch, h, layers_[l], options, ctx);
        if (ctx.training && config_.dropout > 0.0) {
            Tensor mask(h.rows(), h.cols());
            const double keep = 1.0 - config_.dropout;
            for (double& m : mask.data()) m = ctx.rng->uniform() < keep ? 1.0 / keep : 0.0;
            h = ops::mul_const(h, mask);
        }
        AttentionReadout att;
        if (config_.readout == Readout::Attention) {
            att = attention_readout(h, bind(tape, att_w1_[l], grad), bind(tape, att_w2_[l], grad), batch.segments);
        } else {
            att.attention = tape.constant(Tensor(h.rows(), 1, 1.0));
            att.readout = ops::segment_weighted_sum(att.attention, h, batch.segments);
        }
        readouts.push_back(att.readout);
        omegas.push_back(bind(tape, omega_[l], grad));
        if (trace != nullptr) {
            trace->node_embeddings.push_back(h.value());
            trace->attention.push_back(att.attention.value());
            trace->readouts.push_back(att.readout.value());
        }
    }
    const PoolWeights mlp{bind(tape, pool_w1_, grad), bind(tape, pool_b1_, grad), bind(tape, pool_w2_, grad),
                          bind(tape, pool_b2_, grad)};
    return multi_level_pool(readouts, omegas, mlp, config_.layers);
}

Tensor Encoder::embed(const GraphBatch& batch, EncoderTrace* trace) const {
    Tape tape;
    return forward(tape, batch, ForwardContext{}, trace).value();
}

Tensor encode_graph(const Graph& graph, const Encoder& encoder) { return encoder.embed(make_batch(graph)); }

}  // namespace simba
