#include "simba/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "simba/errors.hpp"
#include "simba/log.hpp"
#include "simba/metrics.hpp"
#include "simba/partition.hpp"

namespace simba {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Tensor gather(const Tensor& t, std::span<const std::size_t> rows) {
    Tensor out(rows.size(), t.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = t.row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Tensor stack(const Tensor& a, const Tensor& b) {
    Tensor out(a.rows() + b.rows(), a.cols());
    std::copy(a.data().begin(), a.data().end(), out.data().begin());
    std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(a.size()));
    return out;
}

std::vector<std::size_t> argmax_rows(const Tensor& t) {
    std::vector<std::size_t> out(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) {
        auto r = t.row(i);
        out[i] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    }
    return out;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ArgumentError("invalid integer for " + key + ": " + v);
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used == v.size()) return out;
    } catch (const std::exception&) {
    }
    throw ArgumentError("invalid number for " + key + ": " + v);
}

void write_divergence_dump(const std::string& path, std::size_t epoch, std::span<const std::size_t> members,
                           const EnergyState& state) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) return;
    write_energy_trace(out, 0, members, state);
    out << "# diverged at epoch " << epoch << '\n';
}

}  // namespace

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::None: return "none";
        case Ablation::NoG2G: return "no-g2g";
        case Ablation::NoRew: return "no-rew";
    }
    return "none";
}

Ablation parse_ablation(const std::string& s) {
    if (s == "none" || s.empty()) return Ablation::None;
    if (s == "no-g2g") return Ablation::NoG2G;
    if (s == "no-rew") return Ablation::NoRew;
    throw ArgumentError("unknown ablation: " + s);
}

void validate(const RunConfig& config) {
    if (config.dataset.empty()) throw ArgumentError("dataset is required");
    validate(config.encoder);
    validate(config.rew);
    if (config.g2g.k == 0) throw ArgumentError("k must be >= 1");
    if (config.g2g.rebuild_interval == 0) throw ArgumentError("rebuild interval must be >= 1");
    if (config.epochs == 0) throw ArgumentError("epochs must be >= 1");
    if (config.repeats == 0) throw ArgumentError("repeats must be >= 1");
    if (!(config.optimizer.lr > 0.0)) throw ArgumentError("learning rate must be positive");
    if (!(config.head_fraction > 0.0 && config.head_fraction < 1.0))
        throw ArgumentError("head fraction must lie in (0, 1)");
    for (double r : config.split_ratios)
        if (!(r > 0.0)) throw ArgumentError("split ratios must be positive");
}

bool is_synth_recipe(const std::string& dataset) { return dataset.rfind("synth:", 0) == 0 || dataset == "synth"; }

SynthConfig parse_synth_recipe(const std::string& recipe) {
    SynthConfig cfg;
    std::string body = recipe;
    if (body.rfind("synth", 0) == 0) body = body.substr(5);
    if (!body.empty() && body.front() == ':') body = body.substr(1);
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t end = body.find(',', pos);
        if (end == std::string::npos) end = body.size();
        std::string item = body.substr(pos, end - pos);
        pos = end + 1;
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ArgumentError("synthetic recipe entry without '=': " + item);
        std::string key = item.substr(0, eq);
        std::string value = item.substr(eq + 1);
        if (key == "graphs") cfg.graphs = parse_size(key, value);
        else if (key == "exponent") cfg.exponent = parse_real(key, value);
        else if (key == "min") cfg.min_size = parse_size(key, value);
        else if (key == "max") cfg.max_size = parse_size(key, value);
        else if (key == "classes") cfg.classes = parse_size(key, value);
        else if (key == "seed") cfg.seed = parse_size(key, value);
        else if (key == "types") cfg.node_types = parse_size(key, value);
        else if (key == "extra") cfg.extra_edge_ratio = parse_real(key, value);
        else if (key == "motif") {
            if (value == "motifs") cfg.motif = MotifRule::Motifs;
            else if (value == "trivial") cfg.motif = MotifRule::Trivial;
            else throw ArgumentError("unknown motif rule: " + value);
        } else {
            throw ArgumentError("unknown synthetic recipe key: " + key);
        }
    }
    return cfg;
}

void prepare_dataset(GraphSet& set, const RunConfig& config, std::uint64_t seed) {
    assign_head_tail(set, config.head_fraction, config.head_count);
    set.splits = stratified_split(set, config.split_ratios, seed);
}

GraphSet load_dataset(const RunConfig& config, std::uint64_t seed) {
    GraphSet set;
    if (is_synth_recipe(config.dataset)) {
        set = synth_powerlaw_set(parse_synth_recipe(config.dataset));
    } else {
        std::filesystem::path dir(config.dataset);
        std::string name = config.dataset_name;
        if (name.empty()) name = dir.lexically_normal().filename().string();
        if (name.empty()) name = dir.lexically_normal().parent_path().filename().string();
        set = parse_tu_dataset(dir, name, ParseOptions{config.features});
    }
    prepare_dataset(set, config, seed);
    return set;
}

GraphSet load_dataset(const RunConfig& config) { return load_dataset(config, config.seed); }

SimbaModel::SimbaModel(const EncoderConfig& encoder, std::size_t input_dim, std::size_t classes, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 1));
    encoder_ = std::make_unique<Encoder>(encoder, input_dim, store_, rng);
    classifier_ = std::make_unique<Classifier>(encoder.hidden_dim, classes, store_, rng);
}

Tensor SimbaModel::embed_all(const GraphSet& set) const {
    std::vector<std::size_t> ids(set.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return encoder_->embed(make_batch(set, ids));
}

Tensor SimbaModel::embed_rows(const GraphSet& set, std::span<const std::size_t> ids) const {
    Tensor part = encoder_->embed(make_batch(set, ids));
    Tensor out(set.size(), part.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto src = part.row(i);
        std::copy(src.begin(), src.end(), out.row(ids[i]).begin());
    }
    return out;
}

Var simba_objective(Tape& tape, const SimbaModel& model, const GraphBatch& batch,
                    std::span<const std::size_t> labels, const G2GAbstraction* abstraction, std::size_t hops,
                    std::span<const double> delta, const ForwardContext& ctx) {
    Var h = model.encoder().forward(tape, batch, ctx);
    if (abstraction) h = g2g_propagate(*abstraction, h, hops);
    Var logits = model.classifier().forward(tape, h, ctx.training);
    return weighted_nll_loss(logits, labels, delta);
}

Predictions predict(const SimbaModel& model, const GraphSet& set, const Tensor& embeddings,
                    std::span<const std::size_t> eval_ids, const RunConfig& config) {
    if (eval_ids.empty()) throw ArgumentError("empty evaluation split");
    Predictions out;
    out.ids.assign(eval_ids.begin(), eval_ids.end());
    Tensor eval_emb = gather(embeddings, eval_ids);
    Tensor logits;
    if (config.ablation == Ablation::NoG2G) {
        logits = model.classifier().forward(eval_emb);
    } else {
        const auto& train_ids = set.splits.train;
        Tensor train_emb = gather(embeddings, train_ids);
        const std::size_t hops = config.g2g.hops;
        if (config.g2g.transductive) {
            std::vector<std::size_t> members(train_ids.begin(), train_ids.end());
            members.insert(members.end(), eval_ids.begin(), eval_ids.end());
            Tensor all = stack(train_emb, eval_emb);
            std::size_t k = std::min(config.g2g.k, all.rows() - 1);
            auto abs = build_knn_abstraction(cosine_similarity_matrix(all), k, members);
            Tensor prop = g2g_propagate(abs, all, hops);
            std::vector<std::size_t> rows(eval_ids.size());
            for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = train_ids.size() + i;
            logits = model.classifier().forward(gather(prop, rows));
        } else {
            std::size_t k = std::min(config.g2g.k, train_ids.size() - 1);
            auto train_abs = build_knn_abstraction(cosine_similarity_matrix(train_emb), k,
                                                   std::vector<std::size_t>(train_ids.begin(), train_ids.end()));
            auto ext = extend_inductive(train_abs, train_emb, eval_emb, std::min(config.g2g.k, train_ids.size()),
                                        out.ids);
            Tensor prop = g2g_propagate(ext, stack(train_emb, eval_emb), hops);
            std::vector<std::size_t> rows(eval_ids.size());
            for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = train_ids.size() + i;
            logits = model.classifier().forward(gather(prop, rows));
        }
    }
    out.predicted = argmax_rows(logits);
    out.probabilities = predictive_distribution(logits);
    return out;
}

namespace {

MetricsReport score(const GraphSet& set, const Predictions& pred, std::size_t classes) {
    MetricsReport r;
    std::vector<std::size_t> labels(pred.ids.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = set.graphs[pred.ids[i]].label;
    r.accuracy = accuracy(pred.predicted, labels);
    r.macro_f1 = macro_f1(pred.predicted, labels, classes);
    r.eval_size = labels.size();

    std::vector<char> is_head(set.size(), 0);
    for (std::size_t id : set.head_ids) is_head[id] = 1;
    std::vector<std::size_t> hp, hl, tp, tl;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (is_head[pred.ids[i]]) {
            hp.push_back(pred.predicted[i]);
            hl.push_back(labels[i]);
        } else {
            tp.push_back(pred.predicted[i]);
            tl.push_back(labels[i]);
        }
    }
    r.head_accuracy = accuracy(hp, hl);
    r.tail_accuracy = accuracy(tp, tl);
    if (!set.head_ids.empty() && !set.tail_ids.empty()) r.sir = compute_sir(set);
    else r.sir = std::numeric_limits<double>::quiet_NaN();
    return r;
}

}  // namespace

MetricsReport evaluate(const SimbaModel& model, const GraphSet& set, std::span<const std::size_t> split,
                       const RunConfig& config) {
    if (split.empty()) throw ArgumentError("empty evaluation split");
    Tensor emb = model.embed_all(set);
    MetricsReport r = score(set, predict(model, set, emb, split, config), set.num_classes);
    r.train_size = set.splits.train.size();
    r.seed = config.seed;
    r.config = config;
    return r;
}

TrainResult train(const RunConfig& config, const GraphSet& set) {
    validate(config);
    if (set.splits.train.size() < 2) throw SplitError("training split needs at least 2 graphs");
    if (set.splits.val.empty() || set.splits.test.empty()) throw SplitError("validation and test splits must be non-empty");
    const auto started = std::chrono::steady_clock::now();

    const bool use_g2g = config.ablation != Ablation::NoG2G;
    const bool use_rew = config.ablation == Ablation::None;

    TrainResult result;
    result.model = std::make_unique<SimbaModel>(config.encoder, set.feature_dim, set.num_classes, config.seed);
    SimbaModel& model = *result.model;
    Adam adam(model.parameters().trainable(), config.optimizer);
    Rng dropout_rng(mix_seed(config.seed, 2));

    const auto& train_ids = set.splits.train;
    GraphBatch batch = make_batch(set, train_ids);
    std::vector<std::size_t> labels(train_ids.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = set.graphs[train_ids[i]].label;
    const std::size_t k = std::min(config.g2g.k, train_ids.size() - 1);
    const std::vector<std::size_t> members(train_ids.begin(), train_ids.end());

    std::ofstream trace;
    if (!config.energy_trace.empty() && use_rew) {
        trace.open(config.energy_trace);
        if (!trace) throw ArgumentError("cannot write energy trace: " + config.energy_trace);
    }

    std::optional<G2GAbstraction> abstraction;
    std::vector<double> delta(train_ids.size(), 1.0);
    MetricsReport& report = result.report;
    double best_val = -1.0;
    std::size_t since_best = 0;
    auto best = model.parameters().snapshot();
    std::vector<std::size_t> seen(train_ids.begin(), train_ids.end());
    seen.insert(seen.end(), set.splits.val.begin(), set.splits.val.end());

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Tape tape;
        ForwardContext ctx{true, &dropout_rng};
        Var h = model.encoder().forward(tape, batch, ctx);
        if (use_g2g) {
            if (!abstraction || epoch % config.g2g.rebuild_interval == 0)
                abstraction = build_knn_abstraction(cosine_similarity_matrix(h.value()), k, members);
            h = g2g_propagate(*abstraction, h, config.g2g.hops);
        }
        Var logits = model.classifier().forward(tape, h, true);
        if (use_rew) {
            result.last_energy = compute_energy_state(logits.value(), *abstraction, config.rew);
            delta = result.last_energy.weights;
            if (trace) write_energy_trace(trace, epoch, members, result.last_energy);
        }
        Var loss = weighted_nll_loss(logits, labels, delta);
        const double loss_value = loss.value()(0, 0);
        if (!std::isfinite(loss_value)) {
            write_divergence_dump(config.divergence_dump, epoch, members, result.last_energy);
            throw NumericError("loss diverged at epoch " + std::to_string(epoch) +
                               (config.divergence_dump.empty() ? std::string()
                                                               : "; energy state written to " + config.divergence_dump));
        }
        model.parameters().zero_grad();
        tape.backward(loss);
        adam.step();
        report.loss_curve.push_back(loss_value);

        Tensor emb = use_g2g ? model.embed_rows(set, seen) : model.embed_rows(set, set.splits.val);
        Predictions val = predict(model, set, emb, set.splits.val, config);
        std::vector<std::size_t> val_labels(val.ids.size());
        for (std::size_t i = 0; i < val.ids.size(); ++i) val_labels[i] = set.graphs[val.ids[i]].label;
        const double val_acc = accuracy(val.predicted, val_labels);
        report.val_accuracy_curve.push_back(val_acc);
        report.epochs_run = epoch + 1;
        if (val_acc > best_val) {
            best_val = val_acc;
            report.best_epoch = epoch;
            best = model.parameters().snapshot();
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }

    model.parameters().restore(best);
    if (use_g2g && !config.abstraction_dump.empty()) {
        Tensor emb = model.encoder().embed(batch);
        build_knn_abstraction(cosine_similarity_matrix(emb), k, members).dump(config.abstraction_dump);
    }

    MetricsReport test = score(set, predict(model, set, model.embed_all(set), set.splits.test, config), set.num_classes);
    report.accuracy = test.accuracy;
    report.macro_f1 = test.macro_f1;
    report.head_accuracy = test.head_accuracy;
    report.tail_accuracy = test.tail_accuracy;
    report.sir = test.sir;
    report.eval_size = test.eval_size;
    report.train_size = train_ids.size();
    report.seed = config.seed;
    report.config = config;
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

}  // namespace simba
