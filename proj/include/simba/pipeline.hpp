#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simba/encoder.hpp"
#include "simba/energy.hpp"
#include "simba/g2g.hpp"
#include "simba/graph.hpp"
#include "simba/optimizer.hpp"
#include "simba/synthetic.hpp"
#include "simba/tu_dataset.hpp"

namespace simba {

enum class Ablation {
    None,
    NoG2G,  // plain encoder + unweighted loss; no abstraction is ever built
    NoRew,  // graphs-to-graph propagation, unweighted loss
};

std::string to_string(Ablation a);
Ablation parse_ablation(const std::string& s);

struct G2GConfig {
    std::size_t k = 2;
    std::size_t hops = 2;
    std::size_t rebuild_interval = 1;  // epochs between kNN rebuilds
    bool transductive = false;         // evaluation topology over train + evaluated graphs jointly
};

struct RunConfig {
    std::string dataset;       // TU directory, or "synth:key=value,..." recipe
    std::string dataset_name;  // file prefix; defaults to the directory name
    FeatureMode features = FeatureMode::Auto;
    EncoderConfig encoder;
    G2GConfig g2g;
    RewConfig rew;
    AdamConfig optimizer;
    std::size_t epochs = 200;
    std::size_t patience = 50;
    std::uint64_t seed = 0;
    std::size_t repeats = 1;  // seeds seed, seed+1, ...
    std::array<double, 3> split_ratios{6, 2, 2};
    double head_fraction = 0.2;
    std::optional<std::size_t> head_count;
    Ablation ablation = Ablation::None;
    std::string energy_trace;       // CSV path, empty = off
    std::string abstraction_dump;   // edge-list path, empty = off
    std::string divergence_dump = "simba_divergence.csv";
};

void validate(const RunConfig& config);

// "synth:graphs=1000,exponent=2,min=5,max=200,classes=2,motif=motifs,seed=0,types=3,extra=0.1"
bool is_synth_recipe(const std::string& dataset);
SynthConfig parse_synth_recipe(const std::string& recipe);

// Loads (or generates) the dataset and assigns the head/tail partition and
// the stratified split for `seed`.
GraphSet load_dataset(const RunConfig& config);
GraphSet load_dataset(const RunConfig& config, std::uint64_t seed);
void prepare_dataset(GraphSet& set, const RunConfig& config, std::uint64_t seed);

class SimbaModel {
public:
    SimbaModel(const EncoderConfig& encoder, std::size_t input_dim, std::size_t classes, std::uint64_t seed);

    ParameterStore& parameters() { return store_; }
    const ParameterStore& parameters() const { return store_; }
    const Encoder& encoder() const { return *encoder_; }
    const Classifier& classifier() const { return *classifier_; }

    // Embeddings of every graph in `set` (row i = graph i), inference mode.
    Tensor embed_all(const GraphSet& set) const;
    // Same shape as embed_all, but only the listed rows are computed (others stay zero).
    Tensor embed_rows(const GraphSet& set, std::span<const std::size_t> ids) const;

private:
    ParameterStore store_;
    std::unique_ptr<Encoder> encoder_;
    std::unique_ptr<Classifier> classifier_;
};

// Weighted training objective with a given (fixed) topology and weights:
// encoder -> optional propagation over `abstraction` -> classifier ->
// sum_i delta_i * cross-entropy_i. A null abstraction skips propagation.
Var simba_objective(Tape& tape, const SimbaModel& model, const GraphBatch& batch,
                    std::span<const std::size_t> labels, const G2GAbstraction* abstraction, std::size_t hops,
                    std::span<const double> delta, const ForwardContext& ctx);

struct Predictions {
    std::vector<std::size_t> ids;
    std::vector<std::size_t> predicted;
    Tensor probabilities;
};

// Predicts `eval_ids` from precomputed embeddings of all graphs. Unless the
// G2G stage is ablated, each evaluated graph is propagated over the training
// abstraction (inductive) or a joint one (transductive).
Predictions predict(const SimbaModel& model, const GraphSet& set, const Tensor& embeddings,
                    std::span<const std::size_t> eval_ids, const RunConfig& config);

struct MetricsReport {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double head_accuracy = 0.0;  // NaN when the split has no head graphs
    double tail_accuracy = 0.0;  // NaN when the split has no tail graphs
    double sir = 0.0;
    std::vector<double> loss_curve;
    std::vector<double> val_accuracy_curve;
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    std::size_t train_size = 0;
    std::size_t eval_size = 0;
    std::uint64_t seed = 0;
    double wall_clock_seconds = 0.0;
    RunConfig config;
};

// Metrics of `model` on the given split of `set`.
MetricsReport evaluate(const SimbaModel& model, const GraphSet& set, std::span<const std::size_t> split,
                       const RunConfig& config);

struct TrainResult {
    std::unique_ptr<SimbaModel> model;  // restored to the best validation epoch
    MetricsReport report;
    EnergyState last_energy;
};

// Full-batch training. `set` must carry splits and the head/tail partition.
// Test metrics come from the epoch with the highest validation accuracy
// (earliest on ties); training stops after `patience` epochs without
// improvement. Throws NumericError on a non-finite loss after writing the
// last energy state to config.divergence_dump.
TrainResult train(const RunConfig& config, const GraphSet& set);

}  // namespace simba
