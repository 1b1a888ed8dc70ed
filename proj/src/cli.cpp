#include "simba/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "simba/analysis.hpp"
#include "simba/config.hpp"
#include "simba/errors.hpp"
#include "simba/metrics.hpp"
#include "simba/parameters.hpp"
#include "simba/partition.hpp"
#include "simba/pipeline.hpp"
#include "simba/report.hpp"
#include "simba/synthetic.hpp"

namespace simba::cli {

namespace {

std::string fmt(double x, int digits = 4) {
    if (!std::isfinite(x)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

// Flags that map onto RunConfig keys. Values are applied after the config
// file so the command line wins.
struct RunFlags {
    struct Entry {
        CLI::Option* option;
        std::string key;
        std::string value;
    };
    std::vector<std::unique_ptr<Entry>> entries;
    std::string config_file;
    bool transductive = false;
    CLI::Option* transductive_flag = nullptr;

    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto e = std::make_unique<Entry>();
        e->key = key;
        e->option = app->add_option(flag, e->value, help);
        entries.push_back(std::move(e));
    }

    void attach(CLI::App* app) {
        app->add_option("--config", config_file, "Flat key = value config file")->check(CLI::ExistingFile);
        add(app, "--dataset", "dataset", "TU dataset directory or synth:key=value,... recipe");
        add(app, "--dataset-name", "dataset_name", "TU file prefix (defaults to the directory name)");
        add(app, "--features", "features", "Node features: auto, labels, attributes, degree");
        add(app, "--backbone", "encoder.backbone", "Message-passing backbone");
        entries.back()->option->check(CLI::IsMember({"gin", "gcn", "sage"}));
        add(app, "--readout", "encoder.readout", "Per-layer graph readout");
        entries.back()->option->check(CLI::IsMember({"attention", "sum"}));
        add(app, "--layers", "encoder.layers", "Message-passing layers");
        add(app, "--hidden-dim", "encoder.hidden_dim", "Hidden width r");
        add(app, "--attention-dim", "encoder.attention_dim", "Attention width q");
        add(app, "--dropout", "encoder.dropout", "Dropout rate");
        add(app, "--k", "g2g.k", "Neighbours per graph in the graphs-to-graph abstraction");
        add(app, "--g2g-hops", "g2g.hops", "Propagation steps over the abstraction");
        add(app, "--rebuild-interval", "g2g.rebuild_interval", "Epochs between abstraction rebuilds");
        transductive_flag = app->add_flag("--transductive", transductive, "Joint train + evaluation topology");
        add(app, "--lambda", "rew.lambda", "Energy propagation retention");
        add(app, "--t-steps", "rew.steps", "Energy propagation steps");
        add(app, "--eps-min", "rew.eps_min", "Smallest re-weighting factor");
        add(app, "--eps-max", "rew.eps_max", "Largest re-weighting factor");
        add(app, "--lr", "optimizer.lr", "Adam learning rate");
        add(app, "--weight-decay", "optimizer.weight_decay", "Adam weight decay");
        add(app, "--epochs", "epochs", "Maximum epochs");
        add(app, "--patience", "patience", "Early-stopping patience (epochs)");
        add(app, "--seed", "seed", "Seed of the first run");
        add(app, "--repeats", "repeats", "Number of seeds (seed, seed + 1, ...)");
        add(app, "--split-ratios", "split_ratios", "train:val:test ratios");
        add(app, "--head-fraction", "head_fraction", "Fraction of largest graphs forming the head");
        add(app, "--ablate", "ablation", "Ablation variant");
        entries.back()->option->check(CLI::IsMember({"none", "no-g2g", "no-rew"}));
        add(app, "--energy-trace", "energy_trace", "CSV trace of energies and weights per epoch");
        add(app, "--dump-abstraction", "abstraction_dump", "Edge list of the final training abstraction");
    }

    RunConfig build(std::optional<std::filesystem::path> sidecar = std::nullopt) const {
        RunConfig config;
        if (sidecar && config_file.empty() && std::filesystem::exists(*sidecar)) apply_config_file(config, *sidecar);
        if (!config_file.empty()) apply_config_file(config, config_file);
        for (const auto& e : entries)
            if (e->option->count() > 0) apply_setting(config, e->key, e->value);
        if (transductive_flag->count() > 0) config.g2g.transductive = transductive;
        return config;
    }
};

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
    return std::filesystem::path(checkpoint.string() + ".config");
}

void write_sidecar(const RunConfig& config, const std::filesystem::path& checkpoint) {
    std::ofstream out(sidecar_path(checkpoint));
    if (!out) throw Error("cannot write " + sidecar_path(checkpoint).string());
    for (const auto& [k, v] : config_entries(config))
        if (!v.empty()) out << k << " = " << v << '\n';
}

std::string checkpoint_for(const std::string& base, std::size_t run, std::size_t repeats, std::uint64_t seed) {
    if (base.empty() || repeats == 1) return base;
    (void)run;
    return base + ".seed" + std::to_string(seed);
}

void print_report_line(std::ostream& out, const MetricsReport& r) {
    out << "seed " << r.seed << ": test accuracy " << fmt(r.accuracy) << ", macro-F1 " << fmt(r.macro_f1)
        << ", head " << fmt(r.head_accuracy) << ", tail " << fmt(r.tail_accuracy) << ", best epoch "
        << r.best_epoch << " of " << r.epochs_run << '\n';
}

int cmd_train(const RunFlags& flags, const std::string& out_path, const std::string& checkpoint, std::ostream& out) {
    RunConfig base = flags.build();
    validate(base);
    std::vector<MetricsReport> runs;
    for (std::size_t i = 0; i < base.repeats; ++i) {
        RunConfig config = base;
        config.seed = base.seed + i;
        config.repeats = 1;
        GraphSet set = load_dataset(config);
        TrainResult result = train(config, set);
        print_report_line(out, result.report);
        std::string ck = checkpoint_for(checkpoint, i, base.repeats, config.seed);
        if (!ck.empty()) {
            save_checkpoint(result.model->parameters(), ck);
            write_sidecar(config, ck);
        }
        runs.push_back(std::move(result.report));
    }
    auto doc = make_report(runs);
    if (runs.size() > 1) {
        const auto& acc = doc["summary"]["accuracy"];
        out << "mean test accuracy " << fmt(acc["mean"].get<double>()) << " +- " << fmt(acc["std"].get<double>())
            << " over " << runs.size() << " seeds\n";
    }
    if (!out_path.empty()) write_json(doc, out_path);
    return Ok;
}

std::unique_ptr<SimbaModel> restore_model(const RunConfig& config, const GraphSet& set, const std::string& checkpoint) {
    auto model = std::make_unique<SimbaModel>(config.encoder, set.feature_dim, set.num_classes, config.seed);
    load_checkpoint(model->parameters(), checkpoint);
    return model;
}

int cmd_eval(const RunFlags& flags, const std::string& checkpoint, const std::string& split_name,
             const std::string& out_path, std::ostream& out) {
    RunConfig config = flags.build(sidecar_path(checkpoint));
    validate(config);
    GraphSet set = load_dataset(config);
    auto model = restore_model(config, set, checkpoint);
    const std::vector<std::size_t>* split = &set.splits.test;
    if (split_name == "val") split = &set.splits.val;
    else if (split_name == "train") split = &set.splits.train;
    MetricsReport report = evaluate(*model, set, *split, config);
    out << split_name << " accuracy " << fmt(report.accuracy) << ", macro-F1 " << fmt(report.macro_f1) << ", head "
        << fmt(report.head_accuracy) << ", tail " << fmt(report.tail_accuracy) << '\n';
    if (!out_path.empty()) write_json(make_report(std::span<const MetricsReport>(&report, 1)), out_path);
    return Ok;
}

int cmd_stats(const RunFlags& flags, const std::string& out_path, std::ostream& out) {
    RunConfig config = flags.build();
    if (config.dataset.empty()) throw ArgumentError("--dataset is required");
    GraphSet set = load_dataset(config);
    DatasetStats s = describe(set);
    const double sir = compute_sir(set);
    out << "dataset      " << set.name << '\n'
        << "graphs       " << s.graphs << '\n'
        << "classes      " << s.classes << '\n'
        << "features     " << s.feature_dim << '\n'
        << "avg nodes    " << fmt(s.avg_nodes, 2) << '\n'
        << "avg edges    " << fmt(s.avg_edges, 2) << '\n'
        << "min nodes    " << s.min_nodes << '\n'
        << "max nodes    " << s.max_nodes << '\n'
        << "head/tail    " << set.head_ids.size() << '/' << set.tail_ids.size() << '\n'
        << "SIR          " << fmt(sir, 3) << '\n'
        << "log2 SIR     " << fmt(std::log2(sir), 3) << '\n'
        << "class counts";
    for (std::size_t c : s.class_counts) out << ' ' << c;
    out << '\n';
    if (!out_path.empty()) {
        nlohmann::json doc = {{"schema_version", 1},
                              {"dataset", set.name},
                              {"graphs", s.graphs},
                              {"classes", s.classes},
                              {"feature_dim", s.feature_dim},
                              {"avg_nodes", s.avg_nodes},
                              {"avg_edges", s.avg_edges},
                              {"min_nodes", s.min_nodes},
                              {"max_nodes", s.max_nodes},
                              {"head", set.head_ids.size()},
                              {"tail", set.tail_ids.size()},
                              {"sir", sir},
                              {"log2_sir", std::log2(sir)},
                              {"class_counts", s.class_counts}};
        write_json(doc, out_path);
    }
    return Ok;
}

struct SynthFlags {
    SynthConfig config;
    std::string motif = "motifs";
    std::string out_dir;
    std::string name = "SYNTH";
};

int cmd_synth(const SynthFlags& flags, std::ostream& out) {
    SynthConfig cfg = flags.config;
    if (flags.motif == "motifs") cfg.motif = MotifRule::Motifs;
    else if (flags.motif == "trivial") cfg.motif = MotifRule::Trivial;
    else throw ArgumentError("unknown motif rule: " + flags.motif);
    GraphSet set = synth_powerlaw_set(cfg);
    assign_head_tail(set, 0.2);
    std::filesystem::create_directories(flags.out_dir);
    write_tu_dataset(set, flags.out_dir, flags.name);
    DatasetStats s = describe(set);
    out << "wrote " << s.graphs << " graphs (" << s.classes << " classes, avg nodes " << fmt(s.avg_nodes, 2)
        << ", SIR " << fmt(compute_sir(set), 3) << ") to " << flags.out_dir << '\n';
    return Ok;
}

struct CmdFlags {
    std::string checkpoint;
    std::string sampling = "all";
    std::size_t sample_size = 0;
    std::uint64_t sample_seed = 0;
    std::size_t moments = 5;
};

int cmd_cmd(const RunFlags& flags, const CmdFlags& cf, const std::string& out_path, std::ostream& out) {
    RunConfig config = flags.build(sidecar_path(cf.checkpoint));
    validate(config);
    GraphSet set = load_dataset(config);
    auto model = restore_model(config, set, cf.checkpoint);
    Sampling sampling = parse_sampling(cf.sampling);
    auto ids = sample_graphs(set, sampling, cf.sample_size, cf.sample_seed);
    GraphSet sample = subset(set, ids);
    Tensor emb = model->embed_all(sample);
    HeadTailCmd r = head_tail_cmd(sample, emb, config.head_fraction, cf.moments);
    out << "sampling " << to_string(sampling) << ": " << ids.size() << " graphs, head " << r.head << ", tail "
        << r.tail << ", SIR " << fmt(r.sir, 3) << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", r.cmd);
    out << "cmd " << buf << '\n';
    if (!out_path.empty()) {
        nlohmann::json doc = {{"schema_version", 1},   {"sampling", to_string(sampling)},
                              {"graphs", ids.size()},  {"head", r.head},
                              {"tail", r.tail},        {"sir", r.sir},
                              {"moments", cf.moments}, {"cmd", r.cmd}};
        write_json(doc, out_path);
    }
    return Ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Size-imbalanced graph classification", args.empty() ? "simba" : args[0]};
    app.require_subcommand(1);

    std::string out_path;
    std::string checkpoint;

    RunFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "Train and report test metrics");
    train_flags.attach(train_cmd);
    train_cmd->add_option("--out", out_path, "Metrics JSON path");
    train_cmd->add_option("--checkpoint", checkpoint, "Save the best-validation parameters here");

    RunFlags eval_flags;
    std::string split = "test";
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval_flags.attach(eval_cmd);
    eval_cmd->add_option("--out", out_path, "Metrics JSON path");
    eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint to evaluate")->required();
    eval_cmd->add_option("--split", split, "Split to evaluate")->check(CLI::IsMember({"train", "val", "test"}));

    RunFlags stats_flags;
    auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics");
    stats_flags.attach(stats_cmd);
    stats_cmd->add_option("--out", out_path, "Statistics JSON path");

    SynthFlags synth_flags;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic power-law set in TU format");
    synth_cmd->add_option("--graphs", synth_flags.config.graphs, "Number of graphs");
    synth_cmd->add_option("--exponent", synth_flags.config.exponent, "Power-law exponent of graph sizes");
    synth_cmd->add_option("--min-size", synth_flags.config.min_size, "Smallest graph");
    synth_cmd->add_option("--max-size", synth_flags.config.max_size, "Largest graph");
    synth_cmd->add_option("--classes", synth_flags.config.classes, "Number of classes");
    synth_cmd->add_option("--motif", synth_flags.motif, "Label rule")->check(CLI::IsMember({"motifs", "trivial"}));
    synth_cmd->add_option("--node-types", synth_flags.config.node_types, "One-hot node type width");
    synth_cmd->add_option("--extra-edges", synth_flags.config.extra_edge_ratio, "Extra random edges per node");
    synth_cmd->add_option("--seed", synth_flags.config.seed, "Generator seed");
    synth_cmd->add_option("--name", synth_flags.name, "File prefix");
    synth_cmd->add_option("--out", synth_flags.out_dir, "Output directory")->required();

    RunFlags cmd_flags;
    CmdFlags cf;
    auto* cmd_cmd_app = app.add_subcommand("cmd", "Central moment discrepancy between head and tail embeddings");
    cmd_flags.attach(cmd_cmd_app);
    cmd_cmd_app->add_option("--checkpoint", cf.checkpoint, "Trained parameters")->required();
    cmd_cmd_app->add_option("--sampling", cf.sampling, "Graph sampling")
        ->check(CLI::IsMember({"all", "long-tailed", "balanced"}));
    cmd_cmd_app->add_option("--sample-size", cf.sample_size, "Graphs per sample (0 = all)");
    cmd_cmd_app->add_option("--sample-seed", cf.sample_seed, "Seed of the long-tailed sample");
    cmd_cmd_app->add_option("--moments", cf.moments, "Number of moments")->check(CLI::PositiveNumber);
    cmd_cmd_app->add_option("--out", out_path, "Result JSON path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return Usage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_flags, out_path, checkpoint, out);
        if (eval_cmd->parsed()) return cmd_eval(eval_flags, checkpoint, split, out_path, out);
        if (stats_cmd->parsed()) return cmd_stats(stats_flags, out_path, out);
        if (synth_cmd->parsed()) return cmd_synth(synth_flags, out);
        if (cmd_cmd_app->parsed()) return cmd_cmd(cmd_flags, cf, out_path, out);
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return Usage;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return NumericFailure;
    } catch (const Error& e) {
        err << "data error: " << e.what() << '\n';
        return DataFailure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return DataFailure;
    }
    return Usage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, out, err);
}

}  // namespace simba::cli
