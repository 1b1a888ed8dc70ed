#include "simba/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "simba/errors.hpp"

namespace simba {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ArgumentError("invalid integer for " + key + ": " + v);
    return out;
}

double to_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used == v.size()) return out;
    } catch (const std::exception&) {
    }
    throw ArgumentError("invalid number for " + key + ": " + v);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ArgumentError("invalid boolean for " + key + ": " + v);
}

std::string real_str(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

FeatureMode to_features(const std::string& v) {
    if (v == "auto") return FeatureMode::Auto;
    if (v == "labels") return FeatureMode::NodeLabels;
    if (v == "attributes") return FeatureMode::Attributes;
    if (v == "degree") return FeatureMode::Degree;
    throw ArgumentError("unknown feature mode: " + v);
}

std::string features_str(FeatureMode m) {
    switch (m) {
        case FeatureMode::Auto: return "auto";
        case FeatureMode::NodeLabels: return "labels";
        case FeatureMode::Attributes: return "attributes";
        case FeatureMode::Degree: return "degree";
    }
    return "auto";
}

std::array<double, 3> to_ratios(const std::string& key, const std::string& v) {
    std::array<double, 3> out{};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        std::size_t end = v.find(i < 2 ? ':' : '\0', pos);
        if (i < 2 && end == std::string::npos) throw ArgumentError("split ratios must look like 6:2:2");
        if (i == 2) end = v.size();
        out[i] = to_real(key, v.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (key == "dataset") c.dataset = v;
    else if (key == "dataset_name") c.dataset_name = v;
    else if (key == "features") c.features = to_features(v);
    else if (key == "encoder.backbone") c.encoder.backbone = parse_backbone(v);
    else if (key == "encoder.readout") c.encoder.readout = parse_readout(v);
    else if (key == "encoder.layers") c.encoder.layers = to_size(key, v);
    else if (key == "encoder.hidden_dim") c.encoder.hidden_dim = to_size(key, v);
    else if (key == "encoder.attention_dim") c.encoder.attention_dim = to_size(key, v);
    else if (key == "encoder.mlp_hidden") c.encoder.mlp_hidden = to_size(key, v);
    else if (key == "encoder.gin_eps") c.encoder.gin_eps = to_real(key, v);
    else if (key == "encoder.batch_norm") c.encoder.batch_norm = to_bool(key, v);
    else if (key == "encoder.dropout") c.encoder.dropout = to_real(key, v);
    else if (key == "g2g.k") c.g2g.k = to_size(key, v);
    else if (key == "g2g.hops") c.g2g.hops = to_size(key, v);
    else if (key == "g2g.rebuild_interval") c.g2g.rebuild_interval = to_size(key, v);
    else if (key == "g2g.transductive") c.g2g.transductive = to_bool(key, v);
    else if (key == "rew.lambda") c.rew.lambda = to_real(key, v);
    else if (key == "rew.steps") c.rew.steps = to_size(key, v);
    else if (key == "rew.eps_min") c.rew.eps_min = to_real(key, v);
    else if (key == "rew.eps_max") c.rew.eps_max = to_real(key, v);
    else if (key == "optimizer.lr") c.optimizer.lr = to_real(key, v);
    else if (key == "optimizer.beta1") c.optimizer.beta1 = to_real(key, v);
    else if (key == "optimizer.beta2") c.optimizer.beta2 = to_real(key, v);
    else if (key == "optimizer.eps") c.optimizer.eps = to_real(key, v);
    else if (key == "optimizer.weight_decay") c.optimizer.weight_decay = to_real(key, v);
    else if (key == "epochs") c.epochs = to_size(key, v);
    else if (key == "patience") c.patience = to_size(key, v);
    else if (key == "seed") c.seed = to_size(key, v);
    else if (key == "repeats") c.repeats = to_size(key, v);
    else if (key == "split_ratios") c.split_ratios = to_ratios(key, v);
    else if (key == "head_fraction") c.head_fraction = to_real(key, v);
    else if (key == "head_count") {
        if (v.empty() || v == "none") c.head_count.reset();
        else c.head_count = to_size(key, v);
    } else if (key == "ablation") c.ablation = parse_ablation(v);
    else if (key == "energy_trace") c.energy_trace = v;
    else if (key == "abstraction_dump") c.abstraction_dump = v;
    else if (key == "divergence_dump") c.divergence_dump = v;
    else throw ArgumentError("unknown config key: " + key);
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ArgumentError& e) {
            throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
    auto b = [](bool x) { return std::string(x ? "true" : "false"); };
    auto n = [](std::size_t x) { return std::to_string(x); };
    return {
        {"dataset", c.dataset},
        {"dataset_name", c.dataset_name},
        {"features", features_str(c.features)},
        {"encoder.backbone", to_string(c.encoder.backbone)},
        {"encoder.readout", to_string(c.encoder.readout)},
        {"encoder.layers", n(c.encoder.layers)},
        {"encoder.hidden_dim", n(c.encoder.hidden_dim)},
        {"encoder.attention_dim", n(c.encoder.attention_dim)},
        {"encoder.mlp_hidden", n(c.encoder.mlp_hidden)},
        {"encoder.gin_eps", real_str(c.encoder.gin_eps)},
        {"encoder.batch_norm", b(c.encoder.batch_norm)},
        {"encoder.dropout", real_str(c.encoder.dropout)},
        {"g2g.k", n(c.g2g.k)},
        {"g2g.hops", n(c.g2g.hops)},
        {"g2g.rebuild_interval", n(c.g2g.rebuild_interval)},
        {"g2g.transductive", b(c.g2g.transductive)},
        {"rew.lambda", real_str(c.rew.lambda)},
        {"rew.steps", n(c.rew.steps)},
        {"rew.eps_min", real_str(c.rew.eps_min)},
        {"rew.eps_max", real_str(c.rew.eps_max)},
        {"optimizer.lr", real_str(c.optimizer.lr)},
        {"optimizer.beta1", real_str(c.optimizer.beta1)},
        {"optimizer.beta2", real_str(c.optimizer.beta2)},
        {"optimizer.eps", real_str(c.optimizer.eps)},
        {"optimizer.weight_decay", real_str(c.optimizer.weight_decay)},
        {"epochs", n(c.epochs)},
        {"patience", n(c.patience)},
        {"seed", std::to_string(c.seed)},
        {"repeats", n(c.repeats)},
        {"split_ratios", real_str(c.split_ratios[0]) + ":" + real_str(c.split_ratios[1]) + ":" +
                             real_str(c.split_ratios[2])},
        {"head_fraction", real_str(c.head_fraction)},
        {"head_count", c.head_count ? n(*c.head_count) : std::string("none")},
        {"ablation", to_string(c.ablation)},
        {"energy_trace", c.energy_trace},
        {"abstraction_dump", c.abstraction_dump},
        {"divergence_dump", c.divergence_dump},
    };
}

}  // namespace simba
