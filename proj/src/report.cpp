#include "simba/report.hpp"

#include <cmath>
#include <fstream>

#include "simba/config.hpp"
#include "simba/errors.hpp"

namespace simba {

namespace {

nlohmann::json real_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

nlohmann::json summarize(std::span<const MetricsReport> runs, double MetricsReport::*field) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : runs) {
        if (!std::isfinite(r.*field)) continue;
        sum += r.*field;
        ++n;
    }
    if (n == 0) return {{"mean", nullptr}, {"std", nullptr}, {"count", 0}};
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (const auto& r : runs)
        if (std::isfinite(r.*field)) var += (r.*field - mean) * (r.*field - mean);
    return {{"mean", mean}, {"std", std::sqrt(var / static_cast<double>(n))}, {"count", n}};
}

}  // namespace

nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json config = nlohmann::json::object();
    for (const auto& [k, v] : config_entries(r.config)) config[k] = v;
    nlohmann::json loss = nlohmann::json::array();
    for (double x : r.loss_curve) loss.push_back(real_or_null(x));
    return {
        {"accuracy", real_or_null(r.accuracy)},
        {"macro_f1", real_or_null(r.macro_f1)},
        {"head_accuracy", real_or_null(r.head_accuracy)},
        {"tail_accuracy", real_or_null(r.tail_accuracy)},
        {"sir", real_or_null(r.sir)},
        {"loss_curve", loss},
        {"val_accuracy_curve", r.val_accuracy_curve},
        {"best_epoch", r.best_epoch},
        {"epochs_run", r.epochs_run},
        {"train_size", r.train_size},
        {"eval_size", r.eval_size},
        {"seed", r.seed},
        {"wall_clock_seconds", r.wall_clock_seconds},
        {"config", config},
    };
}

nlohmann::json make_report(std::span<const MetricsReport> runs) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["runs"] = nlohmann::json::array();
    for (const auto& r : runs) doc["runs"].push_back(to_json(r));
    doc["summary"] = {
        {"accuracy", summarize(runs, &MetricsReport::accuracy)},
        {"macro_f1", summarize(runs, &MetricsReport::macro_f1)},
        {"head_accuracy", summarize(runs, &MetricsReport::head_accuracy)},
        {"tail_accuracy", summarize(runs, &MetricsReport::tail_accuracy)},
    };
    return doc;
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

}  // namespace simba
