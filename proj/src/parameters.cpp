#include "simba/parameters.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "simba/errors.hpp"

namespace simba {

Parameter& ParameterStore::add(std::string name, Tensor init, bool trainable) {
    if (find(name) != nullptr) {
        throw ArgumentError("duplicate parameter '" + name + "'");
    }
    params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(init), trainable));
    return *params_.back();
}

Parameter* ParameterStore::find(const std::string& name) {
    for (auto& p : params_) {
        if (p->name == name) return p.get();
    }
    return nullptr;
}

Parameter& ParameterStore::get(const std::string& name) {
    if (Parameter* p = find(name)) return *p;
    throw ArgumentError("unknown parameter '" + name + "'");
}

const Parameter& ParameterStore::get(const std::string& name) const {
    return const_cast<ParameterStore*>(this)->get(name);
}

std::vector<Parameter*> ParameterStore::all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

std::vector<Parameter*> ParameterStore::trainable() {
    std::vector<Parameter*> out;
    for (auto& p : params_) {
        if (p->trainable) out.push_back(p.get());
    }
    return out;
}

void ParameterStore::zero_grad() {
    for (auto& p : params_) p->zero_grad();
}

std::vector<Tensor> ParameterStore::snapshot() const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p->value);
    return out;
}

void ParameterStore::restore(const std::vector<Tensor>& values) {
    if (values.size() != params_.size()) {
        throw ArgumentError("restore: snapshot has " + std::to_string(values.size()) + " tensors, store has " +
                            std::to_string(params_.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].rows() != params_[i]->value.rows() || values[i].cols() != params_[i]->value.cols()) {
            throw DimensionError("restore '" + params_[i]->name + "': " + shape_string(values[i]) + " vs " +
                                 shape_string(params_[i]->value));
        }
        params_[i]->value = values[i];
    }
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / double(fan_in + fan_out));
    Tensor w(fan_in, fan_out);
    for (double& v : w.data()) v = rng.uniform(-a, a);
    return w;
}

void save_checkpoint(const ParameterStore& store, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write checkpoint " + path.string());
    }
    auto& mutable_store = const_cast<ParameterStore&>(store);
    out << "simba-checkpoint 1\n" << store.size() << "\n";
    char buf[40];
    for (const Parameter* p : mutable_store.all()) {
        out << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << ' ' << (p->trainable ? 1 : 0) << '\n';
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", p->value[i]);
            out << (i ? " " : "") << buf;
        }
        out << '\n';
    }
}

void load_checkpoint(ParameterStore& store, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open checkpoint " + path.string());
    }
    std::string magic;
    int version = 0;
    std::size_t count = 0;
    if (!(in >> magic >> version >> count) || magic != "simba-checkpoint") {
        throw FormatError("checkpoint " + path.string() + ": bad header");
    }
    if (version != 1) {
        throw FormatError("checkpoint " + path.string() + ": unsupported version " + std::to_string(version));
    }
    for (std::size_t k = 0; k < count; ++k) {
        std::string name;
        std::size_t rows = 0, cols = 0;
        int trainable = 0;
        if (!(in >> name >> rows >> cols >> trainable)) {
            throw FormatError("checkpoint " + path.string() + ": truncated entry " + std::to_string(k));
        }
        Parameter* p = store.find(name);
        if (p == nullptr) {
            throw ConsistencyError("checkpoint parameter '" + name + "' not present in model");
        }
        if (p->value.rows() != rows || p->value.cols() != cols) {
            throw ConsistencyError("checkpoint parameter '" + name + "' has shape [" + std::to_string(rows) + "x" +
                                   std::to_string(cols) + "], model expects " + shape_string(p->value));
        }
        for (std::size_t i = 0; i < rows * cols; ++i) {
            std::string tok;
            if (!(in >> tok)) {
                throw FormatError("checkpoint " + path.string() + ": truncated values for '" + name + "'");
            }
            try {
                p->value[i] = std::stod(tok);
            } catch (const std::exception&) {
                throw FormatError("checkpoint " + path.string() + ": bad value '" + tok + "'");
            }
        }
    }
}

}  // namespace simba
