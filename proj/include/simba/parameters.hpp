#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "simba/autodiff.hpp"
#include "simba/rng.hpp"

namespace simba {

// Owns every Parameter of a model. Addresses are stable for the lifetime of
// the store, so tapes and optimizers may hold raw pointers.
class ParameterStore {
public:
    ParameterStore() = default;
    ParameterStore(const ParameterStore&) = delete;
    ParameterStore& operator=(const ParameterStore&) = delete;
    ParameterStore(ParameterStore&&) = default;
    ParameterStore& operator=(ParameterStore&&) = default;

    Parameter& add(std::string name, Tensor init, bool trainable = true);
    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    Parameter* find(const std::string& name);

    std::vector<Parameter*> all();
    std::vector<Parameter*> trainable();
    std::size_t size() const { return params_.size(); }

    void zero_grad();

    // Snapshot/restore of values only (used for best-epoch checkpoints).
    std::vector<Tensor> snapshot() const;
    void restore(const std::vector<Tensor>& values);

private:
    std::vector<std::unique_ptr<Parameter>> params_;
};

// Uniform Glorot initialization: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Checkpoint text format, version 1:
//
//   simba-checkpoint 1
//   <count>
//   <name> <rows> <cols> <trainable 0|1>
//   <rows*cols values, %.17g, space separated, one line>
//   ...
//
// Values round-trip exactly. load_checkpoint requires every stored name to
// exist in the store with the same shape.
void save_checkpoint(const ParameterStore& store, const std::filesystem::path& path);
void load_checkpoint(ParameterStore& store, const std::filesystem::path& path);

}  // namespace simba
