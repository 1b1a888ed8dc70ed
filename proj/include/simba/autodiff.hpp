#pragma once

// Tape-based reverse-mode differentiation over 2-D tensors.
//
// Every op appends a node to the tape holding its forward value and a closure
// that pushes the output adjoint back to its inputs. Nodes are recorded in
// evaluation order, so a reverse sweep is a valid topological order.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "simba/tensor.hpp"

namespace simba {

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool trainable = true;

    Parameter() = default;
    Parameter(std::string id, Tensor init, bool is_trainable = true);

    void zero_grad();
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    Tape& tape() const { return *tape_; }
    std::size_t id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Sparse row operator: out.row(i) = sum_k weight[k] * in.row(col[k]) for k in
// [offsets[i], offsets[i+1]). Used for edge-list aggregation and for the
// propagation operator on the graphs-to-graph abstraction.
struct SparseRows {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> offsets{0};
    std::vector<std::size_t> index;
    std::vector<double> weight;

    Tensor apply(const Tensor& in) const;
    Tensor apply_transposed(const Tensor& in) const;
};

// Contiguous row segments (one per graph) of a stacked node matrix.
struct Segments {
    std::vector<std::size_t> offsets{0};

    std::size_t count() const { return offsets.size() - 1; }
    std::size_t total() const { return offsets.back(); }
    std::size_t begin(std::size_t g) const { return offsets[g]; }
    std::size_t end(std::size_t g) const { return offsets[g + 1]; }
};

class Tape {
public:
    using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    Var parameter(Parameter& p);

    // Low-level recording hook used by the op implementations.
    Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    void accumulate(const Var& v, const Tensor& grad);
    Tensor& grad_slot(const Var& v);

    // Seeds d(loss)/d(loss) = 1 and sweeps back, adding into Parameter::grad.
    // loss must be 1x1.
    void backward(const Var& loss);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool has_grad = false;
        bool requires_grad = false;
        BackwardFn backward;
        Parameter* param = nullptr;
    };

    std::vector<Node> nodes_;
};

namespace ops {

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);                      // elementwise
Var add_row(const Var& a, const Var& row);                // broadcast 1xc over rows
Var mul_row(const Var& a, const Var& row);                // broadcast 1xc over rows
Var scale(const Var& a, double factor);
Var scale_by(const Var& a, const Var& scalar);            // scalar is 1x1
Var mul_const(const Var& a, const Tensor& mask);          // elementwise, mask not differentiated
Var tanh(const Var& a);
Var relu(const Var& a);
Var row_softmax(const Var& a);
Var row_logsumexp(const Var& a);                          // n x c -> n x 1
Var transpose(const Var& a);
Var concat_cols(std::span<const Var> parts);              // side by side
Var concat_rows(std::span<const Var> parts);              // stacked
Var reduce_sum(const Var& a);                             // -> 1x1
Var pick(const Var& a, std::span<const std::size_t> cols); // out(i,0) = a(i, cols[i])
Var gather_rows(const Var& a, std::span<const std::size_t> rows);
// op is referenced, not copied: it must outlive the backward sweep.
Var sparse_apply(const SparseRows& op, const Var& a);
Var segment_softmax(const Var& scores, const Segments& seg);  // n x 1
Var segment_weighted_sum(const Var& weights, const Var& h, const Segments& seg);  // -> G x c
Var column_standardize(const Var& a, double eps);          // per-column (x - mean) / sqrt(var + eps)

}  // namespace ops

}  // namespace simba
