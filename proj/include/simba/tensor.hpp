#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace simba {

// Dense row-major matrix of doubles. Vectors are 1 x n (or n x 1) tensors;
// the pipeline never needs more than two dimensions.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor identity(std::size_t n);
    static Tensor row_vector(std::span<const double> values);
    static Tensor column_vector(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    std::vector<std::size_t> shape() const { return {rows_, cols_}; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    void fill(double value);
    bool all_finite() const noexcept;

    bool operator==(const Tensor&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

std::string shape_string(const Tensor& t);

// Plain (non-recording) kernels shared by the tape ops and inference paths.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_transposed_b(const Tensor& a, const Tensor& b);  // a * b^T
Tensor matmul_transposed_a(const Tensor& a, const Tensor& b);  // a^T * b
Tensor transpose(const Tensor& a);
void add_in_place(Tensor& dst, const Tensor& src);
double max_abs_diff(const Tensor& a, const Tensor& b);

// Numerically stable log(sum(exp(v))). Throws ArgumentError on empty input.
double logsumexp(std::span<const double> values);

}  // namespace simba
