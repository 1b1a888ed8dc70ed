#include "simba/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "simba/errors.hpp"

namespace simba {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using Map = Eigen::Map<RowMajor>;

ConstMap view(const Tensor& t) { return ConstMap(t.data().data(), Eigen::Index(t.rows()), Eigen::Index(t.cols())); }
Map view(Tensor& t) { return Map(t.data().data(), Eigen::Index(t.rows()), Eigen::Index(t.cols())); }

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match shape [" +
                             std::to_string(rows) + "x" + std::to_string(cols) + "]");
    }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw DimensionError("ragged rows in Tensor::from_rows");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor(r, c, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        t(i, i) = 1.0;
    }
    return t;
}

Tensor Tensor::row_vector(std::span<const double> values) {
    return Tensor(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::column_vector(std::span<const double> values) {
    return Tensor(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const Tensor& t) {
    return "[" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + "]";
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: " + shape_string(a) + " * " + shape_string(b));
    }
    Tensor out(a.rows(), b.cols());
    if (out.empty() || a.cols() == 0) {
        return out;
    }
    view(out).noalias() = view(a) * view(b);
    return out;
}

Tensor matmul_transposed_b(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols()) {
        throw DimensionError("matmul: " + shape_string(a) + " * transpose" + shape_string(b));
    }
    Tensor out(a.rows(), b.rows());
    if (out.empty() || a.cols() == 0) {
        return out;
    }
    view(out).noalias() = view(a) * view(b).transpose();
    return out;
}

Tensor matmul_transposed_a(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) {
        throw DimensionError("matmul: transpose" + shape_string(a) + " * " + shape_string(b));
    }
    Tensor out(a.cols(), b.cols());
    if (out.empty() || a.rows() == 0) {
        return out;
    }
    view(out).noalias() = view(a).transpose() * view(b);
    return out;
}

Tensor transpose(const Tensor& a) {
    Tensor out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            out(c, r) = a(r, c);
        }
    }
    return out;
}

void add_in_place(Tensor& dst, const Tensor& src) {
    if (dst.rows() != src.rows() || dst.cols() != src.cols()) {
        throw DimensionError("add: " + shape_string(dst) + " + " + shape_string(src));
    }
    auto d = dst.data();
    auto s = src.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] += s[i];
    }
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("max_abs_diff: " + shape_string(a) + " vs " + shape_string(b));
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

double logsumexp(std::span<const double> values) {
    if (values.empty()) {
        throw ArgumentError("logsumexp: empty input");
    }
    const double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) {
        return m;
    }
    double s = 0.0;
    for (double v : values) {
        s += std::exp(v - m);
    }
    return m + std::log(s);
}

}  // namespace simba
