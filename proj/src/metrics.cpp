#include "simba/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "simba/errors.hpp"
#include "simba/log.hpp"

namespace simba {

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels) {
    if (predictions.size() != labels.size()) throw DimensionError("accuracy: length mismatch");
    if (labels.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t hit = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hit += predictions[i] == labels[i];
    return double(hit) / double(labels.size());
}

double macro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> labels, std::size_t classes) {
    if (predictions.size() != labels.size()) throw DimensionError("macro F1: length mismatch");
    if (classes == 0) throw ArgumentError("macro F1: no classes");
    std::vector<double> tp(classes, 0), fp(classes, 0), fn(classes, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::size_t p = predictions[i], y = labels[i];
        if (p >= classes || y >= classes) throw ArgumentError("macro F1: class index out of range");
        if (p == y) {
            ++tp[y];
        } else {
            ++fp[p];
            ++fn[y];
        }
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        const double denom = 2 * tp[c] + fp[c] + fn[c];
        if (denom == 0.0) {
            warn("macro F1: class " + std::to_string(c) + " absent from predictions and labels");
            continue;
        }
        sum += 2 * tp[c] / denom;
    }
    return sum / double(classes);
}

namespace {

std::vector<double> column_means(const Tensor& t) {
    std::vector<double> m(t.cols(), 0.0);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c) m[c] += t(r, c);
    }
    for (double& v : m) v /= double(t.rows());
    return m;
}

std::vector<double> central_moment(const Tensor& t, const std::vector<double>& mean, std::size_t order) {
    std::vector<double> m(t.cols(), 0.0);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c) m[c] += std::pow(t(r, c) - mean[c], double(order));
    }
    for (double& v : m) v /= double(t.rows());
    return m;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

double cmd_metric(const Tensor& x, const Tensor& y, std::size_t moments) {
    if (x.rows() == 0 || y.rows() == 0) throw ArgumentError("CMD: both samples must be non-empty");
    if (x.cols() != y.cols()) throw DimensionError("CMD: " + shape_string(x) + " vs " + shape_string(y));
    if (moments < 1) throw ArgumentError("CMD: need at least one moment");
    double lo = x[0], hi = x[0];
    for (const Tensor* t : {&x, &y}) {
        for (double v : t->data()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double span = hi - lo;
    if (!(span > 0.0)) {
        warn("CMD: samples have an empty value range");
        return 0.0;
    }
    const auto mx = column_means(x);
    const auto my = column_means(y);
    double total = distance(mx, my) / span;
    for (std::size_t j = 2; j <= moments; ++j) {
        total += distance(central_moment(x, mx, j), central_moment(y, my, j)) / std::pow(span, double(j));
    }
    return total;
}

}  // namespace simba
