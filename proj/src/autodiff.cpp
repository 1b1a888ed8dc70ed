#include "simba/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "simba/errors.hpp"

namespace simba {

Parameter::Parameter(std::string id, Tensor init, bool is_trainable)
    : name(std::move(id)), value(std::move(init)), grad(value.rows(), value.cols()), trainable(is_trainable) {}

void Parameter::zero_grad() {
    if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
        grad = Tensor(value.rows(), value.cols());
    } else {
        grad.fill(0.0);
    }
}

const Tensor& Var::value() const { return tape_->value(id_); }

Tensor SparseRows::apply(const Tensor& in) const {
    if (in.rows() != cols) {
        throw DimensionError("sparse apply: operator [" + std::to_string(rows) + "x" + std::to_string(cols) +
                             "] * " + shape_string(in));
    }
    Tensor out(rows, in.cols());
    for (std::size_t r = 0; r < rows; ++r) {
        auto dst = out.row(r);
        for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
            const double w = weight[k];
            auto src = in.row(index[k]);
            for (std::size_t c = 0; c < dst.size(); ++c) {
                dst[c] += w * src[c];
            }
        }
    }
    return out;
}

Tensor SparseRows::apply_transposed(const Tensor& in) const {
    if (in.rows() != rows) {
        throw DimensionError("sparse apply (transposed): operator [" + std::to_string(rows) + "x" +
                             std::to_string(cols) + "]^T * " + shape_string(in));
    }
    Tensor out(cols, in.cols());
    for (std::size_t r = 0; r < rows; ++r) {
        auto src = in.row(r);
        for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
            const double w = weight[k];
            auto dst = out.row(index[k]);
            for (std::size_t c = 0; c < dst.size(); ++c) {
                dst[c] += w * src[c];
            }
        }
    }
    return out;
}

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, false, false, {}, nullptr});
    return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
    nodes_.push_back(Node{p.value, {}, false, p.trainable, {}, &p});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
    bool needs = false;
    for (const auto& in : inputs) {
        if (in.tape_ != this) {
            throw ArgumentError("op mixes variables from different tapes");
        }
        needs = needs || nodes_[in.id_].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), {}, false, needs, needs ? std::move(backward) : BackwardFn{}, nullptr});
    return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(const Var& v, const Tensor& grad) {
    Node& n = nodes_[v.id_];
    if (!n.requires_grad) {
        return;
    }
    if (!n.has_grad) {
        if (grad.rows() != n.value.rows() || grad.cols() != n.value.cols()) {
            throw DimensionError("adjoint " + shape_string(grad) + " does not match value " + shape_string(n.value));
        }
        n.grad = grad;
        n.has_grad = true;
    } else {
        add_in_place(n.grad, grad);
    }
}

Tensor& Tape::grad_slot(const Var& v) {
    Node& n = nodes_[v.id_];
    if (!n.has_grad) {
        n.grad = Tensor(n.value.rows(), n.value.cols());
        n.has_grad = true;
    }
    return n.grad;
}

void Tape::backward(const Var& loss) {
    if (loss.tape_ != this) {
        throw ArgumentError("backward: loss belongs to another tape");
    }
    const Tensor& lv = nodes_[loss.id_].value;
    if (lv.rows() != 1 || lv.cols() != 1) {
        throw ArgumentError("backward: loss must be scalar, got " + shape_string(lv));
    }
    if (!nodes_[loss.id_].requires_grad) {
        return;
    }
    nodes_[loss.id_].grad = Tensor(1, 1, 1.0);
    nodes_[loss.id_].has_grad = true;
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.has_grad) {
            continue;
        }
        if (n.backward) {
            n.backward(*this, n.grad);
        }
    }
    // A parameter may be bound to several nodes; all contributions add up, and
    // they add onto whatever the caller left in Parameter::grad.
    for (auto& n : nodes_) {
        if (n.param != nullptr && n.has_grad) {
            if (n.param->grad.rows() != n.param->value.rows() || n.param->grad.cols() != n.param->value.cols()) {
                n.param->zero_grad();
            }
            add_in_place(n.param->grad, n.grad);
        }
    }
}

namespace ops {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": " + shape_string(a) + " vs " + shape_string(b));
    }
}

Tensor column_sums(const Tensor& g) {
    Tensor out(1, g.cols());
    for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) {
            out[c] += g(r, c);
        }
    }
    return out;
}

template <typename F>
Tensor map(const Tensor& a, F f) {
    Tensor out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = f(a[i]);
    }
    return out;
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
    Tensor out = simba::matmul(a.value(), b.value());
    Var in[] = {a, b};
    return a.tape().record(std::move(out), in, [a, b](Tape& t, const Tensor& g) {
        if (t.requires_grad(a.id())) {
            t.accumulate(a, matmul_transposed_b(g, b.value()));
        }
        if (t.requires_grad(b.id())) {
            t.accumulate(b, matmul_transposed_a(a.value(), g));
        }
    });
}

Var add(const Var& a, const Var& b) {
    require_same_shape("add", a.value(), b.value());
    Tensor out = a.value();
    add_in_place(out, b.value());
    Var in[] = {a, b};
    return a.tape().record(std::move(out), in, [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Var sub(const Var& a, const Var& b) {
    require_same_shape("sub", a.value(), b.value());
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= b.value()[i];
    }
    Var in[] = {a, b};
    return a.tape().record(std::move(out), in, [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        if (t.requires_grad(b.id())) {
            t.accumulate(b, map(g, [](double x) { return -x; }));
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape("mul", a.value(), b.value());
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] *= b.value()[i];
    }
    Var in[] = {a, b};
    return a.tape().record(std::move(out), in, [a, b](Tape& t, const Tensor& g) {
        if (t.requires_grad(a.id())) {
            Tensor ga = g;
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= b.value()[i];
            t.accumulate(a, ga);
        }
        if (t.requires_grad(b.id())) {
            Tensor gb = g;
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= a.value()[i];
            t.accumulate(b, gb);
        }
    });
}

Var add_row(const Var& a, const Var& row) {
    const Tensor& av = a.value();
    const Tensor& rv = row.value();
    if (rv.rows() != 1 || rv.cols() != av.cols()) {
        throw DimensionError("add_row: " + shape_string(av) + " + broadcast " + shape_string(rv));
    }
    Tensor out = av;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto dst = out.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += rv[c];
    }
    Var in[] = {a, row};
    return a.tape().record(std::move(out), in, [a, row](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        if (t.requires_grad(row.id())) {
            t.accumulate(row, column_sums(g));
        }
    });
}

Var mul_row(const Var& a, const Var& row) {
    const Tensor& av = a.value();
    const Tensor& rv = row.value();
    if (rv.rows() != 1 || rv.cols() != av.cols()) {
        throw DimensionError("mul_row: " + shape_string(av) + " * broadcast " + shape_string(rv));
    }
    Tensor out = av;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto dst = out.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] *= rv[c];
    }
    Var in[] = {a, row};
    return a.tape().record(std::move(out), in, [a, row](Tape& t, const Tensor& g) {
        const Tensor& av = a.value();
        const Tensor& rv = row.value();
        if (t.requires_grad(a.id())) {
            Tensor ga = g;
            for (std::size_t r = 0; r < ga.rows(); ++r) {
                auto dst = ga.row(r);
                for (std::size_t c = 0; c < dst.size(); ++c) dst[c] *= rv[c];
            }
            t.accumulate(a, ga);
        }
        if (t.requires_grad(row.id())) {
            Tensor gr(1, rv.cols());
            for (std::size_t r = 0; r < g.rows(); ++r) {
                for (std::size_t c = 0; c < g.cols(); ++c) gr[c] += g(r, c) * av(r, c);
            }
            t.accumulate(row, gr);
        }
    });
}

Var scale(const Var& a, double factor) {
    Var in[] = {a};
    return a.tape().record(map(a.value(), [factor](double x) { return x * factor; }), in,
                           [a, factor](Tape& t, const Tensor& g) {
                               t.accumulate(a, map(g, [factor](double x) { return x * factor; }));
                           });
}

Var scale_by(const Var& a, const Var& scalar) {
    if (scalar.value().rows() != 1 || scalar.value().cols() != 1) {
        throw DimensionError("scale_by: scalar must be [1x1], got " + shape_string(scalar.value()));
    }
    const double s = scalar.value()[0];
    Var in[] = {a, scalar};
    return a.tape().record(map(a.value(), [s](double x) { return x * s; }), in,
                           [a, scalar](Tape& t, const Tensor& g) {
                               const double s = scalar.value()[0];
                               if (t.requires_grad(a.id())) {
                                   t.accumulate(a, map(g, [s](double x) { return x * s; }));
                               }
                               if (t.requires_grad(scalar.id())) {
                                   double acc = 0.0;
                                   for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * a.value()[i];
                                   t.accumulate(scalar, Tensor(1, 1, acc));
                               }
                           });
}

Var mul_const(const Var& a, const Tensor& mask) {
    require_same_shape("mul_const", a.value(), mask);
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
    Var in[] = {a};
    return a.tape().record(std::move(out), in, [a, mask](Tape& t, const Tensor& g) {
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= mask[i];
        t.accumulate(a, ga);
    });
}

Var tanh(const Var& a) {
    Tensor y = map(a.value(), [](double x) { return std::tanh(x); });
    Var in[] = {a};
    return a.tape().record(y, in, [a, y](Tape& t, const Tensor& g) {
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= 1.0 - y[i] * y[i];
        t.accumulate(a, ga);
    });
}

Var relu(const Var& a) {
    Var in[] = {a};
    return a.tape().record(map(a.value(), [](double x) { return x > 0.0 ? x : 0.0; }), in,
                           [a](Tape& t, const Tensor& g) {
                               Tensor ga = g;
                               const Tensor& x = a.value();
                               for (std::size_t i = 0; i < ga.size(); ++i) {
                                   if (!(x[i] > 0.0)) ga[i] = 0.0;
                               }
                               t.accumulate(a, ga);
                           });
}

namespace {

Tensor softmax_rows(const Tensor& x) {
    Tensor y(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto src = x.row(r);
        auto dst = y.row(r);
        if (src.empty()) continue;
        const double m = *std::max_element(src.begin(), src.end());
        double s = 0.0;
        for (std::size_t c = 0; c < src.size(); ++c) {
            dst[c] = std::exp(src[c] - m);
            s += dst[c];
        }
        for (double& v : dst) v /= s;
    }
    return y;
}

}  // namespace

Var row_softmax(const Var& a) {
    Tensor y = softmax_rows(a.value());
    Var in[] = {a};
    return a.tape().record(y, in, [a, y](Tape& t, const Tensor& g) {
        Tensor ga(g.rows(), g.cols());
        for (std::size_t r = 0; r < g.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < g.cols(); ++c) dot += g(r, c) * y(r, c);
            for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) = y(r, c) * (g(r, c) - dot);
        }
        t.accumulate(a, ga);
    });
}

Var row_logsumexp(const Var& a) {
    const Tensor& x = a.value();
    if (x.cols() == 0) {
        throw ArgumentError("row_logsumexp: rows are empty");
    }
    Tensor out(x.rows(), 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        out[r] = logsumexp(x.row(r));
    }
    Var in[] = {a};
    return a.tape().record(std::move(out), in, [a](Tape& t, const Tensor& g) {
        Tensor p = softmax_rows(a.value());
        for (std::size_t r = 0; r < p.rows(); ++r) {
            for (std::size_t c = 0; c < p.cols(); ++c) p(r, c) *= g[r];
        }
        t.accumulate(a, p);
    });
}

Var transpose(const Var& a) {
    Var in[] = {a};
    return a.tape().record(simba::transpose(a.value()), in,
                           [a](Tape& t, const Tensor& g) { t.accumulate(a, simba::transpose(g)); });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) {
        throw ArgumentError("concat_cols: no inputs");
    }
    const std::size_t rows = parts[0].rows();
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) {
            throw DimensionError("concat_cols: " + shape_string(parts[0].value()) + " vs " +
                                 shape_string(p.value()));
        }
        cols += p.cols();
    }
    Tensor out(rows, cols);
    std::size_t off = 0;
    for (const auto& p : parts) {
        for (std::size_t r = 0; r < rows; ++r) {
            auto src = p.value().row(r);
            std::copy(src.begin(), src.end(), out.row(r).begin() + std::ptrdiff_t(off));
        }
        off += p.cols();
    }
    std::vector<Var> kept(parts.begin(), parts.end());
    return parts[0].tape().record(std::move(out), parts, [kept](Tape& t, const Tensor& g) {
        std::size_t off = 0;
        for (const auto& p : kept) {
            if (t.requires_grad(p.id())) {
                Tensor gp(p.rows(), p.cols());
                for (std::size_t r = 0; r < gp.rows(); ++r) {
                    auto src = g.row(r).subspan(off, p.cols());
                    std::copy(src.begin(), src.end(), gp.row(r).begin());
                }
                t.accumulate(p, gp);
            }
            off += p.cols();
        }
    });
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) {
        throw ArgumentError("concat_rows: no inputs");
    }
    const std::size_t cols = parts[0].cols();
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.cols() != cols) {
            throw DimensionError("concat_rows: " + shape_string(parts[0].value()) + " vs " +
                                 shape_string(p.value()));
        }
        rows += p.rows();
    }
    std::vector<double> data;
    data.reserve(rows * cols);
    for (const auto& p : parts) {
        data.insert(data.end(), p.value().data().begin(), p.value().data().end());
    }
    std::vector<Var> kept(parts.begin(), parts.end());
    return parts[0].tape().record(Tensor(rows, cols, std::move(data)), parts, [kept](Tape& t, const Tensor& g) {
        std::size_t off = 0;
        for (const auto& p : kept) {
            const std::size_t n = p.value().size();
            if (t.requires_grad(p.id())) {
                auto src = g.data().subspan(off, n);
                t.accumulate(p, Tensor(p.rows(), p.cols(), std::vector<double>(src.begin(), src.end())));
            }
            off += n;
        }
    });
}

Var reduce_sum(const Var& a) {
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    Var in[] = {a};
    return a.tape().record(Tensor(1, 1, s), in, [a](Tape& t, const Tensor& g) {
        t.accumulate(a, Tensor(a.rows(), a.cols(), g[0]));
    });
}

Var pick(const Var& a, std::span<const std::size_t> cols) {
    const Tensor& x = a.value();
    if (cols.size() != x.rows()) {
        throw DimensionError("pick: " + std::to_string(cols.size()) + " indices for " + shape_string(x));
    }
    Tensor out(x.rows(), 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        if (cols[r] >= x.cols()) {
            throw ArgumentError("pick: column " + std::to_string(cols[r]) + " out of range for " + shape_string(x));
        }
        out[r] = x(r, cols[r]);
    }
    std::vector<std::size_t> idx(cols.begin(), cols.end());
    Var in[] = {a};
    return a.tape().record(std::move(out), in, [a, idx](Tape& t, const Tensor& g) {
        Tensor ga(a.rows(), a.cols());
        for (std::size_t r = 0; r < idx.size(); ++r) ga(r, idx[r]) = g[r];
        t.accumulate(a, ga);
    });
}

Var gather_rows(const Var& a, std::span<const std::size_t> rows) {
    const Tensor& x = a.value();
    Tensor out(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= x.rows()) {
            throw ArgumentError("gather_rows: row " + std::to_string(rows[i]) + " out of range for " +
                                shape_string(x));
        }
        auto src = x.row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    Var in[] = {a};
    return a.tape().record(std::move(out), in, [a, idx](Tape& t, const Tensor& g) {
        Tensor ga(a.rows(), a.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto dst = ga.row(idx[i]);
            auto src = g.row(i);
            for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
        }
        t.accumulate(a, ga);
    });
}

Var sparse_apply(const SparseRows& op, const Var& a) {
    Tensor out = op.apply(a.value());
    Var in[] = {a};
    const SparseRows* opp = &op;
    return a.tape().record(std::move(out), in,
                           [a, opp](Tape& t, const Tensor& g) { t.accumulate(a, opp->apply_transposed(g)); });
}

Var segment_softmax(const Var& scores, const Segments& seg) {
    const Tensor& s = scores.value();
    if (s.cols() != 1 || s.rows() != seg.total()) {
        throw DimensionError("segment_softmax: scores " + shape_string(s) + " for " + std::to_string(seg.total()) +
                             " rows");
    }
    Tensor y(s.rows(), 1);
    for (std::size_t g = 0; g < seg.count(); ++g) {
        const std::size_t b = seg.begin(g), e = seg.end(g);
        if (b == e) {
            throw ArgumentError("segment_softmax: segment " + std::to_string(g) + " is empty");
        }
        double m = s[b];
        for (std::size_t i = b; i < e; ++i) m = std::max(m, s[i]);
        double z = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            y[i] = std::exp(s[i] - m);
            z += y[i];
        }
        for (std::size_t i = b; i < e; ++i) y[i] /= z;
    }
    Var in[] = {scores};
    Segments sg = seg;
    return scores.tape().record(y, in, [scores, y, sg](Tape& t, const Tensor& g) {
        Tensor ga(y.rows(), 1);
        for (std::size_t k = 0; k < sg.count(); ++k) {
            double dot = 0.0;
            for (std::size_t i = sg.begin(k); i < sg.end(k); ++i) dot += g[i] * y[i];
            for (std::size_t i = sg.begin(k); i < sg.end(k); ++i) ga[i] = y[i] * (g[i] - dot);
        }
        t.accumulate(scores, ga);
    });
}

Var segment_weighted_sum(const Var& weights, const Var& h, const Segments& seg) {
    const Tensor& w = weights.value();
    const Tensor& x = h.value();
    if (w.cols() != 1 || w.rows() != x.rows() || x.rows() != seg.total()) {
        throw DimensionError("segment_weighted_sum: weights " + shape_string(w) + ", values " + shape_string(x));
    }
    Tensor out(seg.count(), x.cols());
    for (std::size_t k = 0; k < seg.count(); ++k) {
        auto dst = out.row(k);
        for (std::size_t i = seg.begin(k); i < seg.end(k); ++i) {
            auto src = x.row(i);
            for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w[i] * src[c];
        }
    }
    Var in[] = {weights, h};
    Segments sg = seg;
    return h.tape().record(std::move(out), in, [weights, h, sg](Tape& t, const Tensor& g) {
        const Tensor& w = weights.value();
        const Tensor& x = h.value();
        const bool gw = t.requires_grad(weights.id());
        const bool gh = t.requires_grad(h.id());
        Tensor dw(w.rows(), 1);
        Tensor dh(gh ? x.rows() : 0, gh ? x.cols() : 0);
        for (std::size_t k = 0; k < sg.count(); ++k) {
            auto gk = g.row(k);
            for (std::size_t i = sg.begin(k); i < sg.end(k); ++i) {
                auto xi = x.row(i);
                if (gw) {
                    double dot = 0.0;
                    for (std::size_t c = 0; c < gk.size(); ++c) dot += gk[c] * xi[c];
                    dw[i] = dot;
                }
                if (gh) {
                    auto dst = dh.row(i);
                    for (std::size_t c = 0; c < gk.size(); ++c) dst[c] = w[i] * gk[c];
                }
            }
        }
        if (gw) t.accumulate(weights, dw);
        if (gh) t.accumulate(h, dh);
    });
}

Var column_standardize(const Var& a, double eps) {
    const Tensor& x = a.value();
    const std::size_t n = x.rows();
    if (n == 0) {
        throw ArgumentError("column_standardize: no rows");
    }
    Tensor xhat(n, x.cols());
    std::vector<double> inv_std(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += x(r, c);
        mean /= double(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) var += (x(r, c) - mean) * (x(r, c) - mean);
        var /= double(n);
        inv_std[c] = 1.0 / std::sqrt(var + eps);
        for (std::size_t r = 0; r < n; ++r) xhat(r, c) = (x(r, c) - mean) * inv_std[c];
    }
    Var in[] = {a};
    return a.tape().record(xhat, in, [a, xhat, inv_std](Tape& t, const Tensor& g) {
        const std::size_t n = g.rows();
        Tensor ga(n, g.cols());
        for (std::size_t c = 0; c < g.cols(); ++c) {
            double sg = 0.0, sgx = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                sg += g(r, c);
                sgx += g(r, c) * xhat(r, c);
            }
            for (std::size_t r = 0; r < n; ++r) {
                ga(r, c) = inv_std[c] / double(n) * (double(n) * g(r, c) - sg - xhat(r, c) * sgx);
            }
        }
        t.accumulate(a, ga);
    });
}

}  // namespace ops

}  // namespace simba
