#include "simba/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "simba/errors.hpp"

namespace simba {

namespace {

double evaluate(const LossBuilder& build_loss) {
    Tape tape;
    const Var loss = build_loss(tape);
    if (loss.rows() != 1 || loss.cols() != 1) {
        throw ArgumentError("finite_diff_check: loss must be scalar, got " + shape_string(loss.value()));
    }
    return loss.value()[0];
}

}  // namespace

double finite_diff_check(std::span<Parameter* const> params, const LossBuilder& build_loss, double eps) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) {
        throw ArgumentError("finite_diff_check: eps must lie in [1e-7, 1e-3]");
    }
    if (params.empty()) {
        return 0.0;
    }
    for (Parameter* p : params) p->zero_grad();
    double base = 0.0;
    {
        Tape tape;
        const Var loss = build_loss(tape);
        base = loss.value()[0];
        tape.backward(loss);
    }
    const double again = evaluate(build_loss);
    if (again != base) {
        throw CheckError("finite_diff_check: loss is not deterministic (" + std::to_string(base) + " vs " +
                         std::to_string(again) + ")");
    }

    double worst = 0.0;
    for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value[i];
            p->value[i] = saved + eps;
            const double plus = evaluate(build_loss);
            p->value[i] = saved - eps;
            const double minus = evaluate(build_loss);
            p->value[i] = saved;
            const double numeric = (plus - minus) / (2.0 * eps);
            const double analytic = p->grad[i];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(analytic - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace simba
