#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "lek/core/tensor.hpp"

namespace lek::testsupport {

// Central finite-difference gradient oracle. `f` evaluates the scalar loss
// from the current contents of `x`; entries of `x` are perturbed in place.
inline lek::core::Tensor finite_diff_grad(const std::function<double()>& f,
                                          lek::core::Tensor& x, double h = 1e-5) {
    lek::core::Tensor g(x.shape());
    for (long i = 0; i < x.size(); ++i) {
        const double saved = x.at(i);
        x.at(i) = saved + h;
        const double fp = f();
        x.at(i) = saved - h;
        const double fm = f();
        x.at(i) = saved;
        g.at(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Max relative error between analytic and numeric gradients, with an
// absolute floor so near-zero entries compare on absolute terms.
inline double max_rel_err(const lek::core::Tensor& analytic, const lek::core::Tensor& numeric,
                          double floor_abs = 1e-6) {
    double worst = 0.0;
    for (long i = 0; i < analytic.size(); ++i) {
        const double a = analytic.at(i);
        const double n = numeric.at(i);
        const double denom = std::max({std::fabs(a), std::fabs(n), floor_abs});
        worst = std::max(worst, std::fabs(a - n) / denom);
    }
    return worst;
}

// Same check but only over a subset of flat indices (for larger tensors).
inline double max_rel_err_at(const std::function<double()>& f, lek::core::Tensor& x,
                             const lek::core::Tensor& analytic,
                             const std::vector<long>& indices, double h = 1e-5,
                             double floor_abs = 1e-6) {
    double worst = 0.0;
    for (long i : indices) {
        const double saved = x.at(i);
        x.at(i) = saved + h;
        const double fp = f();
        x.at(i) = saved - h;
        const double fm = f();
        x.at(i) = saved;
        const double n = (fp - fm) / (2.0 * h);
        const double a = analytic.at(i);
        const double denom = std::max({std::fabs(a), std::fabs(n), floor_abs});
        worst = std::max(worst, std::fabs(a - n) / denom);
    }
    return worst;
}

} // namespace lek::testsupport
