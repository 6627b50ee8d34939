#pragma once

#include "gigamae/tensor.hpp"

#include <functional>

namespace gigamae {

struct GradCheckReport {
    double max_rel_err = 0.0;
    int worst_param = -1;
    int worst_entry = -1;
    bool ok(double tol) const { return max_rel_err <= tol; }
};

// Central finite differences against analytic gradients, double precision.
// eval(params, grads_out) returns the scalar; when grads_out is non-null it
// must be filled with one gradient matrix per parameter.
using ScalarFn = std::function<double(const std::vector<MatD>&, std::vector<MatD>*)>;

inline GradCheckReport grad_check(const ScalarFn& eval, std::vector<MatD> params,
                                  double h = 1e-5) {
    std::vector<MatD> grads;
    double f0 = eval(params, &grads);
    if (!std::isfinite(f0)) throw std::runtime_error("grad_check: non-finite value at base point");
    if (grads.size() != params.size())
        throw std::runtime_error("grad_check: gradient count mismatch");
    GradCheckReport rep;
    for (size_t p = 0; p < params.size(); ++p) {
        for (size_t k = 0; k < params[p].size(); ++k) {
            double saved = params[p].d[k];
            params[p].d[k] = saved + h;
            double fp = eval(params, nullptr);
            params[p].d[k] = saved - h;
            double fm = eval(params, nullptr);
            params[p].d[k] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw std::runtime_error("grad_check: non-finite value while probing");
            double fd = (fp - fm) / (2.0 * h);
            double an = grads[p].d[k];
            double rel = std::abs(an - fd) / std::max({1e-6, std::abs(an), std::abs(fd)});
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_param = int(p);
                rep.worst_entry = int(k);
            }
        }
    }
    return rep;
}

}  // namespace gigamae
