#include "levmar.hpp"

#include <cmath>
#include <limits>

namespace coems::detail {
namespace {

void jacobian(const ResidualFn& fn, const Eigen::VectorXd& p, const Eigen::VectorXd& r0, double step,
              Eigen::MatrixXd& jac) {
    Eigen::VectorXd shifted = p;
    Eigen::VectorXd r(r0.size());
    for (Eigen::Index c = 0; c < p.size(); ++c) {
        shifted[c] = p[c] + step;
        fn(shifted, r);
        jac.col(c) = (r - r0) / step;
        shifted[c] = p[c];
    }
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd start, Eigen::Index n_residuals,
                             const LmOptions& options) {
    const Eigen::Index np = start.size();
    LmResult out;
    out.params = std::move(start);
    out.residuals.resize(n_residuals);
    fn(out.params, out.residuals);
    out.cost = out.residuals.squaredNorm();

    Eigen::MatrixXd jac(n_residuals, np);
    Eigen::VectorXd trial_r(n_residuals);
    double lambda = options.initial_lambda;

    auto refresh = [&] {
        jacobian(fn, out.params, out.residuals, options.jacobian_step, jac);
        out.jtj = jac.transpose() * jac;
    };
    refresh();

    if (out.cost == 0.0) {
        out.converged = true;
        return out;
    }

    while (out.iterations < options.max_iterations) {
        ++out.iterations;
        const Eigen::VectorXd grad = jac.transpose() * out.residuals;
        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = out.jtj;
            for (Eigen::Index i = 0; i < np; ++i) damped(i, i) += lambda * std::max(out.jtj(i, i), 1e-300);
            const Eigen::VectorXd delta = damped.ldlt().solve(-grad);
            if (!delta.allFinite()) {
                lambda *= 10.0;
            } else {
                const Eigen::VectorXd trial = out.params + delta;
                fn(trial, trial_r);
                const double trial_cost = trial_r.allFinite() ? trial_r.squaredNorm()
                                                              : std::numeric_limits<double>::infinity();
                if (trial_cost <= out.cost) {
                    const bool small = delta.cwiseAbs().maxCoeff() < options.tolerance;
                    out.params = trial;
                    out.residuals = trial_r;
                    out.cost = trial_cost;
                    lambda = std::max(lambda / 10.0, 1e-12);
                    accepted = true;
                    refresh();
                    if (small || out.cost == 0.0) {
                        out.converged = true;
                        return out;
                    }
                } else {
                    lambda *= 10.0;
                }
            }
            if (lambda > 1e16) {
                // No descent direction left at working precision: the point is
                // a minimum to within the Jacobian's accuracy.
                out.converged = true;
                return out;
            }
        }
    }
    return out;
}

}  // namespace coems::detail
