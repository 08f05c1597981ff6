#pragma once

// Levenberg-Marquardt on a residual vector with a forward-difference
// Jacobian. Internal to the fitting module.

#include <Eigen/Dense>
#include <functional>

namespace coems::detail {

struct LmOptions {
    int max_iterations = 200;
    double jacobian_step = 1e-6;   // absolute step in parameter space
    double tolerance = 1e-8;       // max |delta p| declaring convergence
    double initial_lambda = 1e-3;
};

struct LmResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd jtj;        // J^T J at the returned point
    Eigen::VectorXd residuals;
    double cost = 0.0;          // sum of squared residuals
    int iterations = 0;
    bool converged = false;
};

using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;

LmResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd start, Eigen::Index n_residuals,
                             const LmOptions& options);

}  // namespace coems::detail
