#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "partwise/io.hpp"

namespace partwise {

using SvmInput = Eigen::Vector3d;

struct SvmParams {
    double C = 1.0;
    double gamma = 1.0;
    bool oversample_minority = false;
    std::uint64_t seed = 0;
    /// Stopping tolerance on the maximal KKT violation.
    double tol = 1e-3;
    long max_iterations = 10'000'000;
};

/// Binary RBF-SVM. `alphas` are signed dual coefficients (alpha_i * y_i).
struct SvmModel {
    std::vector<SvmInput> support_vectors;
    std::vector<double> alphas;
    double bias = 0.0;
    double gamma = 1.0;
    double C = 1.0;

    bool operator==(const SvmModel&) const = default;
};

struct SvmTraining {
    SvmModel model;
    long iterations = 0;
    /// Per training point (after oversampling): violation of its KKT condition
    /// measured on y_i f(x_i), zero when satisfied.
    std::vector<double> kkt_residuals;
    double max_kkt_residual = 0.0;
};

struct SvmPrediction {
    int label;
    double decision;
};

inline double rbf_kernel(const SvmInput& a, const SvmInput& b, double gamma) {
    return std::exp(-gamma * (a - b).squaredNorm());
}

/// Soft-margin dual solved by SMO with second-order working-set selection.
/// Labels must be +1/-1 with both present.
SvmTraining train_svm(std::span<const SvmInput> points, std::span<const int> labels, const SvmParams& params);

/// sign(sum_i alpha_i K(x, sv_i) + bias); a zero decision value maps to +1.
SvmPrediction predict_svm(const SvmModel& model, const SvmInput& x);

Json svm_model_to_json(const SvmModel& model);
SvmModel svm_model_from_json(const Json& j);

}  // namespace partwise
