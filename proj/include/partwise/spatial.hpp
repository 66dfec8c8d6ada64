#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "partwise/core.hpp"
#include "partwise/io.hpp"

namespace partwise {

/// Scoring-time multiplier on the stored (maximum-likelihood) covariances.
inline constexpr double kCovarianceInflation = 4.0;

struct GmmComponent {
    Point2 mean;
    Eigen::Vector2d var;  // diagonal of the covariance
    double weight = 1.0;

    bool operator==(const GmmComponent&) const = default;
};

struct GmmOptions {
    double var_floor = 1e-4;
    double tol = 1e-6;
    int max_iterations = 500;
};

struct Mixture {
    std::vector<GmmComponent> components;
    double log_likelihood = 0.0;
    int iterations = 0;
    /// Log-likelihood after each EM iteration (first entry: after the first M-step).
    std::vector<double> log_likelihood_trace;
};

/// Diagonal-covariance EM from a k-means++ initialization. Deterministic given `seed`.
Mixture fit_gmm(std::span<const Point2> points, int n_modes, std::uint64_t seed, const GmmOptions& opts = {});

/// Free parameters of an n-mode 2-D diagonal mixture: 5n - 1.
constexpr int gmm_parameter_count(int n_modes) noexcept { return 5 * n_modes - 1; }

double bic(const Mixture& mixture, std::size_t n_points);

/// Fits 1..min(max_modes, N) modes and keeps the fit with the lowest BIC.
Mixture select_modes_bic(std::span<const Point2> points, int max_modes, std::uint64_t seed, const GmmOptions& opts = {});

/// Log-likelihood of `points` under a mixture (used by EM and exposed for tests).
double mixture_log_likelihood(std::span<const GmmComponent> components, std::span<const Point2> points);

struct SpatialMap {
    int feature_index = 0;
    std::vector<GmmComponent> components;

    bool operator==(const SpatialMap&) const = default;
};

struct SpatialModel {
    std::string catalog_hash;
    std::vector<SpatialMap> maps;  // sorted by feature_index

    const SpatialMap* find(int k) const noexcept;
    bool operator==(const SpatialModel&) const = default;
};

struct SpatialFitOptions {
    int max_modes = 5;
    int min_fit_points = 3;
    GmmOptions gmm;
};

struct SpatialBuild {
    SpatialModel model;
    /// Features skipped for having fewer than min_fit_points points: (k, count).
    std::vector<std::pair<int, std::size_t>> omitted;
};

/// Fits one mixture per catalog feature from the anchors of matching parts in
/// scenes labeled with the feature's category. Per-feature seed is seed ^ k.
SpatialBuild build_spatial_model(const Dataset& dataset, const SpatialFitOptions& opts, std::uint64_t seed);

/// Unnormalized kernel exp(-1/2 d^T (inflation * diag(var))^-1 d).
template <typename Scalar>
Scalar gaussian_kernel(const Eigen::Matrix<Scalar, 2, 1>& x, const Eigen::Matrix<Scalar, 2, 1>& mean,
                       const Eigen::Matrix<Scalar, 2, 1>& var, Scalar inflation = Scalar(kCovarianceInflation)) {
    const Eigen::Matrix<Scalar, 2, 1> d = x - mean;
    const Scalar q = d.x() * d.x() / (inflation * var.x()) + d.y() * d.y() / (inflation * var.y());
    return std::exp(Scalar(-0.5) * q);
}

/// max over modes of the inflated kernel. Throws LookupError when k has no map.
double location_score(const SpatialModel& model, int k, const Point2& x);
double location_score(const SpatialMap& map, const Point2& x);

/// P_k = clamp(sum_i s_i L_i^k / n_exp_k, 0, 1) over detections of part(k).
/// Features without a map score 0. Requires a rectified scene and a matching catalog.
Eigen::VectorXd part_scores(const SpatialModel& model, const FeatureCatalog& catalog, const Scene& scene);

Json spatial_model_to_json(const SpatialModel& model);
SpatialModel spatial_model_from_json(const Json& j);

}  // namespace partwise
