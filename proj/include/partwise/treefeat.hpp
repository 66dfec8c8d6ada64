#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "partwise/core.hpp"
#include "partwise/io.hpp"
#include "partwise/svm.hpp"

namespace partwise {

enum class Facing {
    NegativeX,  // front at small x (canonical)
    PositiveX,
};

struct TreeFeatureConfig {
    /// Wheels within this height of the lowest wheel are on-road (meters).
    double on_road_tol = 0.45;
    double scale_ref = 1.0;
    double n_ref = 1.0;
    Facing facing = Facing::NegativeX;

    bool operator==(const TreeFeatureConfig&) const = default;
};

Json tree_feature_config_to_json(const TreeFeatureConfig& cfg);
TreeFeatureConfig tree_feature_config_from_json(const Json& j);

/// Mirrors x so that a scene captured with `facing` ends up in the canonical orientation.
Scene normalize_facing(const Scene& scene, Facing facing);

struct WheelSplit {
    std::vector<Detection> on_road;  // sorted by x
    std::vector<Detection> off_road;
};

WheelSplit split_wheels(const Scene& scene, double tol);

/// Distance between first and last on-road wheel; 0 for fewer than two.
double wheelbase(const WheelSplit& split);

/// Frontmost front-type part (smallest leading edge), if any.
const Detection* front_part(const Scene& scene);

/// From the first on-road wheel back to the leading edge of the front part; 0 if undefined.
double front_elevation(const Scene& scene, const WheelSplit& split);

/// [wheelbase / scale_ref, d23 / wheelbase, d34 / wheelbase]; nullopt unless n_on_road > 3.
std::optional<Eigen::Vector3d> artic_metrics(const WheelSplit& split, const TreeFeatureConfig& cfg = {});

/// [wheelbase / scale_ref, front height / scale_ref, n_on_road / n_ref]; nullopt unless n_on_road < 5.
std::optional<Eigen::Vector3d> tractor_metrics(const Scene& scene, const WheelSplit& split,
                                               const TreeFeatureConfig& cfg = {});

struct TreeFeatures {
    std::array<bool, kNumPartClasses> part_presence{};
    int n_on_road = 0;
    int n_off_road = 0;
    double wheelbase = 0.0;
    double front_elevation = 0.0;
    bool is_artic = false;
    bool is_tractor = false;

    bool has(PartClass p) const { return part_presence[static_cast<std::size_t>(code(p))]; }
    bool operator==(const TreeFeatures&) const = default;
};

/// Facing normalization per `cfg`, then every v1 feature.
TreeFeatures build_tree_features(const Scene& scene, const SvmModel& artic_svm, const SvmModel& tractor_svm,
                                 const TreeFeatureConfig& cfg = {});

/// Named access used by the tree predicate language.
enum class FeatureKind { Boolean, Numeric };
std::optional<FeatureKind> tree_feature_kind(std::string_view feat);
/// Booleans evaluate to 0/1. Throws LookupError for unknown names.
double tree_feature_value(const TreeFeatures& f, std::string_view feat);

}  // namespace partwise
