#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "partwise/core.hpp"
#include "partwise/io.hpp"

namespace partwise {

/// One nominal part. `anchor` follows the detection anchoring rule, so for
/// wheels it is the bottom-center of the box.
struct TemplatePart {
    PartClass part;
    Point2 anchor;
    Eigen::Vector2d extent;  // bbox width, height

    bool operator==(const TemplatePart&) const = default;
};

struct LayoutTemplate {
    VehicleCategory category;
    std::string variant;
    std::vector<TemplatePart> parts;
    /// Alternative ground-contact wheel layouts (x positions); one is drawn per scene.
    std::vector<std::vector<double>> wheel_options;
    double wheel_diameter = 0.7;

    bool operator==(const LayoutTemplate&) const = default;
};

/// Box for a part placed with its anchor at `anchor` (rectified frame, y up).
Box box_around_anchor(PartClass part, const Point2& anchor, const Eigen::Vector2d& extent);

class TemplateLibrary {
public:
    explicit TemplateLibrary(std::vector<LayoutTemplate> templates);

    const std::vector<LayoutTemplate>& templates() const noexcept { return templates_; }
    /// Variants for a category, in file order. Empty if none.
    std::vector<const LayoutTemplate*> variants(VehicleCategory c) const;
    bool covers(VehicleCategory c) const { return !variants(c).empty(); }

    /// Parts used by a template but absent from the catalog entry of its category.
    std::vector<std::string> incidence_errors(const FeatureCatalog& catalog) const;

private:
    std::vector<LayoutTemplate> templates_;
};

TemplateLibrary templates_from_json(const Json& j);
Json templates_to_json(const TemplateLibrary& lib);
TemplateLibrary load_templates(const std::filesystem::path& path);
TemplateLibrary default_templates();

struct NoiseConfig {
    double pos_sigma = 0.1;
    /// Confidence ~ Beta(mean * kappa, (1 - mean) * kappa); kappa = 0 pins it at the mean.
    double conf_mean = 0.85;
    double conf_kappa = 20.0;
    double dropout_rate = 0.02;
    /// Expected false positives per scene at detection threshold t: fp_a * (0.5 / t)^fp_b.
    double fp_a = 0.05;
    double fp_b = 0.5;
    double fp_conf_lo = 0.5;
    double fp_conf_hi = 0.7;
    /// Detection threshold the generator operates at.
    double threshold = 0.5;
    /// x_min, y_min, x_max, y_max of the region false positives are drawn from.
    std::array<double, 4> bounds{-1.0, 0.0, 20.0, 4.5};

    double fp_expected(double t) const;
    /// No jitter, no dropout, no false positives, confidence fixed at conf_mean.
    static NoiseConfig clean();

    bool operator==(const NoiseConfig&) const = default;
};

Json noise_config_to_json(const NoiseConfig& cfg);
NoiseConfig noise_config_from_json(const Json& j);

/// Throws LookupError when no template covers `category`.
Scene generate_scene(VehicleCategory category, const TemplateLibrary& lib, const NoiseConfig& noise,
                     std::uint64_t seed, std::string id = "scene");

using CategoryMix = std::map<VehicleCategory, int>;

CategoryMix category_mix_from_json(const Json& j);
Json category_mix_to_json(const CategoryMix& mix);

/// Sample counts per category in the reference dataset (4779 total).
const std::array<int, kNumCategories>& reference_category_counts() noexcept;
/// Reference proportions scaled to `total` by largest-remainder rounding.
CategoryMix default_mix(int total);

/// Scenes ordered by category code, then by index within the category. Scene i
/// uses derive_seed(seed, i).
Dataset generate_dataset(const CategoryMix& mix, const TemplateLibrary& lib, const NoiseConfig& noise,
                         std::uint64_t seed, const FeatureCatalog& catalog = default_catalog());

enum class ScorePolicy { Retained, Adapted };

/// Re-thresholds a scene generated at noise.threshold: adds the false positives
/// that a lower threshold would admit, drops detections below `threshold`, and
/// under Adapted raises every surviving confidence to at least 0.5.
Scene emulate_threshold(const Scene& scene, double threshold, ScorePolicy policy, const NoiseConfig& noise,
                        std::uint64_t seed);

}  // namespace partwise
