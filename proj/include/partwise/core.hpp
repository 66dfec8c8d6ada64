#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace partwise {

using Point2 = Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Taxonomy. Integer codes are the declaration order and never change.
// ---------------------------------------------------------------------------

enum class PartClass : int {
    BodyBike = 0,
    FrontBus,
    FrontCar,
    FrontTruck,
    FrontVan,
    LoadCamperVan,
    LoadCar,
    LoadCuboid,
    LoadTank,
    LoadTrough,
    LoadVan,
    RoofCamperVan,
    RoofTruckCarTransporter,
    RoofVan,
    SupportTruckCarTransporter,
    Wheel,
};
inline constexpr int kNumPartClasses = 16;

enum class VehicleCategory : int {
    ArticTruck = 0,
    ArticTruckDumptor,
    ArticTruckLowLoaded,
    ArticTruckTanker,
    ArticVan,
    Bike,
    Bus,
    CamperVan,
    Car,
    TractorTruck,
    Trailer,
    Truck,
    TruckCarTransporterEmpty,
    TruckCarTransporterLoaded,
    TruckDumptor,
    TruckLowLoaded,
    TruckTanker,
    Van,
    VanPickup,
};
inline constexpr int kNumCategories = 19;

constexpr int code(PartClass p) noexcept { return static_cast<int>(p); }
constexpr int code(VehicleCategory c) noexcept { return static_cast<int>(c); }

/// Throws std::out_of_range for codes outside the enumeration.
PartClass part_from_code(int code);
VehicleCategory category_from_code(int code);

std::string_view name(PartClass p) noexcept;
std::string_view name(VehicleCategory c) noexcept;

/// Exact, case-sensitive lookup. "Truck Cabin" is accepted as an alias of Front Truck.
std::optional<PartClass> parse_part(std::string_view s) noexcept;
std::optional<VehicleCategory> parse_category(std::string_view s) noexcept;

/// Parts that mark the leading end of a vehicle (Front Car/Van/Truck/Bus, Body Bike).
bool is_front_type(PartClass p) noexcept;

const std::array<PartClass, kNumPartClasses>& all_parts() noexcept;
const std::array<VehicleCategory, kNumCategories>& all_categories() noexcept;

// ---------------------------------------------------------------------------
// Detections and scenes
// ---------------------------------------------------------------------------

struct Box {
    Point2 min;
    Point2 max;

    Point2 center() const { return 0.5 * (min + max); }
    double width() const { return max.x() - min.x(); }
    double height() const { return max.y() - min.y(); }
    bool operator==(const Box&) const = default;
};

/// Reference point of a box: the center, except for wheels where it is the
/// bottom-center (ground contact). `y_up` selects which image side is "bottom":
/// rectified frames have y pointing up, raw pixel frames have y pointing down.
Point2 anchor_point(const Box& box, PartClass part, bool y_up);

struct Detection {
    Point2 x;
    double s = 0.0;
    PartClass part = PartClass::Wheel;
    std::optional<Box> bbox;

    bool operator==(const Detection&) const = default;
};

struct Scene {
    std::string id;
    std::vector<Detection> detections;
    bool rectified = false;
    std::optional<VehicleCategory> label;
    /// Camera the scene was captured with; selects a calibration when several exist.
    std::optional<std::string> camera;

    bool operator==(const Scene&) const = default;
};

// ---------------------------------------------------------------------------
// Feature catalog
// ---------------------------------------------------------------------------

/// One (part class, vehicle category) pair with its expected number of detections.
struct Feature {
    PartClass part;
    VehicleCategory category;
    int n_exp;

    bool operator==(const Feature&) const = default;
};

class FeatureCatalog {
public:
    /// Validates: no duplicate pairs, n_exp >= 1, every category owns a feature.
    explicit FeatureCatalog(std::vector<Feature> features);

    std::size_t size() const noexcept { return features_.size(); }
    const std::vector<Feature>& features() const noexcept { return features_; }
    const Feature& operator[](std::size_t k) const { return features_.at(k); }

    std::optional<int> index_of(PartClass p, VehicleCategory c) const noexcept;
    /// Feature indices whose part is `p`, ascending.
    std::span<const int> features_of_part(PartClass p) const noexcept;
    /// Feature indices owned by category `c`, ascending.
    std::span<const int> features_of_category(VehicleCategory c) const noexcept;
    bool uses_part(PartClass p) const noexcept { return !features_of_part(p).empty(); }
    int max_n_exp() const noexcept { return max_n_exp_; }

    /// 16 hex digits, FNV-1a over the canonical feature listing.
    const std::string& hash() const noexcept { return hash_; }

    bool operator==(const FeatureCatalog& other) const { return features_ == other.features_; }

private:
    std::vector<Feature> features_;
    std::array<std::vector<int>, kNumPartClasses> by_part_;
    std::array<std::vector<int>, kNumCategories> by_category_;
    std::array<std::array<int, kNumCategories>, kNumPartClasses> lookup_{};
    int max_n_exp_ = 0;
    std::string hash_;
};

/// The built-in 69-entry incidence table.
FeatureCatalog default_catalog();

struct Dataset {
    std::vector<Scene> scenes;
    FeatureCatalog catalog;

    /// Throws ValidationError if any scene is unlabeled.
    Dataset(std::vector<Scene> scenes, FeatureCatalog catalog);
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return errors.empty(); }
};

/// Checks a scene against catalog and domain invariants. Never throws for data problems.
ValidationReport validate_scene(const Scene& scene, const FeatureCatalog& catalog);

/// Multiplicity above which validate_scene warns: 2 x the catalog's largest n_exp.
int implausible_multiplicity(const FeatureCatalog& catalog) noexcept;

}  // namespace partwise
