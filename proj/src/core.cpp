#include "partwise/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "partwise/error.hpp"

namespace partwise {

namespace {

constexpr std::array<std::string_view, kNumPartClasses> kPartNames = {
    "Body Bike",
    "Front Bus",
    "Front Car",
    "Front Truck",
    "Front Van",
    "Load Camper Van",
    "Load Car",
    "Load Cuboid",
    "Load Tank",
    "Load Trough",
    "Load Van",
    "Roof Camper Van",
    "Roof Truck Car Transporter",
    "Roof Van",
    "Support Truck Car Transporter",
    "Wheel",
};

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "Artic Truck",
    "Artic Truck Dumptor",
    "Artic Truck Low Loaded",
    "Artic Truck Tanker",
    "Artic Van",
    "Bike",
    "Bus",
    "Camper Van",
    "Car",
    "Tractor Truck",
    "Trailer",
    "Truck",
    "Truck Car Transporter Empty",
    "Truck Car Transporter Loaded",
    "Truck Dumptor",
    "Truck Low Loaded",
    "Truck Tanker",
    "Van",
    "Van Pickup",
};

template <typename Enum, std::size_t N>
constexpr std::array<Enum, N> make_all() {
    std::array<Enum, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = static_cast<Enum>(i);
    return out;
}

constexpr auto kAllParts = make_all<PartClass, kNumPartClasses>();
constexpr auto kAllCategories = make_all<VehicleCategory, kNumCategories>();

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

PartClass part_from_code(int c) {
    if (c < 0 || c >= kNumPartClasses) throw std::out_of_range("part class code out of range");
    return static_cast<PartClass>(c);
}

VehicleCategory category_from_code(int c) {
    if (c < 0 || c >= kNumCategories) throw std::out_of_range("vehicle category code out of range");
    return static_cast<VehicleCategory>(c);
}

std::string_view name(PartClass p) noexcept { return kPartNames[static_cast<std::size_t>(code(p))]; }

std::string_view name(VehicleCategory c) noexcept {
    return kCategoryNames[static_cast<std::size_t>(code(c))];
}

std::optional<PartClass> parse_part(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kPartNames.size(); ++i) {
        if (kPartNames[i] == s) return static_cast<PartClass>(i);
    }
    if (s == "Truck Cabin") return PartClass::FrontTruck;
    return std::nullopt;
}

std::optional<VehicleCategory> parse_category(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == s) return static_cast<VehicleCategory>(i);
    }
    return std::nullopt;
}

bool is_front_type(PartClass p) noexcept {
    switch (p) {
        case PartClass::FrontCar:
        case PartClass::FrontVan:
        case PartClass::FrontTruck:
        case PartClass::FrontBus:
        case PartClass::BodyBike:
            return true;
        default:
            return false;
    }
}

const std::array<PartClass, kNumPartClasses>& all_parts() noexcept { return kAllParts; }
const std::array<VehicleCategory, kNumCategories>& all_categories() noexcept { return kAllCategories; }

Point2 anchor_point(const Box& box, PartClass part, bool y_up) {
    if (part == PartClass::Wheel) {
        const double bottom = y_up ? box.min.y() : box.max.y();
        return {0.5 * (box.min.x() + box.max.x()), bottom};
    }
    return box.center();
}

// ---------------------------------------------------------------------------

FeatureCatalog::FeatureCatalog(std::vector<Feature> features) : features_(std::move(features)) {
    for (auto& row : lookup_) row.fill(-1);
    std::string canonical;
    for (std::size_t k = 0; k < features_.size(); ++k) {
        const Feature& f = features_[k];
        if (code(f.part) < 0 || code(f.part) >= kNumPartClasses || code(f.category) < 0 ||
            code(f.category) >= kNumCategories) {
            throw SchemaError("feature catalog entry " + std::to_string(k) + " has an invalid enum code");
        }
        if (f.n_exp < 1) {
            throw ValidationError("feature catalog entry (" + std::string(name(f.part)) + ", " +
                                  std::string(name(f.category)) + ") has n_exp < 1");
        }
        int& slot = lookup_[static_cast<std::size_t>(code(f.part))][static_cast<std::size_t>(code(f.category))];
        if (slot >= 0) {
            throw ValidationError("duplicate feature catalog entry (" + std::string(name(f.part)) + ", " +
                                  std::string(name(f.category)) + ")");
        }
        slot = static_cast<int>(k);
        by_part_[static_cast<std::size_t>(code(f.part))].push_back(static_cast<int>(k));
        by_category_[static_cast<std::size_t>(code(f.category))].push_back(static_cast<int>(k));
        max_n_exp_ = std::max(max_n_exp_, f.n_exp);
        canonical += std::to_string(code(f.part)) + ":" + std::to_string(code(f.category)) + ":" +
                     std::to_string(f.n_exp) + ";";
    }
    for (const VehicleCategory c : kAllCategories) {
        if (by_category_[static_cast<std::size_t>(code(c))].empty()) {
            throw ValidationError("feature catalog has no feature for category '" + std::string(name(c)) + "'");
        }
    }
    hash_ = fnv1a_hex(canonical);
}

std::optional<int> FeatureCatalog::index_of(PartClass p, VehicleCategory c) const noexcept {
    const int k = lookup_[static_cast<std::size_t>(code(p))][static_cast<std::size_t>(code(c))];
    if (k < 0) return std::nullopt;
    return k;
}

std::span<const int> FeatureCatalog::features_of_part(PartClass p) const noexcept {
    return by_part_[static_cast<std::size_t>(code(p))];
}

std::span<const int> FeatureCatalog::features_of_category(VehicleCategory c) const noexcept {
    return by_category_[static_cast<std::size_t>(code(c))];
}

FeatureCatalog default_catalog() {
    using P = PartClass;
    using C = VehicleCategory;
    // Part sets per category; wheel n_exp is the usual number of visible wheels
    // on the side plane (on-road plus carried).
    const std::vector<std::pair<C, std::vector<std::pair<P, int>>>> table = {
        {C::ArticTruck, {{P::FrontTruck, 1}, {P::LoadCuboid, 1}, {P::Wheel, 5}}},
        {C::ArticTruckDumptor, {{P::FrontTruck, 1}, {P::LoadTrough, 1}, {P::Wheel, 5}}},
        {C::ArticTruckLowLoaded,
         {{P::FrontCar, 1}, {P::FrontTruck, 1}, {P::LoadCar, 1}, {P::LoadCuboid, 1}, {P::Wheel, 5}}},
        {C::ArticTruckTanker, {{P::FrontTruck, 1}, {P::LoadTank, 1}, {P::Wheel, 5}}},
        {C::ArticVan, {{P::FrontVan, 1}, {P::LoadCuboid, 1}, {P::LoadVan, 1}, {P::Wheel, 4}}},
        {C::Bike, {{P::BodyBike, 1}, {P::Wheel, 2}}},
        {C::Bus, {{P::FrontBus, 1}, {P::Wheel, 3}}},
        {C::CamperVan, {{P::FrontVan, 1}, {P::LoadCamperVan, 1}, {P::RoofCamperVan, 1}, {P::Wheel, 2}}},
        {C::Car, {{P::FrontCar, 1}, {P::LoadCar, 1}, {P::Wheel, 2}}},
        {C::TractorTruck, {{P::FrontTruck, 1}, {P::Wheel, 3}}},
        {C::Trailer,
         {{P::FrontCar, 1},
          {P::FrontVan, 1},
          {P::LoadCamperVan, 1},
          {P::LoadCar, 1},
          {P::LoadCuboid, 1},
          {P::RoofCamperVan, 1},
          {P::Wheel, 3}}},
        {C::Truck, {{P::FrontTruck, 1}, {P::LoadCuboid, 1}, {P::Wheel, 3}}},
        {C::TruckCarTransporterEmpty,
         {{P::FrontTruck, 1}, {P::RoofTruckCarTransporter, 1}, {P::SupportTruckCarTransporter, 1}, {P::Wheel, 3}}},
        {C::TruckCarTransporterLoaded,
         {{P::FrontCar, 1},
          {P::FrontTruck, 1},
          {P::LoadCar, 1},
          {P::RoofTruckCarTransporter, 1},
          {P::SupportTruckCarTransporter, 1},
          {P::Wheel, 5}}},
        {C::TruckDumptor, {{P::FrontTruck, 1}, {P::LoadTrough, 1}, {P::Wheel, 4}}},
        {C::TruckLowLoaded, {{P::FrontCar, 1}, {P::FrontTruck, 1}, {P::LoadCar, 1}, {P::LoadCuboid, 1}, {P::Wheel, 3}}},
        {C::TruckTanker, {{P::FrontTruck, 1}, {P::LoadTank, 1}, {P::Wheel, 3}}},
        {C::Van, {{P::FrontVan, 1}, {P::LoadVan, 1}, {P::RoofVan, 1}, {P::Wheel, 2}}},
        {C::VanPickup, {{P::FrontVan, 1}, {P::LoadTrough, 1}, {P::Wheel, 2}}},
    };
    std::vector<Feature> features;
    for (const auto& [category, parts] : table) {
        for (const auto& [part, n_exp] : parts) features.push_back({part, category, n_exp});
    }
    return FeatureCatalog(std::move(features));
}

Dataset::Dataset(std::vector<Scene> s, FeatureCatalog c) : scenes(std::move(s)), catalog(std::move(c)) {
    for (const Scene& scene : scenes) {
        if (!scene.label) throw ValidationError("dataset scene '" + scene.id + "' has no label");
    }
}

// ---------------------------------------------------------------------------

int implausible_multiplicity(const FeatureCatalog& catalog) noexcept { return 2 * catalog.max_n_exp(); }

ValidationReport validate_scene(const Scene& scene, const FeatureCatalog& catalog) {
    ValidationReport report;
    std::array<int, kNumPartClasses> counts{};
    for (std::size_t i = 0; i < scene.detections.size(); ++i) {
        const Detection& d = scene.detections[i];
        const std::string where = "detection " + std::to_string(i);
        if (!d.x.allFinite()) report.errors.push_back(where + ": non-finite coordinate");
        if (!(d.s >= 0.0 && d.s <= 1.0)) report.errors.push_back(where + ": confidence outside [0,1]");
        if (d.bbox) {
            if (!d.bbox->min.allFinite() || !d.bbox->max.allFinite()) {
                report.errors.push_back(where + ": non-finite bounding box");
            } else if ((d.bbox->max.array() < d.bbox->min.array()).any()) {
                report.errors.push_back(where + ": bounding box max corner below min corner");
            } else if (d.x.allFinite()) {
                // Rectification maps anchors pointwise and boxes by their hull, so the
                // anchoring rule is only exact in the raw frame.
                const Point2 ref = anchor_point(*d.bbox, d.part, scene.rectified);
                const double scale = std::max(1.0, d.bbox->max.cwiseAbs().maxCoeff());
                if (!scene.rectified && (ref - d.x).cwiseAbs().maxCoeff() > 1e-6 * scale) {
                    report.warnings.push_back(where + ": location differs from the bounding box reference point");
                }
            }
        }
        const auto p = static_cast<std::size_t>(code(d.part));
        ++counts[p];
    }
    const int limit = implausible_multiplicity(catalog);
    for (const PartClass p : kAllParts) {
        const int n = counts[static_cast<std::size_t>(code(p))];
        if (n == 0) continue;
        if (!catalog.uses_part(p)) {
            report.warnings.push_back("part '" + std::string(name(p)) + "' is not used by any catalog feature");
        }
        if (n > limit) {
            report.warnings.push_back("implausible multiplicity: " + std::to_string(n) + " '" +
                                      std::string(name(p)) + "' detections (limit " + std::to_string(limit) + ")");
        }
    }
    return report;
}

}  // namespace partwise
