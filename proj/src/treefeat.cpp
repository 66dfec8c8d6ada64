#include "partwise/treefeat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "partwise/error.hpp"

namespace partwise {

namespace {

void require_rectified(const Scene& scene, const char* op) {
    if (!scene.rectified) throw ValidationError(std::string(op) + ": scene '" + scene.id + "' is not rectified");
}

double leading_edge(const Detection& d) { return d.bbox ? d.bbox->min.x() : d.x.x(); }

}  // namespace

Json tree_feature_config_to_json(const TreeFeatureConfig& cfg) {
    return {{"on_road_tol", cfg.on_road_tol},
            {"scale_ref", cfg.scale_ref},
            {"n_ref", cfg.n_ref},
            {"facing_direction", cfg.facing == Facing::NegativeX ? "-x" : "+x"}};
}

TreeFeatureConfig tree_feature_config_from_json(const Json& j) {
    TreeFeatureConfig cfg;
    if (!j.is_object()) throw SchemaError("tree feature config must be an object");
    cfg.on_road_tol = j.value("on_road_tol", cfg.on_road_tol);
    cfg.scale_ref = j.value("scale_ref", cfg.scale_ref);
    cfg.n_ref = j.value("n_ref", cfg.n_ref);
    const std::string facing = j.value("facing_direction", std::string("-x"));
    if (facing == "-x") {
        cfg.facing = Facing::NegativeX;
    } else if (facing == "+x") {
        cfg.facing = Facing::PositiveX;
    } else {
        throw SchemaError("facing_direction must be \"-x\" or \"+x\", got \"" + facing + "\"");
    }
    if (!(cfg.on_road_tol >= 0.0) || !(cfg.scale_ref > 0.0) || !(cfg.n_ref > 0.0)) {
        throw ValidationError("tree feature config: on_road_tol >= 0, scale_ref > 0, n_ref > 0 required");
    }
    return cfg;
}

Scene normalize_facing(const Scene& scene, Facing facing) {
    if (facing == Facing::NegativeX) return scene;
    Scene out = scene;
    for (Detection& d : out.detections) {
        d.x.x() = -d.x.x();
        if (d.bbox) {
            const double lo = -d.bbox->max.x();
            const double hi = -d.bbox->min.x();
            d.bbox->min.x() = lo;
            d.bbox->max.x() = hi;
        }
    }
    return out;
}

WheelSplit split_wheels(const Scene& scene, double tol) {
    require_rectified(scene, "split_wheels");
    WheelSplit split;
    double lowest = std::numeric_limits<double>::infinity();
    for (const Detection& d : scene.detections) {
        if (d.part == PartClass::Wheel) lowest = std::min(lowest, d.x.y());
    }
    for (const Detection& d : scene.detections) {
        if (d.part != PartClass::Wheel) continue;
        (d.x.y() - lowest <= tol ? split.on_road : split.off_road).push_back(d);
    }
    const auto by_x = [](const Detection& a, const Detection& b) { return a.x.x() < b.x.x(); };
    std::stable_sort(split.on_road.begin(), split.on_road.end(), by_x);
    std::stable_sort(split.off_road.begin(), split.off_road.end(), by_x);
    return split;
}

double wheelbase(const WheelSplit& split) {
    if (split.on_road.size() < 2) return 0.0;
    return std::abs(split.on_road.back().x.x() - split.on_road.front().x.x());
}

const Detection* front_part(const Scene& scene) {
    const Detection* best = nullptr;
    for (const Detection& d : scene.detections) {
        if (is_front_type(d.part) && (!best || leading_edge(d) < leading_edge(*best))) best = &d;
    }
    return best;
}

double front_elevation(const Scene& scene, const WheelSplit& split) {
    require_rectified(scene, "front_elevation");
    const Detection* front = front_part(scene);
    if (!front || split.on_road.empty()) return 0.0;
    return std::max(0.0, split.on_road.front().x.x() - leading_edge(*front));
}

std::optional<Eigen::Vector3d> artic_metrics(const WheelSplit& split, const TreeFeatureConfig& cfg) {
    if (split.on_road.size() <= 3) return std::nullopt;
    const double wb = wheelbase(split);
    const auto& w = split.on_road;
    const double d23 = w[2].x.x() - w[1].x.x();
    const double d34 = w[3].x.x() - w[2].x.x();
    if (wb <= 0.0) return Eigen::Vector3d(0.0, 0.0, 0.0);
    return Eigen::Vector3d(wb / cfg.scale_ref, d23 / wb, d34 / wb);
}

std::optional<Eigen::Vector3d> tractor_metrics(const Scene& scene, const WheelSplit& split,
                                               const TreeFeatureConfig& cfg) {
    if (split.on_road.size() >= 5) return std::nullopt;
    const Detection* front = front_part(scene);
    const double height = (front && front->bbox) ? front->bbox->height() : 0.0;
    return Eigen::Vector3d(wheelbase(split) / cfg.scale_ref, height / cfg.scale_ref,
                           static_cast<double>(split.on_road.size()) / cfg.n_ref);
}

TreeFeatures build_tree_features(const Scene& raw, const SvmModel& artic_svm, const SvmModel& tractor_svm,
                                 const TreeFeatureConfig& cfg) {
    const Scene scene = normalize_facing(raw, cfg.facing);
    TreeFeatures f;
    for (const Detection& d : scene.detections) f.part_presence[static_cast<std::size_t>(code(d.part))] = true;
    const WheelSplit split = split_wheels(scene, cfg.on_road_tol);
    f.n_on_road = static_cast<int>(split.on_road.size());
    f.n_off_road = static_cast<int>(split.off_road.size());
    f.wheelbase = wheelbase(split);
    f.front_elevation = front_elevation(scene, split);
    if (const auto m = artic_metrics(split, cfg)) f.is_artic = predict_svm(artic_svm, *m).label > 0;
    if (const auto m = tractor_metrics(scene, split, cfg)) f.is_tractor = predict_svm(tractor_svm, *m).label > 0;
    return f;
}

std::optional<FeatureKind> tree_feature_kind(std::string_view feat) {
    if (parse_part(feat) || feat == "is_artic" || feat == "is_tractor") return FeatureKind::Boolean;
    if (feat == "n_on_road" || feat == "n_off_road" || feat == "wheelbase" || feat == "front_elevation") {
        return FeatureKind::Numeric;
    }
    return std::nullopt;
}

double tree_feature_value(const TreeFeatures& f, std::string_view feat) {
    if (const auto p = parse_part(feat)) return f.has(*p) ? 1.0 : 0.0;
    if (feat == "is_artic") return f.is_artic ? 1.0 : 0.0;
    if (feat == "is_tractor") return f.is_tractor ? 1.0 : 0.0;
    if (feat == "n_on_road") return f.n_on_road;
    if (feat == "n_off_road") return f.n_off_road;
    if (feat == "wheelbase") return f.wheelbase;
    if (feat == "front_elevation") return f.front_elevation;
    throw LookupError("unknown tree feature '" + std::string(feat) + "'");
}

}  // namespace partwise
