#include "partwise/geometry.hpp"

#include <array>

namespace partwise {

Scene rectify_scene(const HomographyD& h, const Scene& scene) {
    if (scene.rectified) throw ValidationError("scene '" + scene.id + "' is already rectified");
    Scene out = scene;
    out.rectified = true;
    for (std::size_t i = 0; i < out.detections.size(); ++i) {
        Detection& d = out.detections[i];
        try {
            d.x = apply_homography(h, d.x);
            if (d.bbox) {
                const Box& b = *d.bbox;
                const std::array<Point2, 4> corners = {
                    Point2{b.min.x(), b.min.y()}, Point2{b.max.x(), b.min.y()},
                    Point2{b.min.x(), b.max.y()}, Point2{b.max.x(), b.max.y()}};
                Box hull{apply_homography(h, corners[0]), apply_homography(h, corners[0])};
                for (const Point2& c : corners) {
                    const Point2 m = apply_homography(h, c);
                    hull.min = hull.min.cwiseMin(m);
                    hull.max = hull.max.cwiseMax(m);
                }
                d.bbox = hull;
            }
        } catch (const HorizonError&) {
            throw HorizonError("scene '" + scene.id + "' detection " + std::to_string(i) + " (" +
                               std::string(name(d.part)) + ") maps to infinity");
        }
    }
    return out;
}

const HomographyD& Calibration::for_scene(const Scene& scene) const {
    if (scene.camera) {
        if (const auto it = per_camera.find(*scene.camera); it != per_camera.end()) return it->second;
    }
    if (shared) return *shared;
    throw LookupError("no calibration for scene '" + scene.id + "'" +
                      (scene.camera ? " (camera '" + *scene.camera + "')" : std::string()));
}

std::vector<CorrespondenceD> correspondences_from_json(const Json& j) {
    const auto it = j.find("pairs");
    if (it == j.end() || !it->is_array()) throw SchemaError("calibration needs a 'pairs' array");
    std::vector<CorrespondenceD> pairs;
    for (const Json& row : *it) {
        if (!row.is_array() || row.size() != 4) throw SchemaError("calibration pair must be [ix, iy, wx, wy]");
        for (const Json& v : row) {
            if (!v.is_number()) throw SchemaError("calibration pair entries must be numbers");
        }
        pairs.push_back({{row[0].get<double>(), row[1].get<double>()}, {row[2].get<double>(), row[3].get<double>()}});
    }
    return pairs;
}

Calibration calibration_from_json(const Json& j) {
    if (!j.is_object()) throw SchemaError("calibration file must be an object");
    Calibration cal;
    if (j.contains("pairs")) cal.shared = fit_homography(correspondences_from_json(j)).h;
    if (const auto it = j.find("cameras"); it != j.end()) {
        if (!it->is_object()) throw SchemaError("calibration 'cameras' must be an object");
        for (const auto& [camera, sidecar] : it->items()) {
            cal.per_camera.emplace(camera, fit_homography(correspondences_from_json(sidecar)).h);
        }
    }
    if (!cal.shared && cal.per_camera.empty()) throw SchemaError("calibration file defines no homography");
    return cal;
}

Calibration load_calibration(const std::filesystem::path& path) { return calibration_from_json(read_json_file(path)); }

}  // namespace partwise
