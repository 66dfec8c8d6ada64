#pragma once

// Random library objects for property tests.

#include <cstdint>
#include <vector>

#include "oracles.hpp"
#include "partwise/core.hpp"
#include "partwise/rng.hpp"
#include "partwise/softmax.hpp"
#include "partwise/spatial.hpp"

namespace fixtures {

using namespace partwise;

/// Maps for roughly 80% of the catalog, 1-3 modes each, means in the synth bounds.
inline SpatialModel random_spatial_model(const FeatureCatalog& cat, Rng& rng) {
    SpatialModel m;
    m.catalog_hash = cat.hash();
    for (std::size_t k = 0; k < cat.size(); ++k) {
        if (rng.uniform() < 0.2) continue;
        SpatialMap map;
        map.feature_index = static_cast<int>(k);
        const std::size_t n = 1 + rng.index(3);
        for (std::size_t j = 0; j < n; ++j) {
            map.components.push_back({Point2(rng.uniform(-1, 20), rng.uniform(0, 4.5)),
                                      Eigen::Vector2d(rng.uniform(0.001, 1.0), rng.uniform(0.001, 1.0)),
                                      1.0 / static_cast<double>(n)});
        }
        m.maps.push_back(std::move(map));
    }
    return m;
}

inline Scene random_scene(Rng& rng, std::size_t max_detections = 12) {
    Scene s;
    s.id = "rand";
    s.rectified = true;
    const std::size_t n = rng.index(max_detections + 1);
    for (std::size_t i = 0; i < n; ++i) {
        Detection d;
        d.part = part_from_code(static_cast<int>(rng.index(kNumPartClasses)));
        d.s = rng.uniform();
        d.x = Point2(rng.uniform(-1, 20), rng.uniform(0, 4.5));
        s.detections.push_back(d);
    }
    return s;
}

inline std::vector<oracle::Feat> oracle_features(const SpatialModel& m, const FeatureCatalog& cat) {
    std::vector<oracle::Feat> out(cat.size());
    for (std::size_t k = 0; k < cat.size(); ++k) {
        out[k].part = code(cat[k].part);
        out[k].n_exp = cat[k].n_exp;
    }
    for (const SpatialMap& map : m.maps) {
        for (const GmmComponent& c : map.components) {
            out[static_cast<std::size_t>(map.feature_index)].modes.push_back({c.mean.x(), c.mean.y(), c.var.x(), c.var.y()});
        }
    }
    return out;
}

inline std::vector<oracle::Det> oracle_detections(const Scene& s) {
    std::vector<oracle::Det> out;
    for (const Detection& d : s.detections) out.push_back({code(d.part), d.x.x(), d.x.y(), d.s});
    return out;
}

inline SoftmaxModel random_softmax(std::size_t n_features, std::size_t n_classes, Rng& rng, double scale = 1.0) {
    SoftmaxModel m = SoftmaxModel::zeros(n_features, "h", n_classes);
    for (Eigen::Index c = 0; c < m.W.rows(); ++c) {
        m.b(c) = rng.normal(0, scale);
        for (Eigen::Index k = 0; k < m.W.cols(); ++k) m.W(c, k) = rng.normal(0, scale);
    }
    return m;
}

inline Eigen::VectorXd random_scores(std::size_t n, Rng& rng, double zero_fraction = 0.5) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < x.size(); ++k)
        if (rng.uniform() >= zero_fraction) x(k) = rng.uniform();
    return x;
}

}  // namespace fixtures
