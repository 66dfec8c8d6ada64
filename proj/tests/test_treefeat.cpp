#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "partwise/error.hpp"
#include "partwise/harness.hpp"
#include "partwise/rng.hpp"
#include "partwise/synth.hpp"
#include "partwise/treefeat.hpp"

using namespace partwise;

namespace {

Detection wheel(double x, double y, double s = 0.9) { return {{x, y}, s, PartClass::Wheel, std::nullopt}; }

Scene rectified(std::vector<Detection> dets) {
    Scene s;
    s.id = "t";
    s.rectified = true;
    s.detections = std::move(dets);
    return s;
}

std::vector<double> xs(const std::vector<Detection>& v) {
    std::vector<double> out;
    for (const Detection& d : v) out.push_back(d.x.x());
    return out;
}

/// An always-negative model (no support vectors, negative bias).
SvmModel never() { return SvmModel{{}, {}, -1.0, 1.0, 1.0}; }
SvmModel always() { return SvmModel{{}, {}, 1.0, 1.0, 1.0}; }

}  // namespace

TEST_CASE("split_wheels") {
    SUBCASE("height rule") {
        const WheelSplit w = split_wheels(rectified({wheel(1, 0.0), wheel(2, 0.02), wheel(3, 0.9)}), 0.15);
        CHECK(w.on_road.size() == 2);
        CHECK(w.off_road.size() == 1);
        CHECK(w.off_road[0].x.x() == 3);
    }
    SUBCASE("single wheel is on-road") {
        const WheelSplit w = split_wheels(rectified({wheel(1, 2.0)}), 0.15);
        CHECK(w.on_road.size() == 1);
        CHECK(w.off_road.empty());
    }
    SUBCASE("level wheels are all on-road and sorted by x") {
        const WheelSplit w = split_wheels(rectified({wheel(5, 0.3), wheel(1, 0.3), wheel(3, 0.3)}), 0.15);
        CHECK(xs(w.on_road) == std::vector<double>{1, 3, 5});
    }
    SUBCASE("no wheels") {
        const WheelSplit w = split_wheels(rectified({{{0, 0}, 0.9, PartClass::FrontCar, std::nullopt}}), 0.15);
        CHECK(w.on_road.empty());
        CHECK(w.off_road.empty());
    }
    SUBCASE("raw scenes are rejected") {
        Scene s = rectified({});
        s.rectified = false;
        CHECK_THROWS_AS(split_wheels(s, 0.15), ValidationError);
    }
}

TEST_CASE("split partition and wheelbase agree with the direct rule") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Detection> dets;
        std::vector<std::array<double, 2>> anchors;
        const std::size_t n = rng.index(8);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = rng.uniform(0, 15);
            const double y = rng.uniform() < 0.7 ? rng.uniform(0, 0.1) : rng.uniform(0.5, 2);
            dets.push_back(wheel(x, y));
            anchors.push_back({x, y});
        }
        dets.push_back({{1, 1}, 0.5, PartClass::LoadCar, std::nullopt});
        const double tol = rng.uniform(0.05, 0.4);
        const WheelSplit w = split_wheels(rectified(dets), tol);
        CHECK(w.on_road.size() + w.off_road.size() == n);
        CHECK(wheelbase(w) == doctest::Approx(oracle::wheelbase(anchors, tol)));
    }
}

TEST_CASE("wheelbase") {
    CHECK(wheelbase(split_wheels(rectified({wheel(1.0, 0), wheel(4.5, 0)}), 0.15)) == doctest::Approx(3.5));
    CHECK(wheelbase(split_wheels(rectified({wheel(1.0, 0)}), 0.15)) == 0.0);
    CHECK(wheelbase(split_wheels(rectified({wheel(1, 0), wheel(6, 0), wheel(2.5, 0)}), 0.15)) == doctest::Approx(5.0));
}

TEST_CASE("wheelbase is translation and order invariant, and scales with coordinates") {
    Rng rng(7);
    std::vector<Detection> dets = {wheel(1.3, 0), wheel(4.9, 0.05), wheel(11.8, 0.02), wheel(6, 1.2)};
    const double base = wheelbase(split_wheels(rectified(dets), 0.15));
    std::vector<Detection> shifted = dets;
    for (Detection& d : shifted) d.x.x() += 3.7;
    rng.shuffle(shifted);
    CHECK(wheelbase(split_wheels(rectified(shifted), 0.15)) == doctest::Approx(base));
    for (double s : {0.9, 0.95, 1.05, 1.1}) {
        std::vector<Detection> scaled = dets;
        for (Detection& d : scaled) d.x *= s;
        const WheelSplit w = split_wheels(rectified(scaled), 0.15 * s);
        CHECK(w.on_road.size() == 3);
        CHECK(wheelbase(w) == doctest::Approx(s * base));
    }
}

TEST_CASE("front elevation") {
    Detection front{{0.8, 1.0}, 0.9, PartClass::FrontTruck, Box{{0.2, 0.0}, {1.4, 2.0}}};
    const Scene truck = rectified({front, wheel(1.4, 0), wheel(5, 0)});
    CHECK(front_elevation(truck, split_wheels(truck, 0.15)) == doctest::Approx(1.2));
    const Scene no_front = rectified({wheel(1.4, 0), wheel(5, 0)});
    CHECK(front_elevation(no_front, split_wheels(no_front, 0.15)) == 0.0);
    Detection flush = front;
    flush.bbox = Box{{1.4, 0.0}, {2.0, 2.0}};
    const Scene s = rectified({flush, wheel(1.4, 0)});
    CHECK(front_elevation(s, split_wheels(s, 0.15)) == 0.0);

    // The frontmost front-type part is used.
    Detection bike{{0.0, 0.5}, 0.9, PartClass::BodyBike, Box{{-0.5, 0.0}, {0.5, 1.0}}};
    CHECK(front_part(rectified({front, bike}))->part == PartClass::BodyBike);
}

TEST_CASE("artic metrics") {
    TreeFeatureConfig cfg;
    const auto m = artic_metrics(split_wheels(rectified({wheel(0, 0), wheel(1.5, 0), wheel(5.5, 0), wheel(6.8, 0)}), 0.15), cfg);
    REQUIRE(m.has_value());
    CHECK((*m)(0) == doctest::Approx(6.8));
    CHECK((*m)(1) == doctest::Approx(4.0 / 6.8));
    CHECK((*m)(2) == doctest::Approx(1.3 / 6.8));
    CHECK((*m)(1) == doctest::Approx(0.588).epsilon(1e-3));
    CHECK((*m)(2) == doctest::Approx(0.191).epsilon(1e-2));

    CHECK_FALSE(artic_metrics(split_wheels(rectified({wheel(0, 0), wheel(1, 0), wheel(2, 0)}), 0.15), cfg).has_value());

    const auto eq = artic_metrics(split_wheels(rectified({wheel(0, 0), wheel(2, 0), wheel(4, 0), wheel(6, 0)}), 0.15), cfg);
    CHECK((*eq)(1) == doctest::Approx(1.0 / 3.0));
    CHECK((*eq)(2) == doctest::Approx(1.0 / 3.0));

    cfg.scale_ref = 10.0;
    CHECK((*artic_metrics(split_wheels(rectified({wheel(0, 0), wheel(1.5, 0), wheel(5.5, 0), wheel(6.8, 0)}), 0.15), cfg))(0) ==
          doctest::Approx(0.68));
}

TEST_CASE("tractor metrics") {
    Detection front{{0.8, 1.2}, 0.9, PartClass::FrontTruck, Box{{0.0, 0.0}, {1.6, 2.4}}};
    const Scene s = rectified({front, wheel(1.0, 0), wheel(4.6, 0)});
    const auto m = tractor_metrics(s, split_wheels(s, 0.15));
    REQUIRE(m.has_value());
    CHECK((*m - Eigen::Vector3d(3.6, 2.4, 2.0)).norm() < 1e-12);

    const Scene bare = rectified({wheel(1.0, 0), wheel(4.6, 0)});
    CHECK((*tractor_metrics(bare, split_wheels(bare, 0.15)))(1) == 0.0);

    const Scene five = rectified({wheel(0, 0), wheel(1, 0), wheel(2, 0), wheel(3, 0), wheel(4, 0)});
    CHECK_FALSE(tractor_metrics(five, split_wheels(five, 0.15)).has_value());
}

TEST_CASE("facing normalization mirrors x") {
    Scene s = rectified({{{3.0, 1.0}, 0.9, PartClass::FrontCar, Box{{2.0, 0.5}, {4.0, 1.5}}}});
    const Scene m = normalize_facing(s, Facing::PositiveX);
    CHECK(m.detections[0].x == Point2(-3.0, 1.0));
    CHECK(m.detections[0].bbox->min == Point2(-4.0, 0.5));
    CHECK(m.detections[0].bbox->max == Point2(-2.0, 1.5));
    CHECK(normalize_facing(s, Facing::NegativeX) == s);
}

TEST_CASE("build_tree_features") {
    SUBCASE("empty scene") {
        CHECK(build_tree_features(rectified({}), never(), never()) == TreeFeatures{});
        // Zero wheels is below the artic guard, so only the tractor SVM is consulted.
        CHECK_FALSE(build_tree_features(rectified({}), always(), never()).is_artic);
    }
    SUBCASE("guards") {
        const Scene four = rectified({wheel(0, 0), wheel(1, 0), wheel(5, 0), wheel(6, 0)});
        const TreeFeatures a = build_tree_features(four, always(), always());
        CHECK(a.is_artic);
        CHECK(a.is_tractor);
        const Scene three = rectified({wheel(0, 0), wheel(1, 0), wheel(5, 0)});
        CHECK_FALSE(build_tree_features(three, always(), never()).is_artic);
        const Scene five = rectified({wheel(0, 0), wheel(1, 0), wheel(5, 0), wheel(6, 0), wheel(7, 0)});
        CHECK_FALSE(build_tree_features(five, never(), always()).is_tractor);
    }
    SUBCASE("named access") {
        TreeFeatures f;
        f.part_presence[code(PartClass::FrontVan)] = true;
        f.n_on_road = 3;
        f.wheelbase = 4.5;
        CHECK(tree_feature_value(f, "Front Van") == 1.0);
        CHECK(tree_feature_value(f, "Front Car") == 0.0);
        CHECK(tree_feature_value(f, "n_on_road") == 3.0);
        CHECK(tree_feature_value(f, "wheelbase") == 4.5);
        CHECK(tree_feature_kind("is_artic") == FeatureKind::Boolean);
        CHECK(tree_feature_kind("front_elevation") == FeatureKind::Numeric);
        CHECK_FALSE(tree_feature_kind("colour").has_value());
        CHECK_THROWS_AS(tree_feature_value(f, "colour"), LookupError);
    }
}

TEST_CASE("synthetic layouts through trained sub-feature SVMs") {
    const TemplateLibrary lib = default_templates();
    NoiseConfig noise;
    noise.fp_a = 0.0;
    noise.dropout_rate = 0.0;
    CategoryMix mix;
    for (VehicleCategory c : all_categories()) mix[c] = 30;
    const Dataset train = generate_dataset(mix, lib, noise, 4);
    const PipelineConfig cfg;
    const SvmTrainingSet as = artic_training_set(train, cfg.tree);
    const SvmTrainingSet ts = tractor_training_set(train, cfg.tree);
    const SvmModel artic = train_svm(as.points, as.labels, cfg.artic_svm).model;
    const SvmModel tractor = train_svm(ts.points, ts.labels, cfg.tractor_svm).model;

    CHECK(build_tree_features(rectified({}), artic, tractor, cfg.tree) == TreeFeatures{});
    for (int i = 0; i < 20; ++i) {
        const Scene a = generate_scene(VehicleCategory::ArticTruck, lib, noise, 1000 + i);
        const TreeFeatures fa = build_tree_features(a, artic, tractor, cfg.tree);
        CHECK(fa.n_on_road > 3);
        CHECK(fa.is_artic);
        const Scene c = generate_scene(VehicleCategory::Car, lib, noise, 2000 + i);
        const TreeFeatures fc = build_tree_features(c, artic, tractor, cfg.tree);
        CHECK(fc.n_on_road == 2);
        CHECK_FALSE(fc.is_artic);
        CHECK_FALSE(fc.is_tractor);
    }
}

TEST_CASE("config JSON") {
    TreeFeatureConfig cfg;
    cfg.on_road_tol = 0.3;
    cfg.scale_ref = 2.0;
    cfg.facing = Facing::PositiveX;
    CHECK(tree_feature_config_from_json(tree_feature_config_to_json(cfg)) == cfg);
    CHECK_THROWS_AS(tree_feature_config_from_json({{"scale_ref", 0.0}}), ValidationError);
    CHECK_THROWS_AS(tree_feature_config_from_json({{"facing_direction", "up"}}), SchemaError);
}
