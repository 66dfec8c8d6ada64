#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "partwise/error.hpp"
#include "partwise/rng.hpp"
#include "partwise/spatial.hpp"
#include "partwise/synth.hpp"

using namespace partwise;

TEST_CASE("default templates cover every category within the catalog") {
    const TemplateLibrary lib = default_templates();
    for (VehicleCategory c : all_categories()) CHECK(lib.covers(c));
    CHECK(lib.incidence_errors(default_catalog()).empty());
    CHECK(templates_from_json(templates_to_json(lib)).templates() == lib.templates());
}

TEST_CASE("artic wheel layouts show the tractor-trailer gap") {
    const TemplateLibrary lib = default_templates();
    for (const LayoutTemplate* t : lib.variants(VehicleCategory::ArticTruck)) {
        for (const auto& option : t->wheel_options) {
            REQUIRE(option.size() >= 4);
            double widest = 0;
            for (std::size_t i = 1; i < option.size(); ++i) widest = std::max(widest, option[i] - option[i - 1]);
            CHECK(widest == doctest::Approx(option[2] - option[1]));
        }
    }
}

TEST_CASE("box anchoring") {
    const Box w = box_around_anchor(PartClass::Wheel, Point2(2, 0), Eigen::Vector2d(0.6, 0.6));
    CHECK(w.min.isApprox(Point2(1.7, 0.0)));
    CHECK(w.max.isApprox(Point2(2.3, 0.6)));
    const Box f = box_around_anchor(PartClass::FrontCar, Point2(1, 1), Eigen::Vector2d(2, 1));
    CHECK(f.min.isApprox(Point2(0, 0.5)));
    CHECK(anchor_point(f, PartClass::FrontCar, true).isApprox(Point2(1, 1)));
    CHECK(anchor_point(w, PartClass::Wheel, true).isApprox(Point2(2, 0)));
}

TEST_CASE("zero noise reproduces the nominal layout") {
    const TemplateLibrary lib = default_templates();
    const NoiseConfig clean = NoiseConfig::clean();
    const Scene s = generate_scene(VehicleCategory::Car, lib, clean, 7, "car");
    const LayoutTemplate& t = *lib.variants(VehicleCategory::Car).front();
    REQUIRE(lib.variants(VehicleCategory::Car).size() == 1);
    REQUIRE(t.wheel_options.size() == 1);
    REQUIRE(s.detections.size() == t.parts.size() + t.wheel_options[0].size());
    for (std::size_t i = 0; i < t.parts.size(); ++i) {
        CHECK(s.detections[i].part == t.parts[i].part);
        CHECK(s.detections[i].x == t.parts[i].anchor);
    }
    for (std::size_t i = 0; i < t.wheel_options[0].size(); ++i) {
        CHECK(s.detections[t.parts.size() + i].x == Point2(t.wheel_options[0][i], 0.0));
    }
    for (const Detection& d : s.detections) CHECK(d.s == clean.conf_mean);
    CHECK(s.rectified);
    CHECK(s.label == VehicleCategory::Car);
    CHECK(s.id == "car");
}

TEST_CASE("full dropout leaves an empty labeled scene") {
    NoiseConfig n;
    n.dropout_rate = 1.0;
    n.fp_a = 0.0;
    const Scene s = generate_scene(VehicleCategory::Bus, default_templates(), n, 3);
    CHECK(s.detections.empty());
    CHECK(s.label == VehicleCategory::Bus);
}

TEST_CASE("false positive rate matches the configured curve") {
    NoiseConfig n;
    n.dropout_rate = 1.0;
    n.threshold = 0.001;
    n.fp_conf_lo = 0.001;
    n.fp_a = 2.0 / std::sqrt(500.0);
    REQUIRE(n.fp_expected(0.001) == doctest::Approx(2.0));
    const TemplateLibrary lib = default_templates();
    double total = 0;
    const int N = 10000;
    for (int i = 0; i < N; ++i) total += static_cast<double>(generate_scene(VehicleCategory::Car, lib, n, derive_seed(5, i)).detections.size());
    const double mean = total / N;
    CHECK(mean >= 1.9);
    CHECK(mean <= 2.1);
}

TEST_CASE("false positives stay in bounds and in the confidence range") {
    NoiseConfig n;
    n.dropout_rate = 1.0;
    n.fp_a = 3.0;
    const TemplateLibrary lib = default_templates();
    for (int i = 0; i < 200; ++i) {
        for (const Detection& d : generate_scene(VehicleCategory::Van, lib, n, 100 + i).detections) {
            CHECK(d.x.x() >= n.bounds[0]);
            CHECK(d.x.x() <= n.bounds[2]);
            CHECK(d.x.y() >= n.bounds[1]);
            CHECK(d.x.y() <= n.bounds[3]);
            CHECK(d.s >= n.fp_conf_lo);
            CHECK(d.s <= n.fp_conf_hi);
        }
    }
}

TEST_CASE("generated scenes validate and are deterministic") {
    const TemplateLibrary lib = default_templates();
    const NoiseConfig n;
    const FeatureCatalog cat = default_catalog();
    for (VehicleCategory c : all_categories()) {
        for (int i = 0; i < 20; ++i) {
            const Scene s = generate_scene(c, lib, n, 40 + i);
            CHECK(validate_scene(s, cat).ok());
            CHECK(generate_scene(c, lib, n, 40 + i) == s);
        }
    }
}

TEST_CASE("missing template") {
    const TemplateLibrary all = default_templates();
    std::vector<LayoutTemplate> only;
    for (const LayoutTemplate& t : all.templates())
        if (t.category == VehicleCategory::Car) only.push_back(t);
    const TemplateLibrary lib(only);
    CHECK_THROWS_AS(generate_scene(VehicleCategory::Bus, lib, {}, 1), LookupError);
}

TEST_CASE("category mixes") {
    SUBCASE("explicit") {
        const Dataset d = generate_dataset({{VehicleCategory::Car, 3}}, default_templates(), {}, 1);
        REQUIRE(d.scenes.size() == 3);
        for (const Scene& s : d.scenes) CHECK(s.label == VehicleCategory::Car);
        CHECK(d.scenes[0].id != d.scenes[1].id);
    }
    SUBCASE("reference proportions") {
        const auto& ref = reference_category_counts();
        CHECK(std::accumulate(ref.begin(), ref.end(), 0) == 4779);
        const CategoryMix mix = default_mix(1000);
        int total = 0;
        for (const auto& [c, n] : mix) {
            total += n;
            CHECK(std::abs(n / 1000.0 - ref[static_cast<std::size_t>(code(c))] / 4779.0) <= 0.02);
        }
        CHECK(total == 1000);
        const CategoryMix full = default_mix(4779);
        for (VehicleCategory c : all_categories()) CHECK(full.at(c) == ref[static_cast<std::size_t>(code(c))]);
    }
    SUBCASE("JSON and determinism") {
        const CategoryMix mix = {{VehicleCategory::Bike, 2}, {VehicleCategory::Truck, 4}};
        CHECK(category_mix_from_json(category_mix_to_json(mix)) == mix);
        CHECK_THROWS(category_mix_from_json({{"Bike", -1}}));
        CHECK_THROWS_AS(category_mix_from_json({{"Tram", 1}}), SchemaError);
        const Dataset a = generate_dataset(mix, default_templates(), {}, 9);
        const Dataset b = generate_dataset(mix, default_templates(), {}, 9);
        CHECK(a.scenes == b.scenes);
        CHECK_FALSE(generate_dataset(mix, default_templates(), {}, 10).scenes == a.scenes);
    }
}

TEST_CASE("clean scores peak at one where every nominal position has a mode") {
    NoiseConfig n = NoiseConfig::clean();
    n.conf_mean = 1.0;
    const TemplateLibrary lib = default_templates();
    const FeatureCatalog cat = default_catalog();
    int checked = 0, eligible = 0;
    for (VehicleCategory c : all_categories()) {
        CAPTURE(name(c));
        const Dataset d = generate_dataset({{c, 12}}, lib, n, 3);
        const SpatialModel model = build_spatial_model(d, {}, 1).model;
        for (int k : cat.features_of_category(c)) {
            const Feature& f = cat[static_cast<std::size_t>(k)];
            std::set<std::pair<double, double>> positions;
            for (const Scene& s : d.scenes)
                for (const Detection& det : s.detections)
                    if (det.part == f.part) positions.emplace(det.x.x(), det.x.y());
            const SpatialMap* map = model.find(k);
            if (positions.empty() || !map) continue;
            ++eligible;
            if (map->components.size() != positions.size()) continue;
            ++checked;
            for (const Scene& s : d.scenes) {
                int count = 0;
                for (const Detection& det : s.detections) count += det.part == f.part;
                if (count >= f.n_exp) CHECK(part_scores(model, cat, s)(k) >= 0.99);
            }
        }
    }
    CHECK(checked >= eligible * 3 / 4);
}

TEST_CASE("threshold emulation") {
    const TemplateLibrary lib = default_templates();
    const NoiseConfig noise;
    const NoiseConfig clean = NoiseConfig::clean();

    SUBCASE("default threshold leaves a clean scene alone") {
        const Scene s = generate_scene(VehicleCategory::Truck, lib, clean, 1);
        CHECK(emulate_threshold(s, 0.5, ScorePolicy::Retained, noise, 2) == s);
    }
    SUBCASE("adapted floors confidences") {
        for (int i = 0; i < 50; ++i) {
            const Scene s = generate_scene(VehicleCategory::Truck, lib, noise, 10 + i);
            const Scene t = emulate_threshold(s, 0.001, ScorePolicy::Adapted, noise, 20 + i);
            for (const Detection& d : t.detections) CHECK(d.s >= 0.5);
            const Scene r = emulate_threshold(s, 0.001, ScorePolicy::Retained, noise, 20 + i);
            REQUIRE(r.detections.size() == t.detections.size());
            for (std::size_t j = 0; j < r.detections.size(); ++j) {
                CHECK(t.detections[j].s == std::max(0.5, r.detections[j].s));
                CHECK(r.detections[j].s >= 0.001);
            }
        }
    }
    SUBCASE("extra false positives follow the curve") {
        const double expected = 1000.0 * (noise.fp_expected(0.001) - noise.fp_expected(0.5));
        double added = 0;
        for (int i = 0; i < 1000; ++i) {
            const Scene s = generate_scene(VehicleCategory::Car, lib, clean, i);
            added += static_cast<double>(emulate_threshold(s, 0.001, ScorePolicy::Retained, noise, derive_seed(8, i)).detections.size() -
                                         s.detections.size());
        }
        CHECK(std::abs(added - expected) <= 0.1 * expected);
    }
    SUBCASE("raising the threshold drops detections") {
        const Scene s = generate_scene(VehicleCategory::Bus, lib, noise, 4);
        for (const Detection& d : emulate_threshold(s, 0.9, ScorePolicy::Retained, noise, 5).detections) CHECK(d.s >= 0.9);
    }
    SUBCASE("threshold guard") {
        const Scene s = generate_scene(VehicleCategory::Bus, lib, noise, 4);
        CHECK_THROWS_AS(emulate_threshold(s, 0.0, ScorePolicy::Retained, noise, 1), ValidationError);
        CHECK_THROWS_AS(emulate_threshold(s, 1.5, ScorePolicy::Retained, noise, 1), ValidationError);
    }
}

TEST_CASE("noise config") {
    NoiseConfig n;
    n.pos_sigma = 0.2;
    n.fp_conf_lo = 0.55;
    n.bounds = {-2, 0, 25, 5};
    CHECK(noise_config_from_json(noise_config_to_json(n)) == n);
    CHECK(n.fp_expected(0.5) == doctest::Approx(0.05));
    CHECK(NoiseConfig{}.fp_expected(0.001) == doctest::Approx(0.05 * std::sqrt(500.0)));
    CHECK_THROWS_AS(noise_config_from_json({{"dropout_rate", 1.5}}), ValidationError);
    CHECK_THROWS_AS(noise_config_from_json({{"pos_sigma", -1}}), ValidationError);
}
