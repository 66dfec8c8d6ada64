#include <functional>

#include "doctest.h"
#include "partwise/error.hpp"
#include "partwise/harness.hpp"
#include "partwise/synth.hpp"
#include "partwise/tree.hpp"

using namespace partwise;

namespace {

TreeFeatures with(std::initializer_list<PartClass> parts) {
    TreeFeatures f;
    for (PartClass p : parts) f.part_presence[static_cast<std::size_t>(code(p))] = true;
    return f;
}

Json default_json() { return tree_spec_to_json(default_tree_spec()); }

Json& node_json(Json& spec, const std::string& id) {
    for (Json& n : spec["nodes"])
        if (n["id"] == id) return n;
    throw std::runtime_error("no node " + id);
}

}  // namespace

TEST_CASE("default spec") {
    const TreeSpec spec = default_tree_spec();
    CHECK(spec.root() == "body_bike");
    CHECK(spec.depth() >= 5);
    CHECK(tree_spec_from_json(default_json()) == spec);
    CHECK(tree_spec_from_json(Json::parse(default_json().dump())) == spec);
}

TEST_CASE("presence paths") {
    const TreeSpec spec = default_tree_spec();
    SUBCASE("bike") {
        const TreeDecision d = classify_tree(with({PartClass::BodyBike, PartClass::Wheel}), spec);
        CHECK(d.category == VehicleCategory::Bike);
        REQUIRE(d.path.size() == 1);
        CHECK(d.path[0].node == "body_bike");
        CHECK(d.path[0].outcome);
    }
    SUBCASE("artic cuboid") {
        TreeFeatures f = with({PartClass::FrontTruck, PartClass::LoadCuboid, PartClass::Wheel});
        f.is_artic = true;
        const TreeDecision d = classify_tree(f, spec);
        CHECK(d.category == VehicleCategory::ArticTruck);
        CHECK(d.path.back().feat == "is_artic");
        CHECK(d.path.back().outcome);
    }
    SUBCASE("nothing found") {
        const TreeDecision d = classify_tree(TreeFeatures{}, spec);
        CHECK(d.leaf == spec.fallback());
        CHECK(static_cast<int>(d.path.size()) <= spec.depth());
    }
    SUBCASE("numeric threshold") {
        TreeFeatures f = with({PartClass::FrontCar, PartClass::Wheel});
        f.n_on_road = 2;
        CHECK(classify_tree(f, spec).category == VehicleCategory::Car);
        f.n_on_road = 3;
        const TreeDecision d = classify_tree(f, spec);
        CHECK(d.category == VehicleCategory::Trailer);
        CHECK(d.path.back().observed == 3.0);
        CHECK(d.path.back().value == 2.0);
    }
}

TEST_CASE("predicates") {
    TreeFeatures f;
    f.wheelbase = 4.0;
    f.part_presence[code(PartClass::Wheel)] = true;
    CHECK(evaluate_predicate({"n", "Wheel", TreeOp::Present, 0, "a", "b"}, f));
    CHECK_FALSE(evaluate_predicate({"n", "Wheel", TreeOp::Absent, 0, "a", "b"}, f));
    CHECK(evaluate_predicate({"n", "wheelbase", TreeOp::Gt, 3.9, "a", "b"}, f));
    CHECK_FALSE(evaluate_predicate({"n", "wheelbase", TreeOp::Lt, 4.0, "a", "b"}, f));
    CHECK(evaluate_predicate({"n", "wheelbase", TreeOp::Eq, 4.0, "a", "b"}, f));
}

TEST_CASE("every path terminates within the depth") {
    const TreeSpec spec = default_tree_spec();
    // Exhaustive over the booleans the default tree tests.
    const std::vector<PartClass> parts = {PartClass::BodyBike,   PartClass::FrontBus,  PartClass::SupportTruckCarTransporter,
                                          PartClass::LoadCar,    PartClass::RoofTruckCarTransporter, PartClass::FrontTruck,
                                          PartClass::LoadTrough, PartClass::LoadTank,  PartClass::LoadCuboid,
                                          PartClass::FrontVan,   PartClass::FrontCar};
    for (unsigned mask = 0; mask < (1u << (parts.size() + 2)); mask += 7) {
        TreeFeatures f;
        for (std::size_t i = 0; i < parts.size(); ++i)
            if (mask & (1u << i)) f.part_presence[static_cast<std::size_t>(code(parts[i]))] = true;
        f.is_artic = mask & (1u << parts.size());
        f.is_tractor = mask & (1u << (parts.size() + 1));
        f.n_on_road = static_cast<int>(mask % 6);
        const TreeDecision d = classify_tree(f, spec);
        CHECK(static_cast<int>(d.path.size()) <= spec.depth());
        CHECK(spec.leaf(d.leaf) != nullptr);
    }
}

TEST_CASE("malformed specs are rejected at load time") {
    const std::vector<std::pair<std::string, std::function<void(Json&)>>> cases = {
        {"cycle", [](Json& j) { node_json(j, "front_van")["else"] = "body_bike"; }},
        {"missing branch", [](Json& j) { node_json(j, "front_bus")["else"] = "nowhere"; }},
        {"unknown feature", [](Json& j) { node_json(j, "front_bus")["feat"] = "Front Tram"; }},
        {"unknown op", [](Json& j) { node_json(j, "front_bus")["op"] = "near"; }},
        {"present with value", [](Json& j) { node_json(j, "front_bus")["value"] = 1; }},
        {"gt without value", [](Json& j) { node_json(j, "car_axles")["value"] = nullptr; }},
        {"gt on a boolean", [](Json& j) { node_json(j, "front_bus")["op"] = "gt"; node_json(j, "front_bus")["value"] = 1; }},
        {"present on a number", [](Json& j) { node_json(j, "car_axles")["op"] = "present"; node_json(j, "car_axles")["value"] = nullptr; }},
        {"missing root", [](Json& j) { j["root"] = "nope"; }},
        {"fallback not a leaf", [](Json& j) { j["fallback"] = "front_bus"; }},
        {"unknown category", [](Json& j) { j["leaves"][0]["category"] = "Tram"; }},
        {"duplicate id", [](Json& j) { j["leaves"].push_back(j["leaves"][0]); }},
        {"unreachable leaf", [](Json& j) { j["leaves"].push_back({{"id", "orphan"}, {"category", "Car"}}); }},
        {"two parents", [](Json& j) { node_json(j, "front_bus")["then"] = "bike"; }},
        {"not an object", [](Json& j) { j = Json::array(); }},
    };
    for (const auto& [label, mutate] : cases) {
        CAPTURE(label);
        Json j = default_json();
        mutate(j);
        CHECK_THROWS_AS(tree_spec_from_json(j), SpecError);
    }
}

TEST_CASE("all categories must be reachable") {
    // Re-point the bike node straight at the bus leaf, dropping the only Bike leaf.
    Json j = default_json();
    node_json(j, "body_bike")["then"] = "front_bus";
    node_json(j, "front_bus")["then"] = "bus";
    Json leaves = Json::array();
    for (const Json& l : j["leaves"])
        if (l["id"] != "bike") leaves.push_back(l);
    j["leaves"] = leaves;
    CHECK_THROWS_AS(tree_spec_from_json(j), SpecError);
}

TEST_CASE("fallback must be what an empty scene reaches") {
    Json j = default_json();
    j["fallback"] = "bike";
    CHECK_THROWS_AS(tree_spec_from_json(j), SpecError);
}

TEST_CASE("clean template scenes reach their own leaf") {
    const TemplateLibrary lib = default_templates();
    const NoiseConfig clean = NoiseConfig::clean();
    CategoryMix mix;
    for (VehicleCategory c : all_categories()) mix[c] = 20;
    const Dataset train = generate_dataset(mix, lib, clean, 2);
    const ModelBundle b = train_bundle(train, {}, 3, default_tree_spec(), {.tree = true, .softmax = false});
    for (VehicleCategory c : all_categories()) {
        for (std::size_t v = 0; v < lib.variants(c).size() * 4; ++v) {
            const Scene s = generate_scene(c, lib, clean, 500 + v);
            CAPTURE(name(c));
            CHECK(classify_scene(b, s, Pipeline::Tree).category == c);
        }
    }
}
