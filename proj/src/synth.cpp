#include "partwise/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "partwise/embedded_data.hpp"
#include "partwise/error.hpp"
#include "partwise/rng.hpp"

namespace partwise {

namespace {

/// Box size given to false positives, which have no template to inherit one from.
Eigen::Vector2d nominal_extent(PartClass p) {
    switch (p) {
        case PartClass::Wheel: return {0.8, 0.8};
        case PartClass::RoofCamperVan:
        case PartClass::RoofTruckCarTransporter:
        case PartClass::RoofVan: return {4.0, 0.4};
        case PartClass::FrontBus:
        case PartClass::FrontCar:
        case PartClass::FrontTruck:
        case PartClass::FrontVan: return {1.4, 1.6};
        default: return {3.0, 1.5};
    }
}

double draw_confidence(Rng& rng, const NoiseConfig& n) {
    if (n.conf_kappa <= 0.0) return n.conf_mean;
    return rng.beta(n.conf_mean * n.conf_kappa, (1.0 - n.conf_mean) * n.conf_kappa);
}

Detection false_positive(Rng& rng, const NoiseConfig& n, double conf) {
    const PartClass part = all_parts()[rng.index(all_parts().size())];
    const Point2 at(rng.uniform(n.bounds[0], n.bounds[2]), rng.uniform(n.bounds[1], n.bounds[3]));
    return {at, conf, part, box_around_anchor(part, at, nominal_extent(part))};
}

void check_noise(const NoiseConfig& n) {
    const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!(n.pos_sigma >= 0.0) || !prob(n.dropout_rate) || !prob(n.conf_mean) || !(n.conf_kappa >= 0.0) ||
        !(n.fp_a >= 0.0) || !(n.fp_b >= 0.0) || !prob(n.fp_conf_lo) || !prob(n.fp_conf_hi) ||
        n.fp_conf_lo > n.fp_conf_hi || !(n.threshold > 0.0 && n.threshold <= 1.0) || !(n.bounds[0] < n.bounds[2]) ||
        !(n.bounds[1] < n.bounds[3])) {
        throw ValidationError("noise config: values out of range");
    }
    if (n.conf_kappa > 0.0 && !(n.conf_mean > 0.0 && n.conf_mean < 1.0)) {
        throw ValidationError("noise config: conf_mean must lie strictly inside (0,1) when conf_kappa > 0");
    }
}

}  // namespace

Box box_around_anchor(PartClass part, const Point2& anchor, const Eigen::Vector2d& extent) {
    if (part == PartClass::Wheel) {
        return {Point2(anchor.x() - 0.5 * extent.x(), anchor.y()), Point2(anchor.x() + 0.5 * extent.x(), anchor.y() + extent.y())};
    }
    return {anchor - 0.5 * extent, anchor + 0.5 * extent};
}

TemplateLibrary::TemplateLibrary(std::vector<LayoutTemplate> templates) : templates_(std::move(templates)) {
    for (const LayoutTemplate& t : templates_) {
        const std::string who = std::string(name(t.category)) + " / " + t.variant;
        if (!(t.wheel_diameter > 0.0)) throw ValidationError("template " + who + ": wheel_diameter must be positive");
        for (const TemplatePart& p : t.parts) {
            if (!p.anchor.allFinite() || !(p.extent.x() > 0.0) || !(p.extent.y() > 0.0)) {
                throw ValidationError("template " + who + ": part extents must be positive and anchors finite");
            }
        }
        for (const auto& option : t.wheel_options) {
            for (const double x : option) {
                if (!std::isfinite(x)) throw ValidationError("template " + who + ": non-finite wheel position");
            }
        }
    }
}

std::vector<const LayoutTemplate*> TemplateLibrary::variants(VehicleCategory c) const {
    std::vector<const LayoutTemplate*> out;
    for (const LayoutTemplate& t : templates_) {
        if (t.category == c) out.push_back(&t);
    }
    return out;
}

std::vector<std::string> TemplateLibrary::incidence_errors(const FeatureCatalog& catalog) const {
    std::vector<std::string> out;
    for (const LayoutTemplate& t : templates_) {
        std::vector<PartClass> used;
        for (const TemplatePart& p : t.parts) used.push_back(p.part);
        if (std::any_of(t.wheel_options.begin(), t.wheel_options.end(), [](const auto& o) { return !o.empty(); })) {
            used.push_back(PartClass::Wheel);
        }
        for (const PartClass p : used) {
            if (!catalog.index_of(p, t.category)) {
                out.push_back("template " + std::string(name(t.category)) + " / " + t.variant + " uses " +
                              std::string(name(p)) + ", which the catalog does not pair with that category");
            }
        }
    }
    return out;
}

TemplateLibrary templates_from_json(const Json& j) {
    const Json& list = j.is_object() ? j.at("templates") : j;
    if (!list.is_array()) throw SchemaError("templates must be an array");
    std::vector<LayoutTemplate> out;
    try {
        for (const Json& t : list) {
            LayoutTemplate lt;
            lt.category = category_from_json(t.at("category"));
            lt.variant = t.value("variant", std::string("default"));
            lt.wheel_diameter = t.value("wheel_diameter", lt.wheel_diameter);
            if (t.contains("wheels")) lt.wheel_options = t.at("wheels").get<std::vector<std::vector<double>>>();
            for (const Json& p : t.at("parts")) {
                lt.parts.push_back({part_from_json(p.at("part")), point_from_json(p.at("anchor"), "anchor"),
                                    point_from_json(p.at("extent"), "extent")});
            }
            out.push_back(std::move(lt));
        }
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("malformed templates: ") + e.what());
    }
    return TemplateLibrary(std::move(out));
}

Json templates_to_json(const TemplateLibrary& lib) {
    Json list = Json::array();
    for (const LayoutTemplate& t : lib.templates()) {
        Json parts = Json::array();
        for (const TemplatePart& p : t.parts) {
            parts.push_back({{"part", name(p.part)}, {"anchor", point_to_json(p.anchor)}, {"extent", point_to_json(p.extent)}});
        }
        list.push_back({{"category", name(t.category)},
                        {"variant", t.variant},
                        {"wheel_diameter", t.wheel_diameter},
                        {"wheels", t.wheel_options},
                        {"parts", std::move(parts)}});
    }
    return {{"templates", std::move(list)}};
}

TemplateLibrary load_templates(const std::filesystem::path& path) { return templates_from_json(read_json_file(path)); }

TemplateLibrary default_templates() { return templates_from_json(parse_json(embedded::kDefaultTemplatesJson)); }

double NoiseConfig::fp_expected(double t) const {
    if (!(t > 0.0)) throw ValidationError("detection threshold must be positive");
    return fp_a * std::pow(0.5 / t, fp_b);
}

NoiseConfig NoiseConfig::clean() {
    NoiseConfig n;
    n.pos_sigma = 0.0;
    n.conf_kappa = 0.0;
    n.dropout_rate = 0.0;
    n.fp_a = 0.0;
    return n;
}

Json noise_config_to_json(const NoiseConfig& n) {
    return {{"pos_sigma", n.pos_sigma},
            {"conf_mean", n.conf_mean},
            {"conf_kappa", n.conf_kappa},
            {"dropout_rate", n.dropout_rate},
            {"fp_a", n.fp_a},
            {"fp_b", n.fp_b},
            {"fp_conf_range", {n.fp_conf_lo, n.fp_conf_hi}},
            {"threshold", n.threshold},
            {"bounds", n.bounds}};
}

NoiseConfig noise_config_from_json(const Json& j) {
    if (!j.is_object()) throw SchemaError("noise config must be an object");
    NoiseConfig n;
    try {
        n.pos_sigma = j.value("pos_sigma", n.pos_sigma);
        n.conf_mean = j.value("conf_mean", n.conf_mean);
        n.conf_kappa = j.value("conf_kappa", n.conf_kappa);
        n.dropout_rate = j.value("dropout_rate", n.dropout_rate);
        n.fp_a = j.value("fp_a", n.fp_a);
        n.fp_b = j.value("fp_b", n.fp_b);
        if (j.contains("fp_conf_range")) {
            const auto r = j.at("fp_conf_range").get<std::array<double, 2>>();
            n.fp_conf_lo = r[0];
            n.fp_conf_hi = r[1];
        }
        n.threshold = j.value("threshold", n.threshold);
        if (j.contains("bounds")) n.bounds = j.at("bounds").get<std::array<double, 4>>();
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("malformed noise config: ") + e.what());
    }
    check_noise(n);
    return n;
}

Scene generate_scene(VehicleCategory category, const TemplateLibrary& lib, const NoiseConfig& noise,
                     std::uint64_t seed, std::string id) {
    check_noise(noise);
    const auto variants = lib.variants(category);
    if (variants.empty()) throw LookupError("no layout template for category '" + std::string(name(category)) + "'");
    Rng rng(seed);
    const LayoutTemplate& tpl = *variants[rng.index(variants.size())];

    std::vector<TemplatePart> parts = tpl.parts;
    if (!tpl.wheel_options.empty()) {
        const auto& option = tpl.wheel_options[rng.index(tpl.wheel_options.size())];
        for (const double x : option) {
            parts.push_back({PartClass::Wheel, Point2(x, 0.0), Eigen::Vector2d(tpl.wheel_diameter, tpl.wheel_diameter)});
        }
    }

    Scene scene{std::move(id), {}, true, category, std::nullopt};
    for (const TemplatePart& p : parts) {
        const Point2 jitter(rng.normal() * noise.pos_sigma, rng.normal() * noise.pos_sigma);
        const double s = draw_confidence(rng, noise);
        const bool dropped = rng.uniform() < noise.dropout_rate;
        if (dropped || s < noise.threshold) continue;
        const Point2 at = p.anchor + jitter;
        scene.detections.push_back({at, s, p.part, box_around_anchor(p.part, at, p.extent)});
    }
    const int n_fp = rng.poisson(noise.fp_expected(noise.threshold));
    for (int i = 0; i < n_fp; ++i) {
        const double conf = rng.uniform(noise.fp_conf_lo, noise.fp_conf_hi);
        scene.detections.push_back(false_positive(rng, noise, conf));
    }
    return scene;
}

CategoryMix category_mix_from_json(const Json& j) {
    if (!j.is_object()) throw SchemaError("category mix must be an object of category name to count");
    CategoryMix mix;
    for (const auto& [key, value] : j.items()) {
        const auto c = parse_category(key);
        if (!c) throw SchemaError("unknown category name \"" + key + "\"");
        if (!value.is_number_integer() || value.get<int>() < 0) {
            throw ValidationError("category mix: count for \"" + key + "\" must be a non-negative integer");
        }
        mix[*c] = value.get<int>();
    }
    return mix;
}

Json category_mix_to_json(const CategoryMix& mix) {
    Json j = Json::object();
    for (const auto& [c, n] : mix) j[std::string(name(c))] = n;
    return j;
}

const std::array<int, kNumCategories>& reference_category_counts() noexcept {
    static const std::array<int, kNumCategories> counts{458, 86, 48, 50, 46, 272, 213, 255, 1258, 23,
                                                        495, 313, 46, 40, 238, 139, 190, 336, 273};
    return counts;
}

CategoryMix default_mix(int total) {
    if (total < 0) throw ValidationError("default_mix: total must be non-negative");
    const auto& ref = reference_category_counts();
    const double ref_total = std::accumulate(ref.begin(), ref.end(), 0.0);
    std::array<int, kNumCategories> counts{};
    std::array<double, kNumCategories> remainder{};
    int assigned = 0;
    for (std::size_t c = 0; c < ref.size(); ++c) {
        const double quota = static_cast<double>(total) * ref[c] / ref_total;
        counts[c] = static_cast<int>(std::floor(quota));
        remainder[c] = quota - counts[c];
        assigned += counts[c];
    }
    std::array<std::size_t, kNumCategories> order{};
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (int r = 0; r < total - assigned; ++r) ++counts[order[static_cast<std::size_t>(r)]];
    CategoryMix mix;
    for (std::size_t c = 0; c < counts.size(); ++c) mix[category_from_code(static_cast<int>(c))] = counts[c];
    return mix;
}

Dataset generate_dataset(const CategoryMix& mix, const TemplateLibrary& lib, const NoiseConfig& noise,
                         std::uint64_t seed, const FeatureCatalog& catalog) {
    std::vector<Scene> scenes;
    std::uint64_t index = 0;
    for (const auto& [category, count] : mix) {
        if (count < 0) throw ValidationError("generate_dataset: negative count");
        for (int i = 0; i < count; ++i, ++index) {
            char id[32];
            std::snprintf(id, sizeof id, "synth-%06llu", static_cast<unsigned long long>(index));
            scenes.push_back(generate_scene(category, lib, noise, derive_seed(seed, index), id));
        }
    }
    return Dataset(std::move(scenes), catalog);
}

Scene emulate_threshold(const Scene& scene, double threshold, ScorePolicy policy, const NoiseConfig& noise,
                        std::uint64_t seed) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in (0, 1]");
    check_noise(noise);
    Scene out = scene;
    Rng rng(seed);
    const double n_base = noise.fp_expected(noise.threshold);
    const double n_t = noise.fp_expected(threshold);
    if (n_t > n_base) {
        // Confidences follow the curve itself: the count of false positives at or
        // above confidence c is fp_expected(c), sampled by inverting it.
        const int extra = rng.poisson(n_t - n_base);
        for (int i = 0; i < extra; ++i) {
            const double n = n_base + rng.uniform() * (n_t - n_base);
            double conf = 0.5 * std::pow(noise.fp_a / n, 1.0 / noise.fp_b);
            conf = std::clamp(conf, threshold, noise.threshold);
            out.detections.push_back(false_positive(rng, noise, conf));
        }
    }
    std::erase_if(out.detections, [&](const Detection& d) { return d.s < threshold; });
    if (policy == ScorePolicy::Adapted) {
        for (Detection& d : out.detections) d.s = std::max(d.s, 0.5);
    }
    return out;
}

}  // namespace partwise
