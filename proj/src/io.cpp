#include "partwise/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "partwise/error.hpp"

namespace partwise {

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

double number_from_json(const Json& j, std::string_view what) {
    if (!j.is_number()) throw SchemaError(std::string(what) + " must be a number");
    return j.get<double>();
}

const Json& require(const Json& obj, const char* key, std::string_view where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(std::string(where) + ": missing field '" + key + "'");
    return *it;
}

Detection detection_from_json(const Json& j, bool rectified, std::string_view where) {
    if (!j.is_object()) throw SchemaError(std::string(where) + " must be an object");
    Detection d;
    d.part = part_from_json(require(j, "part", where));
    d.s = number_from_json(require(j, "s", where), std::string(where) + ".s");
    if (!(d.s >= 0.0 && d.s <= 1.0)) {
        throw ValidationError(std::string(where) + ": confidence " + std::to_string(d.s) + " outside [0,1]");
    }
    const auto bb = j.find("bbox");
    if (bb != j.end() && !bb->is_null()) {
        if (!bb->is_array() || bb->size() != 4) throw SchemaError(std::string(where) + ".bbox must be [f,f,f,f] or null");
        Box box{{number_from_json((*bb)[0], "bbox"), number_from_json((*bb)[1], "bbox")},
                {number_from_json((*bb)[2], "bbox"), number_from_json((*bb)[3], "bbox")}};
        d.bbox = box;
    }
    const auto x = j.find("x");
    if (x != j.end() && !x->is_null()) {
        d.x = point_from_json(*x, std::string(where) + ".x");
    } else if (d.bbox) {
        d.x = anchor_point(*d.bbox, d.part, rectified);
    } else {
        throw SchemaError(std::string(where) + ": needs 'x' or 'bbox'");
    }
    return d;
}

Json detection_to_json(const Detection& d) {
    Json j;
    j["part"] = std::string(name(d.part));
    j["x"] = point_to_json(d.x);
    j["s"] = d.s;
    if (d.bbox) {
        j["bbox"] = Json::array({d.bbox->min.x(), d.bbox->min.y(), d.bbox->max.x(), d.bbox->max.y()});
    } else {
        j["bbox"] = nullptr;
    }
    return j;
}

}  // namespace

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        const std::size_t line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("JSON parse error at line " + std::to_string(line) + ": " + e.what(), line);
    }
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json(buf.str());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

PartClass part_from_json(const Json& j) {
    if (!j.is_string()) throw SchemaError("part must be a string");
    const auto& s = j.get_ref<const std::string&>();
    const auto p = parse_part(s);
    if (!p) throw SchemaError("unknown part name \"" + s + "\"");
    return *p;
}

VehicleCategory category_from_json(const Json& j) {
    if (!j.is_string()) throw SchemaError("category must be a string");
    const auto& s = j.get_ref<const std::string&>();
    const auto c = parse_category(s);
    if (!c) throw SchemaError("unknown vehicle category \"" + s + "\"");
    return *c;
}

Json point_to_json(const Point2& p) { return Json::array({p.x(), p.y()}); }

Point2 point_from_json(const Json& j, std::string_view what) {
    if (!j.is_array() || j.size() != 2) throw SchemaError(std::string(what) + " must be [f,f]");
    return {number_from_json(j[0], what), number_from_json(j[1], what)};
}

Scene scene_from_json(const Json& j) {
    if (!j.is_object()) throw SchemaError("scene record must be an object");
    Scene scene;
    const Json& id = require(j, "id", "scene");
    if (!id.is_string()) throw SchemaError("scene.id must be a string");
    scene.id = id.get<std::string>();
    const std::string where = "scene '" + scene.id + "'";
    if (const auto r = j.find("rectified"); r != j.end() && !r->is_null()) {
        if (!r->is_boolean()) throw SchemaError(where + ".rectified must be a boolean");
        scene.rectified = r->get<bool>();
    }
    if (const auto l = j.find("label"); l != j.end() && !l->is_null()) scene.label = category_from_json(*l);
    if (const auto c = j.find("camera"); c != j.end() && !c->is_null()) {
        if (!c->is_string()) throw SchemaError(where + ".camera must be a string");
        scene.camera = c->get<std::string>();
    }
    const Json& dets = require(j, "detections", where);
    if (!dets.is_array()) throw SchemaError(where + ".detections must be an array");
    scene.detections.reserve(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
        scene.detections.push_back(
            detection_from_json(dets[i], scene.rectified, where + " detection " + std::to_string(i)));
    }
    return scene;
}

Json scene_to_json(const Scene& scene) {
    Json j;
    j["id"] = scene.id;
    j["label"] = scene.label ? Json(std::string(name(*scene.label))) : Json(nullptr);
    if (scene.rectified) j["rectified"] = true;
    if (scene.camera) j["camera"] = *scene.camera;
    Json dets = Json::array();
    for (const Detection& d : scene.detections) dets.push_back(detection_to_json(d));
    j["detections"] = std::move(dets);
    return j;
}

std::vector<Scene> scenes_from_json(const Json& j) {
    if (!j.is_array()) throw SchemaError("detection file must be a top-level array of scenes");
    std::vector<Scene> out;
    out.reserve(j.size());
    for (const Json& s : j) out.push_back(scene_from_json(s));
    return out;
}

Json scenes_to_json(const std::vector<Scene>& scenes) {
    Json j = Json::array();
    for (const Scene& s : scenes) j.push_back(scene_to_json(s));
    return j;
}

std::vector<Scene> parse_scenes(std::string_view text) { return scenes_from_json(parse_json(text)); }

std::vector<Scene> load_scenes(const std::filesystem::path& path) { return scenes_from_json(read_json_file(path)); }

std::string dump_scenes(const std::vector<Scene>& scenes) { return scenes_to_json(scenes).dump(1); }

void save_scenes(const std::filesystem::path& path, const std::vector<Scene>& scenes) {
    write_text_file(path, dump_scenes(scenes));
}

FeatureCatalog catalog_from_json(const Json& j) {
    if (!j.is_array()) throw SchemaError("catalog must be an array of {part, category, n_exp}");
    std::vector<Feature> features;
    for (const Json& e : j) {
        if (!e.is_object()) throw SchemaError("catalog entry must be an object");
        const Json& n = require(e, "n_exp", "catalog entry");
        if (!n.is_number_integer()) throw SchemaError("catalog entry n_exp must be an integer");
        features.push_back({part_from_json(require(e, "part", "catalog entry")),
                            category_from_json(require(e, "category", "catalog entry")), n.get<int>()});
    }
    return FeatureCatalog(std::move(features));
}

Json catalog_to_json(const FeatureCatalog& catalog) {
    Json j = Json::array();
    for (const Feature& f : catalog.features()) {
        j.push_back({{"part", std::string(name(f.part))}, {"category", std::string(name(f.category))}, {"n_exp", f.n_exp}});
    }
    return j;
}

FeatureCatalog load_catalog(const std::filesystem::path& path) { return catalog_from_json(read_json_file(path)); }

}  // namespace partwise
