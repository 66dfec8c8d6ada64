#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "partwise/core.hpp"

namespace partwise {

using Json = nlohmann::json;

/// Parses JSON text; syntax errors become ParseError carrying the 1-based line.
Json parse_json(std::string_view text);
/// Reads and parses a file. Missing files raise Error.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Detection files: a top-level array of scene records.
std::vector<Scene> scenes_from_json(const Json& j);
Json scenes_to_json(const std::vector<Scene>& scenes);
Scene scene_from_json(const Json& j);
Json scene_to_json(const Scene& scene);

std::vector<Scene> parse_scenes(std::string_view text);
std::vector<Scene> load_scenes(const std::filesystem::path& path);
std::string dump_scenes(const std::vector<Scene>& scenes);
void save_scenes(const std::filesystem::path& path, const std::vector<Scene>& scenes);

// Catalog override file: array of {"part", "category", "n_exp"}.
FeatureCatalog catalog_from_json(const Json& j);
Json catalog_to_json(const FeatureCatalog& catalog);
FeatureCatalog load_catalog(const std::filesystem::path& path);

PartClass part_from_json(const Json& j);
VehicleCategory category_from_json(const Json& j);
Json point_to_json(const Point2& p);
Point2 point_from_json(const Json& j, std::string_view what);

}  // namespace partwise
