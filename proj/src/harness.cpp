#include "partwise/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "partwise/error.hpp"
#include "partwise/rng.hpp"
#include "strformat.hpp"

namespace partwise {

namespace {

using detail::strformat;

// Seed streams used by train_bundle and the evaluation protocols.
constexpr std::uint64_t kSpatialStream = 1;
constexpr std::uint64_t kSoftmaxStream = 2;
constexpr std::uint64_t kArticStream = 3;
constexpr std::uint64_t kTractorStream = 4;
constexpr std::uint64_t kFoldStream = 1000;
constexpr std::uint64_t kSweepStream = 5000;

/// A model that answers `label` everywhere; used when a training split has a single class.
SvmModel constant_svm(int label, const SvmParams& p) {
    return {{SvmInput::Zero()}, {0.0}, static_cast<double>(label), p.gamma, p.C};
}

SvmModel fit_sub_feature(const SvmTrainingSet& set, SvmParams params, std::uint64_t seed) {
    const bool has_pos = std::find(set.labels.begin(), set.labels.end(), 1) != set.labels.end();
    const bool has_neg = std::find(set.labels.begin(), set.labels.end(), -1) != set.labels.end();
    if (!has_pos || !has_neg) return constant_svm(has_pos ? 1 : -1, params);
    params.seed = seed;
    return train_svm(set.points, set.labels, params).model;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation over sqrt(count); zero below two values.
double std_error_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (const double x : v) ss += (x - m) * (x - m);
    const double n = static_cast<double>(v.size());
    return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

Json svm_params_to_json(const SvmParams& p) {
    return {{"C", p.C}, {"gamma", p.gamma}, {"oversample_minority", p.oversample_minority}, {"tol", p.tol}};
}

SvmParams svm_params_from_json(const Json& j, SvmParams p) {
    p.C = j.value("C", p.C);
    p.gamma = j.value("gamma", p.gamma);
    p.oversample_minority = j.value("oversample_minority", p.oversample_minority);
    p.tol = j.value("tol", p.tol);
    if (!(p.C > 0.0) || !(p.gamma > 0.0) || !(p.tol > 0.0)) throw ValidationError("SVM parameters must be positive");
    return p;
}

void train_components_for(Pipeline p, TrainComponents& what) {
    what.tree = p == Pipeline::Tree;
    what.softmax = p == Pipeline::Softmax;
}

}  // namespace

std::string_view pipeline_name(Pipeline p) noexcept { return p == Pipeline::Tree ? "tree" : "softmax"; }

Pipeline parse_pipeline(std::string_view s) {
    if (s == "tree") return Pipeline::Tree;
    if (s == "softmax") return Pipeline::Softmax;
    throw ValidationError("unknown pipeline '" + std::string(s) + "' (expected tree or softmax)");
}

Json pipeline_config_to_json(const PipelineConfig& cfg) {
    return {{"spatial",
             {{"max_modes", cfg.spatial.max_modes},
              {"min_fit_points", cfg.spatial.min_fit_points},
              {"var_floor", cfg.spatial.gmm.var_floor},
              {"tol", cfg.spatial.gmm.tol},
              {"max_iterations", cfg.spatial.gmm.max_iterations}}},
            {"softmax", train_config_to_json(cfg.softmax)},
            {"tree", tree_feature_config_to_json(cfg.tree)},
            {"artic_svm", svm_params_to_json(cfg.artic_svm)},
            {"tractor_svm", svm_params_to_json(cfg.tractor_svm)}};
}

PipelineConfig pipeline_config_from_json(const Json& j) {
    if (!j.is_object()) throw SchemaError("pipeline config must be an object");
    PipelineConfig cfg;
    try {
        if (j.contains("spatial")) {
            const Json& s = j.at("spatial");
            cfg.spatial.max_modes = s.value("max_modes", cfg.spatial.max_modes);
            cfg.spatial.min_fit_points = s.value("min_fit_points", cfg.spatial.min_fit_points);
            cfg.spatial.gmm.var_floor = s.value("var_floor", cfg.spatial.gmm.var_floor);
            cfg.spatial.gmm.tol = s.value("tol", cfg.spatial.gmm.tol);
            cfg.spatial.gmm.max_iterations = s.value("max_iterations", cfg.spatial.gmm.max_iterations);
            if (cfg.spatial.max_modes < 1 || cfg.spatial.min_fit_points < 1 || !(cfg.spatial.gmm.var_floor > 0.0) ||
                !(cfg.spatial.gmm.tol > 0.0) || cfg.spatial.gmm.max_iterations < 1) {
                throw ValidationError("spatial config values must be positive");
            }
        }
        if (j.contains("softmax")) cfg.softmax = train_config_from_json(j.at("softmax"));
        if (j.contains("tree")) cfg.tree = tree_feature_config_from_json(j.at("tree"));
        if (j.contains("artic_svm")) cfg.artic_svm = svm_params_from_json(j.at("artic_svm"), cfg.artic_svm);
        if (j.contains("tractor_svm")) cfg.tractor_svm = svm_params_from_json(j.at("tractor_svm"), cfg.tractor_svm);
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("malformed pipeline config: ") + e.what());
    }
    return cfg;
}

bool is_articulated(VehicleCategory c) noexcept {
    switch (c) {
        case VehicleCategory::ArticTruck:
        case VehicleCategory::ArticTruckDumptor:
        case VehicleCategory::ArticTruckLowLoaded:
        case VehicleCategory::ArticTruckTanker:
        case VehicleCategory::ArticVan: return true;
        default: return false;
    }
}

void ModelBundle::require(Pipeline p) const {
    const auto missing = [&](const char* what) {
        throw ModelError(std::string("model bundle has no ") + what + ", which the " + std::string(pipeline_name(p)) +
                         " pipeline needs");
    };
    if (p == Pipeline::Softmax) {
        if (!spatial) missing("spatial model");
        if (!softmax) missing("softmax model");
    } else {
        if (!artic_svm) missing("artic SVM");
        if (!tractor_svm) missing("tractor SVM");
        if (!tree) missing("tree spec");
    }
}

SvmTrainingSet artic_training_set(const Dataset& train, const TreeFeatureConfig& cfg) {
    SvmTrainingSet set;
    for (const Scene& raw : train.scenes) {
        const Scene scene = normalize_facing(raw, cfg.facing);
        if (const auto m = artic_metrics(split_wheels(scene, cfg.on_road_tol), cfg)) {
            set.points.push_back(*m);
            set.labels.push_back(is_articulated(*scene.label) ? 1 : -1);
        }
    }
    return set;
}

SvmTrainingSet tractor_training_set(const Dataset& train, const TreeFeatureConfig& cfg) {
    SvmTrainingSet set;
    for (const Scene& raw : train.scenes) {
        const Scene scene = normalize_facing(raw, cfg.facing);
        if (const auto m = tractor_metrics(scene, split_wheels(scene, cfg.on_road_tol), cfg)) {
            set.points.push_back(*m);
            set.labels.push_back(*scene.label == VehicleCategory::TractorTruck ? 1 : -1);
        }
    }
    return set;
}

ModelBundle train_bundle(const Dataset& train, const PipelineConfig& cfg, std::uint64_t seed, const TreeSpec& spec,
                         TrainComponents what) {
    if (train.scenes.empty()) throw TrainingError("cannot train on an empty dataset");
    ModelBundle b{train.catalog, {}, {}, {}, {}, {}, cfg.tree};
    if (what.softmax) {
        SpatialBuild sb = build_spatial_model(train, cfg.spatial, derive_seed(seed, kSpatialStream));
        std::vector<Sample> samples;
        samples.reserve(train.scenes.size());
        for (const Scene& s : train.scenes) samples.push_back({part_scores(sb.model, train.catalog, s), code(*s.label)});
        TrainConfig tc = cfg.softmax;
        tc.seed = derive_seed(seed, kSoftmaxStream) ^ cfg.softmax.seed;
        b.softmax = train_softmax(samples, tc, kNumCategories, train.catalog.hash()).model;
        b.spatial = std::move(sb.model);
    }
    if (what.tree) {
        b.artic_svm = fit_sub_feature(artic_training_set(train, cfg.tree), cfg.artic_svm, derive_seed(seed, kArticStream));
        b.tractor_svm =
            fit_sub_feature(tractor_training_set(train, cfg.tree), cfg.tractor_svm, derive_seed(seed, kTractorStream));
        b.tree = spec;
    }
    return b;
}

ClassifyResult classify_scene(const ModelBundle& bundle, const Scene& scene, Pipeline pipeline) {
    bundle.require(pipeline);
    if (!scene.rectified) throw ValidationError("scene '" + scene.id + "' must be rectified before classification");
    ClassifyResult r{VehicleCategory::Car, {}, {}, {}, {}};
    if (pipeline == Pipeline::Softmax) {
        r.part_scores = part_scores(*bundle.spatial, bundle.catalog, scene);
        r.softmax = predict_softmax(*bundle.softmax, r.part_scores, bundle.catalog.hash());
        r.category = category_from_code(r.softmax->category);
    } else {
        r.features = build_tree_features(scene, *bundle.artic_svm, *bundle.tractor_svm, bundle.tree_features);
        r.tree = classify_tree(*r.features, *bundle.tree);
        r.category = r.tree->category;
    }
    return r;
}

Json classify_result_to_json(const Scene& scene, const ClassifyResult& r) {
    Json j{{"id", scene.id}, {"category", name(r.category)}};
    if (scene.label) j["label"] = name(*scene.label);
    if (r.softmax) {
        Json probs = Json::object();
        for (Eigen::Index c = 0; c < r.softmax->probabilities.size(); ++c) {
            probs[std::string(name(category_from_code(static_cast<int>(c))))] = r.softmax->probabilities(c);
        }
        j["probabilities"] = std::move(probs);
    }
    if (r.tree) {
        j["leaf"] = r.tree->leaf;
        Json path = Json::array();
        for (const TreeStep& s : r.tree->path) path.push_back({{"node", s.node}, {"outcome", s.outcome}});
        j["path"] = std::move(path);
    }
    return j;
}

FoldSplit kfold_split(const Dataset& dataset, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("cross-validation needs k >= 2");
    if (dataset.scenes.empty()) throw ValidationError("cannot split an empty dataset");
    const auto uk = static_cast<std::size_t>(k);
    FoldSplit out;
    out.folds.resize(uk);
    std::array<std::vector<std::size_t>, kNumCategories> members;
    for (std::size_t i = 0; i < dataset.scenes.size(); ++i) {
        members[static_cast<std::size_t>(code(*dataset.scenes[i].label))].push_back(i);
    }
    // Round-robin within each category, continuing where the previous category
    // stopped so that fold sizes stay balanced.
    std::size_t offset = 0;
    for (std::size_t c = 0; c < members.size(); ++c) {
        auto& m = members[c];
        if (m.empty()) continue;
        if (m.size() < uk) {
            out.warnings.push_back("category '" + std::string(name(category_from_code(static_cast<int>(c)))) +
                                   "' has " + std::to_string(m.size()) + " samples, fewer than " + std::to_string(k) +
                                   " folds; some folds will not test it");
        }
        Rng rng(derive_seed(seed, c));
        rng.shuffle(m);
        for (std::size_t j = 0; j < m.size(); ++j) out.folds[(offset + j) % uk].test.push_back(m[j]);
        offset = (offset + m.size()) % uk;
    }
    for (Fold& f : out.folds) {
        std::sort(f.test.begin(), f.test.end());
        std::vector<bool> in_test(dataset.scenes.size(), false);
        for (const std::size_t i : f.test) in_test[i] = true;
        for (std::size_t i = 0; i < dataset.scenes.size(); ++i) {
            if (!in_test[i]) f.train.push_back(i);
        }
    }
    return out;
}

Dataset subset(const Dataset& dataset, std::span<const std::size_t> indices) {
    std::vector<Scene> scenes;
    scenes.reserve(indices.size());
    for (const std::size_t i : indices) scenes.push_back(dataset.scenes.at(i));
    return Dataset(std::move(scenes), dataset.catalog);
}

namespace {

ModelBundle train_fold(const Dataset& dataset, const Fold& fold, std::size_t f, const PipelineConfig& cfg,
                       std::uint64_t seed, const TreeSpec& spec, TrainComponents what) {
    try {
        return train_bundle(subset(dataset, fold.train), cfg, derive_seed(seed, kFoldStream + f), spec, what);
    } catch (const Error& e) {
        throw TrainingError("fold " + std::to_string(f) + ": " + e.what());
    }
}

struct FoldTally {
    std::array<int, kNumCategories> correct{};
    std::array<int, kNumCategories> total{};

    void add(VehicleCategory truth, VehicleCategory predicted) {
        ++total[static_cast<std::size_t>(code(truth))];
        if (truth == predicted) ++correct[static_cast<std::size_t>(code(truth))];
    }
    double accuracy() const {
        const int t = std::accumulate(total.begin(), total.end(), 0);
        return t == 0 ? 0.0 : static_cast<double>(std::accumulate(correct.begin(), correct.end(), 0)) / t;
    }
};

}  // namespace

EvalReport evaluate_pipeline(const Dataset& dataset, Pipeline pipeline, const PipelineConfig& cfg, std::uint64_t seed,
                             int k, const TreeSpec& spec) {
    const FoldSplit split = kfold_split(dataset, k, seed);
    EvalReport report;
    report.pipeline = pipeline;
    report.folds = k;
    report.warnings = split.warnings;
    TrainComponents what;
    train_components_for(pipeline, what);

    std::vector<FoldTally> tallies;
    for (std::size_t f = 0; f < split.folds.size(); ++f) {
        const Fold& fold = split.folds[f];
        const ModelBundle bundle = train_fold(dataset, fold, f, cfg, seed, spec, what);
        FoldTally tally;
        for (const std::size_t i : fold.test) {
            const Scene& s = dataset.scenes[i];
            const VehicleCategory predicted = classify_scene(bundle, s, pipeline).category;
            tally.add(*s.label, predicted);
            ++report.confusion(code(*s.label), code(predicted));
        }
        report.fold_accuracy.push_back(tally.accuracy());
        tallies.push_back(tally);
    }

    for (std::size_t c = 0; c < kNumCategories; ++c) {
        std::vector<double> accs;
        int samples = 0;
        for (const FoldTally& t : tallies) {
            samples += t.total[c];
            if (t.total[c] > 0) accs.push_back(static_cast<double>(t.correct[c]) / t.total[c]);
        }
        report.per_category[c] = {mean_of(accs), std_error_of(accs), samples};
    }
    report.overall_mean = mean_of(report.fold_accuracy);
    report.overall_std_error = std_error_of(report.fold_accuracy);
    report.pooled_accuracy = static_cast<double>(report.confusion.trace()) / static_cast<double>(report.confusion.sum());
    return report;
}

SweepReport robustness_sweep(const Dataset& dataset, std::span<const double> thresholds, const NoiseConfig& noise,
                             const PipelineConfig& cfg, std::uint64_t seed, int k, const TreeSpec& spec) {
    if (thresholds.empty()) throw ValidationError("robustness sweep needs at least one threshold");
    for (std::size_t r = 0; r < thresholds.size(); ++r) {
        if (!(thresholds[r] > 0.0 && thresholds[r] <= 1.0)) throw ValidationError("thresholds must lie in (0, 1]");
        if (r > 0 && !(thresholds[r] < thresholds[r - 1])) throw ValidationError("thresholds must be strictly decreasing");
    }
    const FoldSplit split = kfold_split(dataset, k, seed);
    const std::size_t rows = thresholds.size();
    std::vector<std::vector<double>> tree_acc(rows);
    std::vector<std::vector<double>> retained_acc(rows);
    std::vector<std::vector<double>> adapted_acc(rows);

    for (std::size_t f = 0; f < split.folds.size(); ++f) {
        const Fold& fold = split.folds[f];
        const ModelBundle bundle = train_fold(dataset, fold, f, cfg, seed, spec, {});
        for (std::size_t r = 0; r < rows; ++r) {
            FoldTally tree;
            FoldTally retained;
            FoldTally adapted;
            for (const std::size_t i : fold.test) {
                const Scene& s = dataset.scenes[i];
                const std::uint64_t cell = derive_seed(derive_seed(seed, kSweepStream + r), i);
                const Scene kept = emulate_threshold(s, thresholds[r], ScorePolicy::Retained, noise, cell);
                const Scene floored = emulate_threshold(s, thresholds[r], ScorePolicy::Adapted, noise, cell);
                tree.add(*s.label, classify_scene(bundle, kept, Pipeline::Tree).category);
                retained.add(*s.label, classify_scene(bundle, kept, Pipeline::Softmax).category);
                adapted.add(*s.label, classify_scene(bundle, floored, Pipeline::Softmax).category);
            }
            tree_acc[r].push_back(tree.accuracy());
            retained_acc[r].push_back(retained.accuracy());
            adapted_acc[r].push_back(adapted.accuracy());
        }
    }
    SweepReport report;
    for (std::size_t r = 0; r < rows; ++r) {
        report.rows.push_back({thresholds[r], mean_of(tree_acc[r]), mean_of(retained_acc[r]), mean_of(adapted_acc[r])});
    }
    return report;
}

Json bundle_to_json(const ModelBundle& b) {
    Json j{{"format", "partwise-model"},
           {"version", kBundleVersion},
           {"catalog_hash", b.catalog.hash()},
           {"catalog", catalog_to_json(b.catalog)},
           {"tree_features", tree_feature_config_to_json(b.tree_features)}};
    j["spatial"] = b.spatial ? spatial_model_to_json(*b.spatial) : Json(nullptr);
    j["softmax"] = b.softmax ? softmax_model_to_json(*b.softmax) : Json(nullptr);
    j["artic_svm"] = b.artic_svm ? svm_model_to_json(*b.artic_svm) : Json(nullptr);
    j["tractor_svm"] = b.tractor_svm ? svm_model_to_json(*b.tractor_svm) : Json(nullptr);
    j["tree"] = b.tree ? tree_spec_to_json(*b.tree) : Json(nullptr);
    return j;
}

ModelBundle bundle_from_json(const Json& j) {
    if (!j.is_object()) throw SchemaError("model file must be a JSON object");
    try {
        if (j.value("format", std::string()) != "partwise-model") throw SchemaError("not a partwise model file");
        const int version = j.at("version").get<int>();
        if (version != kBundleVersion) {
            throw ModelError("model file version " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(kBundleVersion) + ")");
        }
        ModelBundle b{catalog_from_json(j.at("catalog")), {}, {}, {}, {}, {}, {}};
        const std::string recorded = j.at("catalog_hash").get<std::string>();
        if (recorded != b.catalog.hash()) {
            throw ModelError("model file catalog hash " + recorded + " does not match its catalog (" + b.catalog.hash() + ")");
        }
        const auto present = [&](const char* key) { return j.contains(key) && !j.at(key).is_null(); };
        if (present("spatial")) {
            b.spatial = spatial_model_from_json(j.at("spatial"));
            if (b.spatial->catalog_hash != recorded) throw ModelError("spatial model was built for a different catalog");
        }
        if (present("softmax")) {
            b.softmax = softmax_model_from_json(j.at("softmax"));
            if (b.softmax->catalog_hash != recorded) throw ModelError("softmax model was trained for a different catalog");
            if (static_cast<std::size_t>(b.softmax->n_features()) != b.catalog.size() ||
                b.softmax->n_classes() != kNumCategories) {
                throw ModelError("softmax model shape does not match the catalog");
            }
        }
        if (present("artic_svm")) b.artic_svm = svm_model_from_json(j.at("artic_svm"));
        if (present("tractor_svm")) b.tractor_svm = svm_model_from_json(j.at("tractor_svm"));
        if (present("tree")) b.tree = tree_spec_from_json(j.at("tree"));
        if (j.contains("tree_features")) b.tree_features = tree_feature_config_from_json(j.at("tree_features"));
        return b;
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    }
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
    write_text_file(path, bundle_to_json(bundle).dump(1) + "\n");
}

ModelBundle load_bundle(const std::filesystem::path& path) { return bundle_from_json(read_json_file(path)); }

TableFormat parse_table_format(std::string_view s) {
    if (s == "text") return TableFormat::Text;
    if (s == "json") return TableFormat::Json;
    if (s == "csv") return TableFormat::Csv;
    throw ValidationError("unknown table format '" + std::string(s) + "' (expected text, json or csv)");
}

Json eval_report_to_json(const EvalReport& r) {
    Json cats = Json::array();
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        const CategoryAccuracy& a = r.per_category[c];
        cats.push_back({{"category", name(category_from_code(static_cast<int>(c)))},
                        {"mean", a.mean},
                        {"std_error", a.std_error},
                        {"samples", a.samples}});
    }
    Json confusion = Json::array();
    for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < r.confusion.cols(); ++c) row.push_back(r.confusion(i, c));
        confusion.push_back(std::move(row));
    }
    return {{"pipeline", pipeline_name(r.pipeline)},
            {"folds", r.folds},
            {"overall", {{"mean", r.overall_mean}, {"std_error", r.overall_std_error}, {"pooled", r.pooled_accuracy}}},
            {"fold_accuracy", r.fold_accuracy},
            {"per_category", std::move(cats)},
            {"confusion", std::move(confusion)},
            {"warnings", r.warnings}};
}

std::string render_eval_report(const EvalReport& r, TableFormat fmt) {
    if (fmt == TableFormat::Json) return eval_report_to_json(r).dump(2) + "\n";
    const int total = r.confusion.sum();
    if (fmt == TableFormat::Csv) {
        std::string out = "category,samples,mean,std_error\n";
        for (std::size_t c = 0; c < kNumCategories; ++c) {
            const CategoryAccuracy& a = r.per_category[c];
            out += strformat("%s,%d,%.6f,%.6f\n", std::string(name(category_from_code(static_cast<int>(c)))).c_str(),
                          a.samples, a.mean, a.std_error);
        }
        out += strformat("All,%d,%.6f,%.6f\n", total, r.overall_mean, r.overall_std_error);
        return out;
    }
    std::string out = strformat("%s pipeline, %d-fold cross-validation\n", std::string(pipeline_name(r.pipeline)).c_str(), r.folds);
    out += strformat("%-30s %7s %8s %8s\n", "Vehicle Category", "n", "mu", "sigma_mu");
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        const CategoryAccuracy& a = r.per_category[c];
        if (a.samples == 0) continue;
        out += strformat("%-30s %7d %8.3f %8.3f\n", std::string(name(category_from_code(static_cast<int>(c)))).c_str(),
                      a.samples, a.mean, a.std_error);
    }
    out += strformat("%-30s %7d %8.3f %8.3f\n", "All", total, r.overall_mean, r.overall_std_error);
    out += strformat("pooled accuracy %.4f\n", r.pooled_accuracy);
    for (const std::string& w : r.warnings) out += "warning: " + w + "\n";
    return out;
}

Json sweep_report_to_json(const SweepReport& r) {
    Json rows = Json::array();
    for (const SweepRow& row : r.rows) {
        rows.push_back({{"threshold", row.threshold},
                        {"tree", row.tree_accuracy},
                        {"softmax_retained", row.softmax_retained_accuracy},
                        {"softmax_adapted", row.softmax_adapted_accuracy}});
    }
    return {{"rows", std::move(rows)}};
}

std::string render_sweep_report(const SweepReport& r, TableFormat fmt) {
    if (fmt == TableFormat::Json) return sweep_report_to_json(r).dump(2) + "\n";
    if (fmt == TableFormat::Csv) {
        std::string out = "threshold,tree,softmax_retained,softmax_adapted\n";
        for (const SweepRow& row : r.rows) {
            out += strformat("%g,%.6f,%.6f,%.6f\n", row.threshold, row.tree_accuracy, row.softmax_retained_accuracy,
                          row.softmax_adapted_accuracy);
        }
        return out;
    }
    std::string out = strformat("%8s %15s %14s %13s\n", "Thr.", "Decision Tree", "Sc. retained", "Sc. adapted");
    for (const SweepRow& row : r.rows) {
        out += strformat("%8.3f %15.3f %14.3f %13.3f\n", row.threshold, row.tree_accuracy, row.softmax_retained_accuracy,
                      row.softmax_adapted_accuracy);
    }
    return out;
}

}  // namespace partwise
