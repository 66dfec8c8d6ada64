// Command-line front end: synth | train | classify | explain | evaluate | sweep.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "partwise/error.hpp"
#include "partwise/explain.hpp"
#include "partwise/geometry.hpp"
#include "partwise/harness.hpp"
#include "partwise/io.hpp"
#include "partwise/synth.hpp"

namespace pw = partwise;

namespace {

constexpr int kAssertionFailed = 2;
constexpr int kUsageError = 64;

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        pw::write_text_file(out_path, text);
    }
}

std::vector<pw::Scene> rectified_scenes(const std::string& path, const std::string& calib_path) {
    std::vector<pw::Scene> scenes = pw::load_scenes(path);
    std::optional<pw::Calibration> calib;
    if (!calib_path.empty()) calib = pw::load_calibration(calib_path);
    for (pw::Scene& s : scenes) {
        if (s.rectified) continue;
        if (!calib) throw pw::ValidationError("scene '" + s.id + "' is not rectified; pass --calib");
        s = pw::rectify_scene(calib->for_scene(s), s);
    }
    return scenes;
}

pw::FeatureCatalog catalog_or_default(const std::string& path) {
    return path.empty() ? pw::default_catalog() : pw::load_catalog(path);
}

pw::PipelineConfig config_or_default(const std::string& path) {
    return path.empty() ? pw::PipelineConfig{} : pw::pipeline_config_from_json(pw::read_json_file(path));
}

pw::TreeSpec tree_or_default(const std::string& path) {
    return path.empty() ? pw::default_tree_spec() : pw::load_tree_spec(path);
}

pw::NoiseConfig noise_or_default(const std::string& path) {
    return path.empty() ? pw::NoiseConfig{} : pw::noise_config_from_json(pw::read_json_file(path));
}

std::vector<pw::Pipeline> pipelines_for(const std::string& which) {
    if (which == "both") return {pw::Pipeline::Tree, pw::Pipeline::Softmax};
    return {pw::parse_pipeline(which)};
}

struct Common {
    std::string scenes;
    std::string calib;
    std::string config;
    std::string tree;
    std::string catalog;
    std::string out;
    std::uint64_t seed = 0;
};

void add_dataset_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--scenes", c.scenes, "Detection file (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--calib", c.calib, "Calibration sidecar for unrectified scenes")->check(CLI::ExistingFile);
    cmd->add_option("--catalog", c.catalog, "Feature catalog override")->check(CLI::ExistingFile);
}

void add_training_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Pipeline configuration (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--tree", c.tree, "Decision tree spec (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Random seed")->required();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Part-based vehicle classification: synthesis, training, evaluation and explanation"};
    app.require_subcommand(1);
    Common c;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic detection file");
    std::string mix_path;
    std::string noise_path;
    std::string templates_path;
    int count = 0;
    bool clean = false;
    synth->add_option("--mix", mix_path, "JSON object: category name -> scene count")->check(CLI::ExistingFile);
    synth->add_option("--count", count, "Total scenes, split in reference proportions (when --mix is absent)");
    synth->add_option("--noise", noise_path, "Noise config (JSON)")->check(CLI::ExistingFile);
    synth->add_flag("--clean", clean, "Zero noise: no jitter, dropout or false positives");
    synth->add_option("--templates", templates_path, "Layout templates (JSON)")->check(CLI::ExistingFile);
    synth->add_option("--seed", c.seed, "Random seed")->required();
    synth->add_option("--out", c.out, "Output file ('-' for stdout)")->required();

    // train
    auto* train = app.add_subcommand("train", "Train a model bundle on labeled scenes");
    std::string train_pipeline = "both";
    add_dataset_options(train, c);
    add_training_options(train, c);
    train->add_option("--pipeline", train_pipeline, "tree, softmax or both")
        ->check(CLI::IsMember({"tree", "softmax", "both"}));
    train->add_option("--out", c.out, "Model file to write")->required();

    // classify
    auto* classify = app.add_subcommand("classify", "Classify scenes with a trained bundle");
    std::string model_path;
    std::string pipeline = "softmax";
    classify->add_option("--model", model_path, "Model bundle")->required()->check(CLI::ExistingFile);
    classify->add_option("--scenes", c.scenes, "Detection file")->required()->check(CLI::ExistingFile);
    classify->add_option("--calib", c.calib, "Calibration sidecar")->check(CLI::ExistingFile);
    classify->add_option("--pipeline", pipeline, "tree or softmax")->check(CLI::IsMember({"tree", "softmax"}));
    classify->add_option("--out", c.out, "Output file (default stdout)");

    // explain
    auto* explain = app.add_subcommand("explain", "Explain the prediction for one scene");
    std::string scene_id;
    std::string category_name;
    std::string format = "text";
    explain->add_option("--model", model_path, "Model bundle")->required()->check(CLI::ExistingFile);
    explain->add_option("--scene", c.scenes, "Detection file")->required()->check(CLI::ExistingFile);
    explain->add_option("--id", scene_id, "Scene id within the file (default: first)");
    explain->add_option("--category", category_name, "Category to explain (default: predicted)");
    explain->add_option("--pipeline", pipeline, "softmax (contributions) or tree (decision path)")
        ->check(CLI::IsMember({"tree", "softmax"}));
    explain->add_option("--format", format, "text, json or svg")->check(CLI::IsMember({"text", "json", "svg"}));
    explain->add_option("--calib", c.calib, "Calibration sidecar")->check(CLI::ExistingFile);
    explain->add_option("--out", c.out, "Output file (default stdout)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
    std::string eval_pipeline = "both";
    std::string table_format = "text";
    int folds = 5;
    std::optional<double> assert_min_accuracy;
    add_dataset_options(evaluate, c);
    add_training_options(evaluate, c);
    evaluate->add_option("--pipeline", eval_pipeline, "tree, softmax or both")
        ->check(CLI::IsMember({"tree", "softmax", "both"}));
    evaluate->add_option("--folds", folds, "Number of folds")->check(CLI::Range(2, 1000));
    evaluate->add_option("--format", table_format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    evaluate->add_option("--out", c.out, "Output file (default stdout)");
    evaluate->add_option("--assert-min-accuracy", assert_min_accuracy, "Exit nonzero if overall mean accuracy is lower");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Robustness sweep over detection thresholds");
    std::vector<double> thresholds{0.5, 0.1, 0.01, 0.001};
    std::optional<double> assert_retained_spread;
    std::optional<double> assert_tree_drop;
    std::optional<double> assert_adapted_drop;
    add_dataset_options(sweep, c);
    add_training_options(sweep, c);
    sweep->add_option("--noise", noise_path, "Noise config driving the injected false positives")->check(CLI::ExistingFile);
    sweep->add_option("--thresholds", thresholds, "Strictly decreasing thresholds")->delimiter(',');
    sweep->add_option("--folds", folds, "Number of folds")->check(CLI::Range(2, 1000));
    sweep->add_option("--format", table_format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    sweep->add_option("--out", c.out, "Output file (default stdout)");
    sweep->add_option("--assert-max-retained-spread", assert_retained_spread,
                      "Max allowed spread of softmax-retained accuracy across rows");
    sweep->add_option("--assert-min-tree-drop", assert_tree_drop, "Min required tree accuracy drop, first to last row");
    sweep->add_option("--assert-max-adapted-drop", assert_adapted_drop,
                      "Max allowed softmax-adapted accuracy drop, first to last row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUsageError;
    }

    try {
        if (*synth) {
            const pw::TemplateLibrary lib = templates_path.empty() ? pw::default_templates() : pw::load_templates(templates_path);
            pw::NoiseConfig noise = noise_or_default(noise_path);
            if (clean) noise = pw::NoiseConfig::clean();
            pw::CategoryMix mix;
            if (!mix_path.empty()) {
                mix = pw::category_mix_from_json(pw::read_json_file(mix_path));
            } else if (count > 0) {
                mix = pw::default_mix(count);
            } else {
                throw pw::ValidationError("synth needs --mix or a positive --count");
            }
            const pw::Dataset data = pw::generate_dataset(mix, lib, noise, c.seed);
            emit(c.out, pw::dump_scenes(data.scenes));
            return 0;
        }

        if (*train) {
            pw::Dataset data(rectified_scenes(c.scenes, c.calib), catalog_or_default(c.catalog));
            pw::TrainComponents what{train_pipeline != "softmax", train_pipeline != "tree"};
            const pw::ModelBundle bundle =
                pw::train_bundle(data, config_or_default(c.config), c.seed, tree_or_default(c.tree), what);
            pw::save_bundle(c.out, bundle);
            return 0;
        }

        if (*classify) {
            const pw::ModelBundle bundle = pw::load_bundle(model_path);
            const pw::Pipeline p = pw::parse_pipeline(pipeline);
            pw::Json results = pw::Json::array();
            int labeled = 0;
            int correct = 0;
            for (const pw::Scene& s : rectified_scenes(c.scenes, c.calib)) {
                const pw::ClassifyResult r = pw::classify_scene(bundle, s, p);
                results.push_back(pw::classify_result_to_json(s, r));
                if (s.label) {
                    ++labeled;
                    correct += *s.label == r.category ? 1 : 0;
                }
            }
            emit(c.out, results.dump(1) + "\n");
            if (labeled > 0) {
                std::fprintf(stderr, "accuracy %.4f on %d labeled scenes\n", static_cast<double>(correct) / labeled, labeled);
            }
            return 0;
        }

        if (*explain) {
            const pw::ModelBundle bundle = pw::load_bundle(model_path);
            const std::vector<pw::Scene> scenes = rectified_scenes(c.scenes, c.calib);
            const pw::Scene* scene = nullptr;
            for (const pw::Scene& s : scenes) {
                if (scene_id.empty() || s.id == scene_id) {
                    scene = &s;
                    break;
                }
            }
            if (!scene) throw pw::LookupError(scene_id.empty() ? "detection file has no scenes" : "no scene with id '" + scene_id + "'");
            const pw::ReportFormat fmt = pw::parse_report_format(format);
            const pw::Pipeline p = pw::parse_pipeline(pipeline);
            const pw::ClassifyResult r = pw::classify_scene(bundle, *scene, p);
            if (p == pw::Pipeline::Tree) {
                emit(c.out, pw::render_tree_decision(*r.tree, fmt));
                return 0;
            }
            std::optional<pw::VehicleCategory> category;
            if (!category_name.empty()) {
                category = pw::parse_category(category_name);
                if (!category) throw pw::SchemaError("unknown category name \"" + category_name + "\"");
            }
            const pw::ContributionReport report = pw::explain_softmax(*bundle.softmax, bundle.catalog, r.part_scores, category);
            emit(c.out, pw::render_report(report, fmt));
            return 0;
        }

        if (*evaluate) {
            pw::Dataset data(rectified_scenes(c.scenes, c.calib), catalog_or_default(c.catalog));
            const pw::PipelineConfig cfg = config_or_default(c.config);
            const pw::TreeSpec spec = tree_or_default(c.tree);
            const pw::TableFormat fmt = pw::parse_table_format(table_format);
            std::string text;
            pw::Json all = pw::Json::array();
            bool failed = false;
            for (const pw::Pipeline p : pipelines_for(eval_pipeline)) {
                const pw::EvalReport report = pw::evaluate_pipeline(data, p, cfg, c.seed, folds, spec);
                if (fmt == pw::TableFormat::Json) {
                    all.push_back(pw::eval_report_to_json(report));
                } else {
                    text += pw::render_eval_report(report, fmt);
                }
                if (assert_min_accuracy && report.overall_mean < *assert_min_accuracy) {
                    std::fprintf(stderr, "assertion failed: %s accuracy %.4f < %.4f\n",
                                 std::string(pw::pipeline_name(p)).c_str(), report.overall_mean, *assert_min_accuracy);
                    failed = true;
                }
            }
            emit(c.out, fmt == pw::TableFormat::Json ? all.dump(2) + "\n" : text);
            return failed ? kAssertionFailed : 0;
        }

        if (*sweep) {
            pw::Dataset data(rectified_scenes(c.scenes, c.calib), catalog_or_default(c.catalog));
            const pw::SweepReport report = pw::robustness_sweep(data, thresholds, noise_or_default(noise_path),
                                                                config_or_default(c.config), c.seed, folds,
                                                                tree_or_default(c.tree));
            emit(c.out, pw::render_sweep_report(report, pw::parse_table_format(table_format)));
            const pw::SweepRow& first = report.rows.front();
            const pw::SweepRow& last = report.rows.back();
            double lo = first.softmax_retained_accuracy;
            double hi = lo;
            for (const pw::SweepRow& r : report.rows) {
                lo = std::min(lo, r.softmax_retained_accuracy);
                hi = std::max(hi, r.softmax_retained_accuracy);
            }
            bool failed = false;
            const auto check = [&](bool ok, const char* what, double value, double limit) {
                if (ok) return;
                std::fprintf(stderr, "assertion failed: %s %.4f (limit %.4f)\n", what, value, limit);
                failed = true;
            };
            if (assert_retained_spread) {
                check(hi - lo <= *assert_retained_spread, "retained spread", hi - lo, *assert_retained_spread);
            }
            if (assert_tree_drop) {
                const double drop = first.tree_accuracy - last.tree_accuracy;
                check(drop >= *assert_tree_drop, "tree drop", drop, *assert_tree_drop);
            }
            if (assert_adapted_drop) {
                const double drop = first.softmax_adapted_accuracy - last.softmax_adapted_accuracy;
                check(drop <= *assert_adapted_drop, "adapted drop", drop, *assert_adapted_drop);
            }
            return failed ? kAssertionFailed : 0;
        }
    } catch (const pw::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
