#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "partwise/core.hpp"
#include "partwise/io.hpp"
#include "partwise/softmax.hpp"
#include "partwise/spatial.hpp"
#include "partwise/svm.hpp"
#include "partwise/synth.hpp"
#include "partwise/tree.hpp"
#include "partwise/treefeat.hpp"

namespace partwise {

enum class Pipeline { Tree, Softmax };

std::string_view pipeline_name(Pipeline p) noexcept;
/// Accepts "tree" and "softmax"; throws ValidationError otherwise.
Pipeline parse_pipeline(std::string_view s);

struct PipelineConfig {
    SpatialFitOptions spatial;
    TrainConfig softmax;
    TreeFeatureConfig tree;
    SvmParams artic_svm{.C = 0.1, .gamma = 72.0, .oversample_minority = false};
    SvmParams tractor_svm{.C = 5.2, .gamma = 37.3, .oversample_minority = true};
};

Json pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const Json& j);

/// Categories whose vehicles are articulated (positive class of the artic SVM).
bool is_articulated(VehicleCategory c) noexcept;

/// Everything needed to classify scenes. Components are optional so a bundle
/// can carry one pipeline only.
struct ModelBundle {
    FeatureCatalog catalog;
    std::optional<SpatialModel> spatial;
    std::optional<SoftmaxModel> softmax;
    std::optional<SvmModel> artic_svm;
    std::optional<SvmModel> tractor_svm;
    std::optional<TreeSpec> tree;
    TreeFeatureConfig tree_features;

    /// Throws ModelError naming the first component `p` needs but lacks.
    void require(Pipeline p) const;
    bool operator==(const ModelBundle&) const = default;
};

struct TrainComponents {
    bool tree = true;
    bool softmax = true;
};

/// Trains the requested components on `train` only. Seeds for each component
/// are derived from `seed`.
ModelBundle train_bundle(const Dataset& train, const PipelineConfig& cfg, std::uint64_t seed,
                         const TreeSpec& spec = default_tree_spec(), TrainComponents what = {});

/// Metric vectors and labels the sub-feature SVMs are trained on.
struct SvmTrainingSet {
    std::vector<SvmInput> points;
    std::vector<int> labels;
};
SvmTrainingSet artic_training_set(const Dataset& train, const TreeFeatureConfig& cfg);
SvmTrainingSet tractor_training_set(const Dataset& train, const TreeFeatureConfig& cfg);

struct ClassifyResult {
    VehicleCategory category;
    std::optional<SoftmaxPrediction> softmax;
    std::optional<TreeDecision> tree;
    Eigen::VectorXd part_scores;            // softmax pipeline only
    std::optional<TreeFeatures> features;   // tree pipeline only
};

/// The scene must be rectified.
ClassifyResult classify_scene(const ModelBundle& bundle, const Scene& scene, Pipeline pipeline);

Json classify_result_to_json(const Scene& scene, const ClassifyResult& result);

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct FoldSplit {
    std::vector<Fold> folds;
    std::vector<std::string> warnings;
};

/// Stratified k-fold split. Categories with fewer than k samples are warned
/// about and spread as evenly as possible.
FoldSplit kfold_split(const Dataset& dataset, int k, std::uint64_t seed);

Dataset subset(const Dataset& dataset, std::span<const std::size_t> indices);

struct CategoryAccuracy {
    double mean = 0.0;
    double std_error = 0.0;
    int samples = 0;
};

struct EvalReport {
    Pipeline pipeline = Pipeline::Softmax;
    int folds = 0;
    std::array<CategoryAccuracy, kNumCategories> per_category{};
    double overall_mean = 0.0;
    double overall_std_error = 0.0;
    /// Diagonal of the confusion matrix over its total.
    double pooled_accuracy = 0.0;
    std::vector<double> fold_accuracy;
    /// confusion(true, predicted), summed over folds.
    Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(kNumCategories, kNumCategories);
    std::vector<std::string> warnings;

    bool operator==(const EvalReport& o) const {
        return pipeline == o.pipeline && folds == o.folds && overall_mean == o.overall_mean &&
               overall_std_error == o.overall_std_error && pooled_accuracy == o.pooled_accuracy &&
               fold_accuracy == o.fold_accuracy && confusion == o.confusion;
    }
};

EvalReport evaluate_pipeline(const Dataset& dataset, Pipeline pipeline, const PipelineConfig& cfg, std::uint64_t seed,
                             int k = 5, const TreeSpec& spec = default_tree_spec());

struct SweepRow {
    double threshold;
    double tree_accuracy;
    double softmax_retained_accuracy;
    double softmax_adapted_accuracy;

    bool operator==(const SweepRow&) const = default;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    bool operator==(const SweepReport&) const = default;
};

/// Models are trained once per fold on untouched training scenes. Each test
/// scene is re-thresholded per row; the retained and adapted arms share the
/// same injected false positives. Accuracies are means over folds.
SweepReport robustness_sweep(const Dataset& dataset, std::span<const double> thresholds, const NoiseConfig& noise,
                             const PipelineConfig& cfg, std::uint64_t seed, int k = 5,
                             const TreeSpec& spec = default_tree_spec());

// ---------------------------------------------------------------------------
// Persistence and reports
// ---------------------------------------------------------------------------

inline constexpr int kBundleVersion = 1;

Json bundle_to_json(const ModelBundle& bundle);
/// Checks the version and that every member's catalog hash matches the catalog.
ModelBundle bundle_from_json(const Json& j);
void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

enum class TableFormat { Text, Json, Csv };
TableFormat parse_table_format(std::string_view s);

Json eval_report_to_json(const EvalReport& report);
std::string render_eval_report(const EvalReport& report, TableFormat format);
Json sweep_report_to_json(const SweepReport& report);
std::string render_sweep_report(const SweepReport& report, TableFormat format);

}  // namespace partwise
