#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "partwise/core.hpp"
#include "partwise/io.hpp"
#include "partwise/softmax.hpp"
#include "partwise/tree.hpp"

namespace partwise {

struct Contribution {
    int k;
    PartClass part;
    VehicleCategory feature_category;
    double score;    // P_k
    double weight;   // W[c][k]
    double product;  // weight * score

    bool operator==(const Contribution&) const = default;
};

/// Additive decomposition of one class logit: logit = bias + sum of products.
struct ContributionReport {
    VehicleCategory category;
    std::vector<Contribution> contributions;  // sorted by |product| descending, then k
    double bias = 0.0;
    double logit = 0.0;
    double probability = 0.0;

    bool operator==(const ContributionReport&) const = default;
};

/// Explains class `category` (default: the predicted class). Every feature
/// with a nonzero score is listed. Throws ModelError on a catalog mismatch.
ContributionReport explain_softmax(const SoftmaxModel& model, const FeatureCatalog& catalog, const Eigen::VectorXd& scores,
                                   std::optional<VehicleCategory> category = std::nullopt);

enum class ReportFormat { Text, Json, Svg };

/// Throws ValidationError for names other than text, json, svg.
ReportFormat parse_report_format(std::string_view s);

Json report_to_json(const ContributionReport& report);
ContributionReport report_from_json(const Json& j);
std::string render_report(const ContributionReport& report, ReportFormat format);

Json tree_decision_to_json(const TreeDecision& decision);
/// Text lists each visited node and its outcome; svg is not offered for paths.
std::string render_tree_decision(const TreeDecision& decision, ReportFormat format);

}  // namespace partwise
