#include "partwise/explain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "partwise/error.hpp"
#include "strformat.hpp"

namespace partwise {

namespace {

using detail::strformat;

std::string feature_label(const Contribution& c) {
    return std::string(name(c.part)) + " @ " + std::string(name(c.feature_category));
}

std::string render_text(const ContributionReport& r) {
    std::string out = strformat("category %s  logit %.6f  probability %.6f\n", std::string(name(r.category)).c_str(), r.logit,
                             r.probability);
    out += strformat("%4s  %-52s %10s %10s %11s\n", "k", "feature", "P_k", "weight", "w*P");
    for (const Contribution& c : r.contributions) {
        out += strformat("%4d  %-52s %10.6f %10.6f %+11.6f\n", c.k, feature_label(c).c_str(), c.score, c.weight, c.product);
    }
    out += strformat("%4s  %-52s %10s %10s %+11.6f\n", "", "bias", "", "", r.bias);
    return out;
}

std::string render_svg(const ContributionReport& r) {
    constexpr double kRow = 20.0;
    constexpr double kLabelWidth = 340.0;
    constexpr double kHalfBar = 180.0;
    constexpr double kTop = 40.0;
    const double axis = kLabelWidth + kHalfBar + 20.0;
    double scale = std::abs(r.bias);
    for (const Contribution& c : r.contributions) scale = std::max(scale, std::abs(c.product));
    if (scale <= 0.0) scale = 1.0;
    const double height = kTop + kRow * static_cast<double>(r.contributions.size() + 1) + 20.0;
    const double width = axis + kHalfBar + 120.0;

    std::string out = strformat(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"monospace\" "
        "font-size=\"12\">\n",
        width, height);
    out += "<style>.pos{fill:#d62728}.neg{fill:#1f77b4}.axis{stroke:#333}</style>\n";
    out += strformat("<text x=\"10\" y=\"20\">%s: logit %.4f, probability %.4f</text>\n",
                  std::string(name(r.category)).c_str(), r.logit, r.probability);
    double y = kTop;
    for (const Contribution& c : r.contributions) {
        const double len = kHalfBar * std::abs(c.product) / scale;
        const double x = c.product >= 0.0 ? axis : axis - len;
        out += strformat("<text x=\"10\" y=\"%.1f\">k=%d %s</text>\n", y + 14.0, c.k, feature_label(c).c_str());
        out += strformat("<rect class=\"bar %s\" x=\"%.2f\" y=\"%.1f\" width=\"%.2f\" height=\"%.1f\"/>\n",
                      c.product >= 0.0 ? "pos" : "neg", x, y + 3.0, len, kRow - 6.0);
        out += strformat("<text x=\"%.1f\" y=\"%.1f\">%+.4f</text>\n", axis + kHalfBar + 10.0, y + 14.0, c.product);
        y += kRow;
    }
    out += strformat("<text x=\"10\" y=\"%.1f\">bias</text>\n", y + 14.0);
    out += strformat("<text x=\"%.1f\" y=\"%.1f\">%+.4f</text>\n", axis + kHalfBar + 10.0, y + 14.0, r.bias);
    out += strformat("<line class=\"axis\" x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\"/>\n", axis, kTop, axis, y + kRow);
    out += "</svg>\n";
    return out;
}

}  // namespace

ContributionReport explain_softmax(const SoftmaxModel& model, const FeatureCatalog& catalog, const Eigen::VectorXd& scores,
                                   std::optional<VehicleCategory> category) {
    if (model.catalog_hash != catalog.hash()) {
        throw ModelError("softmax model catalog hash " + model.catalog_hash + " does not match " + catalog.hash());
    }
    if (static_cast<std::size_t>(scores.size()) != catalog.size()) {
        throw ArityError("explain_softmax: score vector length differs from the catalog size");
    }
    const SoftmaxPrediction pred = predict_softmax(model, scores);
    const int c = category ? code(*category) : pred.category;
    if (c < 0 || c >= model.n_classes()) throw ArityError("explain_softmax: category outside the model");

    ContributionReport r;
    r.category = category_from_code(c);
    r.bias = model.b(c);
    r.logit = pred.logits(c);
    r.probability = pred.probabilities(c);
    for (Eigen::Index k = 0; k < scores.size(); ++k) {
        const double p = scores(k);
        const double w = model.W(c, k);
        if (p == 0.0) continue;
        const Feature& f = catalog[static_cast<std::size_t>(k)];
        r.contributions.push_back({static_cast<int>(k), f.part, f.category, p, w, w * p});
    }
    std::stable_sort(r.contributions.begin(), r.contributions.end(),
                     [](const Contribution& a, const Contribution& b) { return std::abs(a.product) > std::abs(b.product); });
    return r;
}

ReportFormat parse_report_format(std::string_view s) {
    if (s == "text") return ReportFormat::Text;
    if (s == "json") return ReportFormat::Json;
    if (s == "svg") return ReportFormat::Svg;
    throw ValidationError("unknown report format '" + std::string(s) + "' (expected text, json or svg)");
}

Json report_to_json(const ContributionReport& r) {
    Json list = Json::array();
    for (const Contribution& c : r.contributions) {
        list.push_back({{"k", c.k},
                        {"part", name(c.part)},
                        {"feature_category", name(c.feature_category)},
                        {"score", c.score},
                        {"weight", c.weight},
                        {"product", c.product}});
    }
    return {{"category", name(r.category)},
            {"bias", r.bias},
            {"logit", r.logit},
            {"probability", r.probability},
            {"contributions", std::move(list)}};
}

ContributionReport report_from_json(const Json& j) {
    try {
        ContributionReport r;
        r.category = category_from_json(j.at("category"));
        r.bias = j.at("bias").get<double>();
        r.logit = j.at("logit").get<double>();
        r.probability = j.at("probability").get<double>();
        for (const Json& c : j.at("contributions")) {
            r.contributions.push_back({c.at("k").get<int>(), part_from_json(c.at("part")),
                                       category_from_json(c.at("feature_category")), c.at("score").get<double>(),
                                       c.at("weight").get<double>(), c.at("product").get<double>()});
        }
        return r;
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("malformed contribution report: ") + e.what());
    }
}

std::string render_report(const ContributionReport& report, ReportFormat fmt) {
    switch (fmt) {
        case ReportFormat::Text: return render_text(report);
        case ReportFormat::Json: return report_to_json(report).dump(2) + "\n";
        case ReportFormat::Svg: return render_svg(report);
    }
    throw ValidationError("unknown report format");
}

Json tree_decision_to_json(const TreeDecision& d) {
    Json path = Json::array();
    for (const TreeStep& s : d.path) {
        const bool unary = s.op == TreeOp::Present || s.op == TreeOp::Absent;
        path.push_back({{"node", s.node},
                        {"feat", s.feat},
                        {"op", op_name(s.op)},
                        {"value", unary ? Json(nullptr) : Json(s.value)},
                        {"observed", s.observed},
                        {"outcome", s.outcome}});
    }
    return {{"category", name(d.category)}, {"leaf", d.leaf}, {"path", std::move(path)}};
}

std::string render_tree_decision(const TreeDecision& d, ReportFormat fmt) {
    if (fmt == ReportFormat::Json) return tree_decision_to_json(d).dump(2) + "\n";
    if (fmt == ReportFormat::Svg) throw ValidationError("decision paths are rendered as text or json only");
    std::string out = strformat("category %s  (leaf %s)\n", std::string(name(d.category)).c_str(), d.leaf.c_str());
    for (const TreeStep& s : d.path) {
        const bool unary = s.op == TreeOp::Present || s.op == TreeOp::Absent;
        const std::string test = unary ? strformat("%s %s", s.feat.c_str(), std::string(op_name(s.op)).c_str())
                                       : strformat("%s %s %g (observed %g)", s.feat.c_str(),
                                                std::string(op_name(s.op)).c_str(), s.value, s.observed);
        out += strformat("  %-16s %-48s -> %s\n", s.node.c_str(), test.c_str(), s.outcome ? "yes" : "no");
    }
    return out;
}

}  // namespace partwise
