#include "partwise/tree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <unordered_set>

#include "partwise/embedded_data.hpp"
#include "partwise/error.hpp"

namespace partwise {

namespace {

std::optional<TreeOp> parse_op(std::string_view s) {
    if (s == "present") return TreeOp::Present;
    if (s == "absent") return TreeOp::Absent;
    if (s == "eq") return TreeOp::Eq;
    if (s == "gt") return TreeOp::Gt;
    if (s == "lt") return TreeOp::Lt;
    return std::nullopt;
}

void check_node_schema(const TreeNode& n) {
    const auto kind = tree_feature_kind(n.feat);
    if (!kind) throw SpecError("tree node '" + n.id + "': unknown feature '" + n.feat + "'");
    const bool unary = n.op == TreeOp::Present || n.op == TreeOp::Absent;
    if (unary && *kind != FeatureKind::Boolean) {
        throw SpecError("tree node '" + n.id + "': '" + std::string(op_name(n.op)) + "' needs a boolean feature");
    }
    if ((n.op == TreeOp::Gt || n.op == TreeOp::Lt) && *kind != FeatureKind::Numeric) {
        throw SpecError("tree node '" + n.id + "': '" + std::string(op_name(n.op)) + "' needs a numeric feature");
    }
    if (!unary && !std::isfinite(n.value)) throw SpecError("tree node '" + n.id + "': comparison value must be finite");
    if (n.then_id.empty() || n.else_id.empty()) throw SpecError("tree node '" + n.id + "': missing branch");
}

}  // namespace

std::string_view op_name(TreeOp op) noexcept {
    switch (op) {
        case TreeOp::Present: return "present";
        case TreeOp::Absent: return "absent";
        case TreeOp::Eq: return "eq";
        case TreeOp::Gt: return "gt";
        case TreeOp::Lt: return "lt";
    }
    return "?";
}

TreeSpec::TreeSpec(std::string root, std::string fallback, std::vector<TreeNode> nodes, std::vector<TreeLeaf> leaves)
    : root_(std::move(root)), fallback_(std::move(fallback)), nodes_(std::move(nodes)), leaves_(std::move(leaves)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id.empty()) throw SpecError("tree node with empty id");
        if (!node_index_.emplace(nodes_[i].id, i).second) throw SpecError("duplicate tree id '" + nodes_[i].id + "'");
    }
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
        if (leaves_[i].id.empty()) throw SpecError("tree leaf with empty id");
        if (node_index_.contains(leaves_[i].id) || !leaf_index_.emplace(leaves_[i].id, i).second) {
            throw SpecError("duplicate tree id '" + leaves_[i].id + "'");
        }
    }
    for (const TreeNode& n : nodes_) {
        check_node_schema(n);
        for (const std::string* ref : {&n.then_id, &n.else_id}) {
            if (!node_index_.contains(*ref) && !leaf_index_.contains(*ref)) {
                throw SpecError("tree node '" + n.id + "' references missing id '" + *ref + "'");
            }
        }
    }
    if (!node_index_.contains(root_) && !leaf_index_.contains(root_)) {
        throw SpecError("tree root '" + root_ + "' does not exist");
    }

    // Depth-first walk: detects cycles and collects reachability.
    std::unordered_set<std::string> on_stack;
    std::unordered_set<std::string> seen;
    const std::function<int(const std::string&)> walk = [&](const std::string& id) -> int {
        if (on_stack.contains(id)) throw SpecError("tree contains a cycle through '" + id + "'");
        if (seen.contains(id)) throw SpecError("tree id '" + id + "' has more than one parent");
        seen.insert(id);
        const auto it = node_index_.find(id);
        if (it == node_index_.end()) return 0;
        on_stack.insert(id);
        const TreeNode& n = nodes_[it->second];
        const int d = 1 + std::max(walk(n.then_id), walk(n.else_id));
        on_stack.erase(id);
        return d;
    };
    depth_ = walk(root_);
    for (const TreeNode& n : nodes_) {
        if (!seen.contains(n.id)) throw SpecError("tree node '" + n.id + "' is unreachable");
    }
    for (const TreeLeaf& l : leaves_) {
        if (!seen.contains(l.id)) throw SpecError("tree leaf '" + l.id + "' is unreachable");
    }

    std::array<bool, kNumCategories> covered{};
    for (const TreeLeaf& l : leaves_) covered[static_cast<std::size_t>(code(l.category))] = true;
    for (const VehicleCategory c : all_categories()) {
        if (!covered[static_cast<std::size_t>(code(c))]) {
            throw SpecError("tree has no leaf for category '" + std::string(name(c)) + "'");
        }
    }

    if (!leaf_index_.contains(fallback_)) throw SpecError("tree fallback '" + fallback_ + "' is not a leaf");
    if (classify_tree(TreeFeatures{}, *this).leaf != fallback_) {
        throw SpecError("features with nothing detected do not reach the fallback leaf '" + fallback_ + "'");
    }
}

const TreeNode* TreeSpec::node(const std::string& id) const {
    const auto it = node_index_.find(id);
    return it == node_index_.end() ? nullptr : &nodes_[it->second];
}

const TreeLeaf* TreeSpec::leaf(const std::string& id) const {
    const auto it = leaf_index_.find(id);
    return it == leaf_index_.end() ? nullptr : &leaves_[it->second];
}

bool evaluate_predicate(const TreeNode& node, const TreeFeatures& features) {
    const double v = tree_feature_value(features, node.feat);
    switch (node.op) {
        case TreeOp::Present: return v != 0.0;
        case TreeOp::Absent: return v == 0.0;
        case TreeOp::Eq: return v == node.value;
        case TreeOp::Gt: return v > node.value;
        case TreeOp::Lt: return v < node.value;
    }
    return false;
}

TreeDecision classify_tree(const TreeFeatures& features, const TreeSpec& spec) {
    TreeDecision out{VehicleCategory::Car, {}, {}};
    std::string id = spec.root();
    while (const TreeNode* n = spec.node(id)) {
        const bool outcome = evaluate_predicate(*n, features);
        out.path.push_back({n->id, n->feat, n->op, n->value, tree_feature_value(features, n->feat), outcome});
        id = outcome ? n->then_id : n->else_id;
    }
    const TreeLeaf* leaf = spec.leaf(id);
    out.category = leaf->category;
    out.leaf = leaf->id;
    return out;
}

TreeSpec tree_spec_from_json(const Json& j) {
    try {
        std::vector<TreeNode> nodes;
        for (const Json& n : j.at("nodes")) {
            TreeNode node;
            node.id = n.at("id").get<std::string>();
            node.feat = n.at("feat").get<std::string>();
            const std::string op = n.at("op").get<std::string>();
            const auto parsed = parse_op(op);
            if (!parsed) throw SpecError("tree node '" + node.id + "': unknown op '" + op + "'");
            node.op = *parsed;
            const bool unary = node.op == TreeOp::Present || node.op == TreeOp::Absent;
            if (!unary) {
                if (!n.contains("value") || !n.at("value").is_number()) {
                    throw SpecError("tree node '" + node.id + "': '" + op + "' needs a numeric value");
                }
                node.value = n.at("value").get<double>();
            } else if (n.contains("value") && !n.at("value").is_null()) {
                throw SpecError("tree node '" + node.id + "': '" + op + "' takes no value");
            }
            node.then_id = n.at("then").get<std::string>();
            node.else_id = n.at("else").get<std::string>();
            nodes.push_back(std::move(node));
        }
        std::vector<TreeLeaf> leaves;
        for (const Json& l : j.at("leaves")) {
            const std::string cat = l.at("category").get<std::string>();
            const auto c = parse_category(cat);
            if (!c) throw SpecError("tree leaf: unknown category '" + cat + "'");
            leaves.push_back({l.at("id").get<std::string>(), *c});
        }
        return TreeSpec(j.at("root").get<std::string>(), j.at("fallback").get<std::string>(), std::move(nodes),
                        std::move(leaves));
    } catch (const Json::exception& e) {
        throw SpecError(std::string("malformed tree spec: ") + e.what());
    }
}

Json tree_spec_to_json(const TreeSpec& spec) {
    Json nodes = Json::array();
    for (const TreeNode& n : spec.nodes()) {
        const bool unary = n.op == TreeOp::Present || n.op == TreeOp::Absent;
        nodes.push_back({{"id", n.id},
                         {"feat", n.feat},
                         {"op", op_name(n.op)},
                         {"value", unary ? Json(nullptr) : Json(n.value)},
                         {"then", n.then_id},
                         {"else", n.else_id}});
    }
    Json leaves = Json::array();
    for (const TreeLeaf& l : spec.leaves()) leaves.push_back({{"id", l.id}, {"category", name(l.category)}});
    return {{"root", spec.root()}, {"fallback", spec.fallback()}, {"nodes", std::move(nodes)}, {"leaves", std::move(leaves)}};
}

TreeSpec load_tree_spec(const std::filesystem::path& path) { return tree_spec_from_json(read_json_file(path)); }

TreeSpec default_tree_spec() { return tree_spec_from_json(parse_json(embedded::kDefaultTreeJson)); }

}  // namespace partwise
