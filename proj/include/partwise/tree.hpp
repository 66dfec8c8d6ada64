#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "partwise/core.hpp"
#include "partwise/io.hpp"
#include "partwise/treefeat.hpp"

namespace partwise {

enum class TreeOp { Present, Absent, Eq, Gt, Lt };

struct TreeNode {
    std::string id;
    std::string feat;
    TreeOp op = TreeOp::Present;
    double value = 0.0;  // unused by present/absent
    std::string then_id;
    std::string else_id;

    bool operator==(const TreeNode&) const = default;
};

struct TreeLeaf {
    std::string id;
    VehicleCategory category;

    bool operator==(const TreeLeaf&) const = default;
};

/// Declarative binary decision tree over TreeFeatures. Construction validates
/// the structure completely, so classification never fails.
class TreeSpec {
public:
    TreeSpec(std::string root, std::string fallback, std::vector<TreeNode> nodes, std::vector<TreeLeaf> leaves);

    const std::string& root() const noexcept { return root_; }
    const std::string& fallback() const noexcept { return fallback_; }
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    const std::vector<TreeLeaf>& leaves() const noexcept { return leaves_; }
    /// Largest number of decision nodes on a root-to-leaf path.
    int depth() const noexcept { return depth_; }

    const TreeNode* node(const std::string& id) const;
    const TreeLeaf* leaf(const std::string& id) const;

    bool operator==(const TreeSpec& o) const {
        return root_ == o.root_ && fallback_ == o.fallback_ && nodes_ == o.nodes_ && leaves_ == o.leaves_;
    }

private:
    std::string root_;
    std::string fallback_;
    std::vector<TreeNode> nodes_;
    std::vector<TreeLeaf> leaves_;
    std::unordered_map<std::string, std::size_t> node_index_;
    std::unordered_map<std::string, std::size_t> leaf_index_;
    int depth_ = 0;
};

/// Throws SpecError on any structural or schema problem.
TreeSpec tree_spec_from_json(const Json& j);
Json tree_spec_to_json(const TreeSpec& spec);
TreeSpec load_tree_spec(const std::filesystem::path& path);
/// The shipped tree.
TreeSpec default_tree_spec();

std::string_view op_name(TreeOp op) noexcept;

struct TreeStep {
    std::string node;
    std::string feat;
    TreeOp op;
    double value;
    double observed;
    bool outcome;

    bool operator==(const TreeStep&) const = default;
};

struct TreeDecision {
    VehicleCategory category;
    std::string leaf;
    std::vector<TreeStep> path;

    bool operator==(const TreeDecision&) const = default;
};

bool evaluate_predicate(const TreeNode& node, const TreeFeatures& features);
TreeDecision classify_tree(const TreeFeatures& features, const TreeSpec& spec);

}  // namespace partwise
