#pragma once
// Trees: Newick I/O, BIONJ, outgroup rooting, generalized quartet distance
// and root-to-tip statistics.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lexiphylo/lexdist.hpp"

namespace lexiphylo {

struct TreeNode {
    std::string label;
    double length = 0.0;      // branch to the parent
    bool has_length = false;
    int parent = -1;
    std::vector<int> children;

    bool operator==(const TreeNode&) const = default;
};

class Tree {
public:
    std::vector<TreeNode> nodes;  // preorder after parsing; nodes[root] has parent -1
    int root = -1;
    bool rooted = false;          // root has two children, or a leading [&R]
    bool missing_lengths = false; // some non-root branch had no length in the input

    int add_node(int parent, std::string label = {}, std::optional<double> length = std::nullopt);
    bool is_leaf(int v) const { return nodes[static_cast<std::size_t>(v)].children.empty(); }
    std::vector<int> leaves() const;  // preorder
    std::vector<std::string> leaf_labels() const;
    std::optional<int> find_leaf(std::string_view label) const;
    std::size_t leaf_count() const { return leaves().size(); }

    bool operator==(const Tree&) const = default;
};

Tree parse_newick(std::string_view text);
std::string write_newick(const Tree& tree);
Tree read_newick_file(const std::string& path);
void save_newick(const Tree& tree, const std::string& path);
std::string newick_label(const std::string& label);

// Weighted leaf-to-leaf distances, in leaf_labels() order.
std::vector<std::vector<double>> leaf_distances(const Tree& tree);

// Nontrivial bipartitions, each as the sorted labels of the side without the
// smallest label. Root position is ignored.
std::set<std::vector<std::string>> tree_splits(const Tree& tree);
std::size_t robinson_foulds(const Tree& a, const Tree& b);

// Unrooted tree, central node as root.
Tree bionj(const DistanceMatrix& d);

// Roots at the node the outgroup hangs from, then drops the outgroup.
Tree root_with_outgroup(const Tree& tree, std::string_view outgroup);

// Non-family taxon with minimal mean distance to the family; ties -> smaller id.
std::string select_outgroup(const std::vector<std::string>& family, const DistanceMatrix& d);

// Keeps only the given leaves; suppresses nodes left with one child.
Tree prune_to(const Tree& tree, const std::set<std::string>& keep);

struct GqdOptions {
    std::size_t exact_limit = 80;
    std::size_t samples = 1000000;
    std::uint64_t seed = 1;
};

struct GqdResult {
    double value = 0.0;
    double standard_error = 0.0;      // 0 when exact
    std::size_t resolved_quartets = 0; // butterflies in gold (counted or sampled)
    std::size_t shared_leaves = 0;
    bool exact = true;
};

GqdResult gqd(const Tree& inferred, const Tree& gold, const GqdOptions& options = {});

// Quartet topology: 0 = ab|cd, 1 = ac|bd, 2 = ad|bc, -1 = unresolved.
int quartet_topology(const Tree& tree, std::string_view a, std::string_view b, std::string_view c,
                     std::string_view d);

struct PathStat {
    std::string label;
    double path_length = 0.0;
    std::size_t nodes = 0;
};

std::vector<PathStat> path_stats(const Tree& tree);

}  // namespace lexiphylo
