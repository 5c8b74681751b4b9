#include "lexiphylo/phylo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "lexiphylo/error.hpp"
#include "lexiphylo/numfmt.hpp"
#include "lexiphylo/parallel.hpp"
#include "lexiphylo/rng.hpp"

namespace lexiphylo {

int Tree::add_node(int parent, std::string label, std::optional<double> length) {
    TreeNode n;
    n.label = std::move(label);
    n.parent = parent;
    if (length) {
        n.length = *length;
        n.has_length = true;
    }
    nodes.push_back(std::move(n));
    const int id = static_cast<int>(nodes.size()) - 1;
    if (parent >= 0) nodes[static_cast<std::size_t>(parent)].children.push_back(id);
    else root = id;
    return id;
}

std::vector<int> Tree::leaves() const {
    std::vector<int> out;
    if (root < 0) return out;
    std::vector<int> stack{root};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        const auto& ch = nodes[static_cast<std::size_t>(v)].children;
        if (ch.empty()) out.push_back(v);
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    return out;
}

std::vector<std::string> Tree::leaf_labels() const {
    std::vector<std::string> out;
    for (int v : leaves()) out.push_back(nodes[static_cast<std::size_t>(v)].label);
    return out;
}

std::optional<int> Tree::find_leaf(std::string_view label) const {
    for (int v : leaves())
        if (nodes[static_cast<std::size_t>(v)].label == label) return v;
    return std::nullopt;
}

namespace {

bool special(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' || c == ']' ||
           c == '\'' || c == ':' || c == ';' || c == ',';
}

class NewickParser {
public:
    explicit NewickParser(std::string_view text) : s_(text) {}

    Tree parse() {
        std::optional<bool> forced;
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (s_.substr(pos_, 4) == "[&R]" || s_.substr(pos_, 4) == "[&r]") forced = true;
        if (s_.substr(pos_, 4) == "[&U]" || s_.substr(pos_, 4) == "[&u]") forced = false;
        skip();
        subtree(-1);
        skip();
        if (peek() != ';') error("expected ';'");
        ++pos_;
        skip();
        if (pos_ != s_.size()) error("trailing characters after ';'");
        auto& root = tree_.nodes[static_cast<std::size_t>(tree_.root)];
        tree_.rooted = forced.value_or(root.children.size() == 2);
        std::set<std::string> seen;
        for (int v : tree_.leaves()) {
            const auto& l = tree_.nodes[static_cast<std::size_t>(v)].label;
            if (l.empty()) error("unlabelled leaf");
            if (!seen.insert(l).second) error("duplicate leaf label '" + l + "'");
        }
        return std::move(tree_);
    }

private:
    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorCode::SyntaxError, "Newick position " + std::to_string(pos_) + ": " + what);
    }
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    void skip() {
        while (pos_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            } else if (s_[pos_] == '[') {
                const auto end = s_.find(']', pos_);
                if (end == std::string_view::npos) error("unterminated comment");
                pos_ = end + 1;
            } else {
                break;
            }
        }
    }

    std::string label() {
        skip();
        std::string out;
        if (peek() == '\'') {
            ++pos_;
            while (true) {
                if (pos_ >= s_.size()) error("unterminated quoted label");
                if (s_[pos_] == '\'') {
                    if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '\'') {
                        out += '\'';
                        pos_ += 2;
                        continue;
                    }
                    ++pos_;
                    break;
                }
                out += s_[pos_++];
            }
            return out;
        }
        while (pos_ < s_.size() && !special(s_[pos_])) out += s_[pos_++];
        return out;
    }

    std::optional<double> length() {
        skip();
        if (peek() != ':') return std::nullopt;
        ++pos_;
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                    s_[pos_] == '-' || s_[pos_] == '+'))
            ++pos_;
        if (start == pos_) error("expected branch length");
        double v;
        try {
            v = parse_double(s_.substr(start, pos_ - start), "branch length");
        } catch (const Error&) {
            pos_ = start;
            error("bad branch length");
        }
        if (!std::isfinite(v)) error("branch length must be finite");
        return v;
    }

    void subtree(int parent) {
        skip();
        const int node = tree_.add_node(parent);
        if (peek() == '(') {
            ++pos_;
            while (true) {
                subtree(node);
                skip();
                if (peek() == ',') {
                    ++pos_;
                    continue;
                }
                if (peek() == ')') {
                    ++pos_;
                    break;
                }
                error("expected ',' or ')'");
            }
        }
        auto name = label();
        if (tree_.nodes[static_cast<std::size_t>(node)].children.empty() && name.empty() && peek() != ':' &&
            peek() != ',' && peek() != ')' && peek() != ';')
            error("unexpected character");
        const auto len = length();
        auto& n = tree_.nodes[static_cast<std::size_t>(node)];
        n.label = std::move(name);
        if (len) {
            n.length = *len;
            n.has_length = true;
        } else if (parent >= 0) {
            tree_.missing_lengths = true;
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    Tree tree_;
};

// Undirected view used for re-rooting and pruning.
struct Graph {
    std::vector<std::vector<std::pair<int, double>>> adj;
    std::vector<std::string> label;
    std::vector<bool> leaf;
    std::vector<bool> alive;

    explicit Graph(const Tree& t) {
        const std::size_t n = t.nodes.size();
        adj.resize(n);
        label.resize(n);
        leaf.resize(n);
        alive.assign(n, true);
        for (std::size_t v = 0; v < n; ++v) {
            label[v] = t.nodes[v].label;
            leaf[v] = t.nodes[v].children.empty();
            if (t.nodes[v].parent >= 0) {
                const auto p = static_cast<std::size_t>(t.nodes[v].parent);
                adj[v].emplace_back(static_cast<int>(p), t.nodes[v].length);
                adj[p].emplace_back(static_cast<int>(v), t.nodes[v].length);
            }
        }
    }

    void remove_edge(int a, int b) {
        auto drop = [](auto& list, int x) {
            list.erase(std::find_if(list.begin(), list.end(), [x](const auto& e) { return e.first == x; }));
        };
        drop(adj[static_cast<std::size_t>(a)], b);
        drop(adj[static_cast<std::size_t>(b)], a);
    }

    void remove_node(int v) {
        while (!adj[static_cast<std::size_t>(v)].empty()) remove_edge(v, adj[static_cast<std::size_t>(v)].front().first);
        alive[static_cast<std::size_t>(v)] = false;
    }

    // Merges unlabeled degree-2 nodes (other than keep) into single edges.
    void suppress(int keep) {
        bool again = true;
        while (again) {
            again = false;
            for (std::size_t v = 0; v < adj.size(); ++v) {
                if (!alive[v] || leaf[v] || static_cast<int>(v) == keep || adj[v].size() != 2) continue;
                const auto [a, la] = adj[v][0];
                const auto [b, lb] = adj[v][1];
                remove_node(static_cast<int>(v));
                adj[static_cast<std::size_t>(a)].emplace_back(b, la + lb);
                adj[static_cast<std::size_t>(b)].emplace_back(a, la + lb);
                again = true;
            }
        }
    }

    // Drops non-leaf nodes of degree <= 1 repeatedly (left over after pruning).
    void trim(int keep) {
        bool again = true;
        while (again) {
            again = false;
            for (std::size_t v = 0; v < adj.size(); ++v) {
                if (!alive[v] || leaf[v] || static_cast<int>(v) == keep || adj[v].size() > 1) continue;
                remove_node(static_cast<int>(v));
                again = true;
            }
        }
    }

    Tree to_tree(int root) const {
        Tree t;
        std::function<void(int, int, int, double)> visit = [&](int v, int from, int parent, double len) {
            const int id = t.add_node(parent, label[static_cast<std::size_t>(v)],
                                      parent < 0 ? std::nullopt : std::optional<double>(len));
            for (const auto& [u, l] : adj[static_cast<std::size_t>(v)])
                if (u != from) visit(u, v, id, l);
        };
        visit(root, -1, -1, 0.0);
        t.rooted = t.nodes[static_cast<std::size_t>(t.root)].children.size() == 2;
        return t;
    }
};

std::string newick_node(const Tree& t, int v) {
    const auto& n = t.nodes[static_cast<std::size_t>(v)];
    std::string s;
    if (!n.children.empty()) {
        s += '(';
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i) s += ',';
            s += newick_node(t, n.children[i]);
        }
        s += ')';
    }
    if (!n.label.empty()) s += newick_label(n.label);
    if (n.has_length) s += ":" + format_double(n.length);
    return s;
}

}  // namespace

Tree parse_newick(std::string_view text) { return NewickParser(text).parse(); }

std::string newick_label(const std::string& label) {
    if (!label.empty() && std::none_of(label.begin(), label.end(), special)) return label;
    std::string out = "'";
    for (char c : label) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

std::string write_newick(const Tree& tree) {
    if (tree.root < 0) fail(ErrorCode::InvalidArgument, "empty tree");
    const bool binary_root = tree.nodes[static_cast<std::size_t>(tree.root)].children.size() == 2;
    std::string prefix;
    if (tree.rooted != binary_root) prefix = tree.rooted ? "[&R] " : "[&U] ";
    return prefix + newick_node(tree, tree.root) + ";";
}

Tree read_newick_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_newick(ss.str());
}

void save_newick(const Tree& tree, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    out << write_newick(tree) << '\n';
}

std::vector<std::vector<double>> leaf_distances(const Tree& tree) {
    const Graph g(tree);
    const auto leaves = tree.leaves();
    std::vector<std::vector<double>> out(leaves.size(), std::vector<double>(leaves.size(), 0.0));
    std::vector<double> dist(tree.nodes.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        std::fill(dist.begin(), dist.end(), -1.0);
        std::vector<int> stack{leaves[i]};
        dist[static_cast<std::size_t>(leaves[i])] = 0.0;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (const auto& [u, l] : g.adj[static_cast<std::size_t>(v)])
                if (dist[static_cast<std::size_t>(u)] < 0) {
                    dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + l;
                    stack.push_back(u);
                }
        }
        for (std::size_t j = 0; j < leaves.size(); ++j) out[i][j] = dist[static_cast<std::size_t>(leaves[j])];
    }
    return out;
}

std::set<std::vector<std::string>> tree_splits(const Tree& tree) {
    auto labels = tree.leaf_labels();
    const std::string smallest = *std::min_element(labels.begin(), labels.end());
    const std::size_t total = labels.size();
    std::set<std::vector<std::string>> out;
    std::function<std::vector<std::string>(int)> below = [&](int v) {
        const auto& n = tree.nodes[static_cast<std::size_t>(v)];
        if (n.children.empty()) return std::vector<std::string>{n.label};
        std::vector<std::string> acc;
        for (int c : n.children) {
            auto part = below(c);
            acc.insert(acc.end(), part.begin(), part.end());
        }
        if (v != tree.root && acc.size() >= 2 && total - acc.size() >= 2) {
            std::vector<std::string> side = acc;
            std::sort(side.begin(), side.end());
            if (std::binary_search(side.begin(), side.end(), smallest)) {
                std::vector<std::string> other;
                std::sort(labels.begin(), labels.end());
                std::set_difference(labels.begin(), labels.end(), side.begin(), side.end(),
                                    std::back_inserter(other));
                side = std::move(other);
            }
            out.insert(side);
        }
        return acc;
    };
    below(tree.root);
    return out;
}

std::size_t robinson_foulds(const Tree& a, const Tree& b) {
    const auto sa = tree_splits(a), sb = tree_splits(b);
    std::size_t diff = 0;
    for (const auto& s : sa) diff += sb.count(s) == 0;
    for (const auto& s : sb) diff += sa.count(s) == 0;
    return diff;
}

Tree bionj(const DistanceMatrix& dm) {
    const std::size_t n = dm.size();
    if (n < 3) fail(ErrorCode::TooFewTaxa, "BIONJ needs at least 3 taxa");
    if (dm.has_missing()) fail(ErrorCode::MissingEntries, "distance matrix has missing entries");

    // Adjacency of the growing tree; nodes 0..n-1 are the taxa.
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    std::vector<int> node(n);  // active cluster -> tree node
    for (std::size_t i = 0; i < n; ++i) node[i] = static_cast<int>(i);
    std::vector<std::vector<double>> d(n, std::vector<double>(n)), v(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i][j] = v[i][j] = dm.at(i, j);
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;

    auto link = [&](int a, int b, double len) {
        len = std::max(0.0, len);
        adj[static_cast<std::size_t>(a)].emplace_back(b, len);
        adj[static_cast<std::size_t>(b)].emplace_back(a, len);
    };

    while (active.size() > 3) {
        const double r = static_cast<double>(active.size());
        std::vector<double> sum(n, 0.0);
        for (std::size_t a : active)
            for (std::size_t b : active) sum[a] += d[a][b];
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t x = 0; x < active.size(); ++x)
            for (std::size_t y = x + 1; y < active.size(); ++y) {
                const std::size_t a = active[x], b = active[y];
                const double q = (r - 2.0) * d[a][b] - sum[a] - sum[b];
                if (q < best) {
                    best = q;
                    bi = x;
                    bj = y;
                }
            }
        const std::size_t i = active[bi], j = active[bj];
        const double li = 0.5 * d[i][j] + (sum[i] - sum[j]) / (2.0 * (r - 2.0));
        const double lj = d[i][j] - li;
        double lambda = 0.5;
        if (v[i][j] > 0.0) {
            double acc = 0.0;
            for (std::size_t k : active)
                if (k != i && k != j) acc += v[j][k] - v[i][k];
            lambda = std::clamp(0.5 + acc / (2.0 * (r - 2.0) * v[i][j]), 0.0, 1.0);
        }
        const int u = static_cast<int>(adj.size());
        adj.emplace_back();
        link(u, node[i], li);
        link(u, node[j], lj);
        for (std::size_t k : active) {
            if (k == i || k == j) continue;
            const double duk = lambda * (d[i][k] - li) + (1.0 - lambda) * (d[j][k] - lj);
            const double vuk = lambda * v[i][k] + (1.0 - lambda) * v[j][k] - lambda * (1.0 - lambda) * v[i][j];
            d[i][k] = d[k][i] = duk;
            v[i][k] = v[k][i] = vuk;
        }
        node[i] = u;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    }

    const std::size_t a = active[0], b = active[1], c = active[2];
    const int center = static_cast<int>(adj.size());
    adj.emplace_back();
    link(center, node[a], 0.5 * (d[a][b] + d[a][c] - d[b][c]));
    link(center, node[b], 0.5 * (d[a][b] + d[b][c] - d[a][c]));
    link(center, node[c], 0.5 * (d[a][c] + d[b][c] - d[a][b]));

    Tree t;
    std::function<void(int, int, int, double)> visit = [&](int x, int from, int parent, double len) {
        const std::string lbl = x < static_cast<int>(n) ? dm.ids()[static_cast<std::size_t>(x)] : std::string{};
        const int id = t.add_node(parent, lbl, parent < 0 ? std::nullopt : std::optional<double>(len));
        for (const auto& [y, l] : adj[static_cast<std::size_t>(x)])
            if (y != from) visit(y, x, id, l);
    };
    visit(center, -1, -1, 0.0);
    t.rooted = false;
    return t;
}

Tree root_with_outgroup(const Tree& tree, std::string_view outgroup) {
    const auto o = tree.find_leaf(outgroup);
    if (!o) fail(ErrorCode::LeafNotFound, "outgroup " + std::string(outgroup) + " not in tree");
    if (tree.leaf_count() < 3) fail(ErrorCode::TooFewTaxa, "rooting needs at least 3 leaves");
    Graph g(tree);
    g.suppress(-1);
    if (g.adj[static_cast<std::size_t>(*o)].size() != 1)
        fail(ErrorCode::InvalidArgument, "outgroup is not a leaf of the unrooted tree");
    const int p = g.adj[static_cast<std::size_t>(*o)].front().first;
    g.remove_node(*o);
    g.suppress(p);
    Tree t = g.to_tree(p);
    t.rooted = true;
    return t;
}

std::string select_outgroup(const std::vector<std::string>& family, const DistanceMatrix& d) {
    if (family.empty()) fail(ErrorCode::InvalidArgument, "empty family");
    std::vector<std::size_t> members;
    for (const auto& f : family) {
        const auto k = d.index_of(f);
        if (!k) fail(ErrorCode::InvalidArgument, "family member " + f + " not in distance matrix");
        members.push_back(*k);
    }
    std::optional<std::size_t> best;
    double best_mean = 0.0;
    for (std::size_t c = 0; c < d.size(); ++c) {
        if (std::find(members.begin(), members.end(), c) != members.end()) continue;
        double sum = 0.0;
        bool ok = true;
        for (std::size_t m : members) {
            if (d.missing(c, m)) {
                ok = false;
                break;
            }
            sum += d.at(c, m);
        }
        if (!ok) continue;
        const double mean = sum / static_cast<double>(members.size());
        if (!best || mean < best_mean || (mean == best_mean && d.ids()[c] < d.ids()[*best])) {
            best = c;
            best_mean = mean;
        }
    }
    if (!best) fail(ErrorCode::NoCandidate, "no outgroup candidate with distances to every family member");
    return d.ids()[*best];
}

Tree prune_to(const Tree& tree, const std::set<std::string>& keep) {
    Graph g(tree);
    std::vector<int> kept;
    for (int v : tree.leaves()) {
        if (keep.count(tree.nodes[static_cast<std::size_t>(v)].label)) kept.push_back(v);
        else g.remove_node(v);
    }
    if (kept.empty()) fail(ErrorCode::InvalidArgument, "pruning removes every leaf");
    g.trim(-1);
    // Keep the original root if it still branches, so rooted trees stay rooted.
    int root = tree.root;
    const bool root_alive = g.alive[static_cast<std::size_t>(root)] && g.adj[static_cast<std::size_t>(root)].size() >= 2;
    g.suppress(root_alive ? root : -1);
    if (!root_alive || !g.alive[static_cast<std::size_t>(root)]) {
        root = kept.front();
        for (std::size_t v = 0; v < g.adj.size(); ++v)
            if (g.alive[v] && !g.leaf[v]) {
                root = static_cast<int>(v);
                break;
            }
    }
    return g.to_tree(root);
}

namespace {

// Edge-count distances between leaves via binary-lifting LCA.
class LeafMetric {
public:
    explicit LeafMetric(const Tree& t) {
        const std::size_t n = t.nodes.size();
        depth_.assign(n, 0);
        int levels = 1;
        while ((std::size_t{1} << levels) < n) ++levels;
        up_.assign(static_cast<std::size_t>(levels), std::vector<int>(n, t.root));
        std::vector<int> stack{t.root};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int c : t.nodes[static_cast<std::size_t>(v)].children) {
                depth_[static_cast<std::size_t>(c)] = depth_[static_cast<std::size_t>(v)] + 1;
                up_[0][static_cast<std::size_t>(c)] = v;
                stack.push_back(c);
            }
        }
        for (std::size_t k = 1; k < up_.size(); ++k)
            for (std::size_t v = 0; v < n; ++v)
                up_[k][v] = up_[k - 1][static_cast<std::size_t>(up_[k - 1][v])];
        for (int v : t.leaves()) leaf_[t.nodes[static_cast<std::size_t>(v)].label] = v;
    }

    int node(const std::string& label) const { return leaf_.at(label); }

    int distance(int a, int b) const {
        int x = a, y = b;
        if (depth_[static_cast<std::size_t>(x)] < depth_[static_cast<std::size_t>(y)]) std::swap(x, y);
        int diff = depth_[static_cast<std::size_t>(x)] - depth_[static_cast<std::size_t>(y)];
        for (std::size_t k = 0; diff; ++k, diff >>= 1)
            if (diff & 1) x = up_[k][static_cast<std::size_t>(x)];
        if (x != y) {
            for (std::size_t k = up_.size(); k-- > 0;)
                if (up_[k][static_cast<std::size_t>(x)] != up_[k][static_cast<std::size_t>(y)]) {
                    x = up_[k][static_cast<std::size_t>(x)];
                    y = up_[k][static_cast<std::size_t>(y)];
                }
            x = up_[0][static_cast<std::size_t>(x)];
        }
        return depth_[static_cast<std::size_t>(a)] + depth_[static_cast<std::size_t>(b)] -
               2 * depth_[static_cast<std::size_t>(x)];
    }

    int topology(int a, int b, int c, int d) const {
        const int s0 = distance(a, b) + distance(c, d);
        const int s1 = distance(a, c) + distance(b, d);
        const int s2 = distance(a, d) + distance(b, c);
        if (s0 < s1 && s0 < s2) return 0;
        if (s1 < s0 && s1 < s2) return 1;
        if (s2 < s0 && s2 < s1) return 2;
        return -1;
    }

private:
    std::vector<int> depth_;
    std::vector<std::vector<int>> up_;
    std::map<std::string, int> leaf_;
};

// A gold butterfly the inferred tree does not reproduce, including the case
// where the inferred tree leaves the quartet unresolved.
bool quartet_differs(int gold_topology, int inferred_topology) { return inferred_topology != gold_topology; }

}  // namespace

int quartet_topology(const Tree& tree, std::string_view a, std::string_view b, std::string_view c,
                     std::string_view d) {
    const LeafMetric m(tree);
    auto id = [&](std::string_view l) {
        const auto v = tree.find_leaf(l);
        if (!v) fail(ErrorCode::LeafNotFound, std::string(l));
        return *v;
    };
    return m.topology(id(a), id(b), id(c), id(d));
}

GqdResult gqd(const Tree& inferred, const Tree& gold, const GqdOptions& options) {
    const auto la = inferred.leaf_labels(), lb = gold.leaf_labels();
    std::set<std::string> sa(la.begin(), la.end());
    std::vector<std::string> shared;
    for (const auto& l : lb)
        if (sa.count(l)) shared.push_back(l);
    std::sort(shared.begin(), shared.end());
    GqdResult res;
    res.shared_leaves = shared.size();
    if (shared.size() < 4) fail(ErrorCode::NoResolvedQuartets, "fewer than four shared leaves");

    const LeafMetric mi(inferred), mg(gold);
    const std::size_t n = shared.size();
    std::vector<int> vi(n), vg(n);
    for (std::size_t k = 0; k < n; ++k) {
        vi[k] = mi.node(shared[k]);
        vg[k] = mg.node(shared[k]);
    }

    std::size_t resolved = 0, differ = 0;
    if (n <= options.exact_limit) {
        std::vector<std::size_t> r(n, 0), df(n, 0);
        parallel_for(n, [&](std::size_t a) {
            for (std::size_t b = a + 1; b < n; ++b)
                for (std::size_t c = b + 1; c < n; ++c)
                    for (std::size_t d = c + 1; d < n; ++d) {
                        const int tg = mg.topology(vg[a], vg[b], vg[c], vg[d]);
                        if (tg < 0) continue;
                        ++r[a];
                        if (quartet_differs(tg, mi.topology(vi[a], vi[b], vi[c], vi[d]))) ++df[a];
                    }
        });
        for (std::size_t a = 0; a < n; ++a) {
            resolved += r[a];
            differ += df[a];
        }
        res.exact = true;
    } else {
        constexpr std::size_t kChunks = 100;
        std::vector<std::size_t> r(kChunks, 0), df(kChunks, 0);
        parallel_for(kChunks, [&](std::size_t chunk) {
            Rng rng(derive_seed(options.seed, chunk));
            const std::size_t m = options.samples / kChunks + (chunk < options.samples % kChunks ? 1 : 0);
            for (std::size_t s = 0; s < m; ++s) {
                std::size_t q[4];
                for (int k = 0; k < 4; ++k) {
                    bool dup;
                    do {
                        q[k] = rng.below(n);
                        dup = false;
                        for (int j = 0; j < k; ++j) dup |= q[j] == q[k];
                    } while (dup);
                }
                const int tg = mg.topology(vg[q[0]], vg[q[1]], vg[q[2]], vg[q[3]]);
                if (tg < 0) continue;
                ++r[chunk];
                if (quartet_differs(tg, mi.topology(vi[q[0]], vi[q[1]], vi[q[2]], vi[q[3]]))) ++df[chunk];
            }
        });
        for (std::size_t k = 0; k < kChunks; ++k) {
            resolved += r[k];
            differ += df[k];
        }
        res.exact = false;
    }
    if (resolved == 0) fail(ErrorCode::NoResolvedQuartets, "gold tree resolves no quartet");
    res.resolved_quartets = resolved;
    res.value = static_cast<double>(differ) / static_cast<double>(resolved);
    if (!res.exact) res.standard_error = std::sqrt(res.value * (1.0 - res.value) / static_cast<double>(resolved));
    return res;
}

std::vector<PathStat> path_stats(const Tree& tree) {
    if (!tree.rooted) fail(ErrorCode::UnrootedTree, "root-to-tip statistics need a rooted tree");
    std::vector<PathStat> out;
    for (int leaf : tree.leaves()) {
        PathStat s;
        s.label = tree.nodes[static_cast<std::size_t>(leaf)].label;
        int v = leaf;
        while (tree.nodes[static_cast<std::size_t>(v)].parent >= 0) {
            s.path_length += tree.nodes[static_cast<std::size_t>(v)].length;
            v = tree.nodes[static_cast<std::size_t>(v)].parent;
            if (tree.nodes[static_cast<std::size_t>(v)].children.size() >= 2) ++s.nodes;
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace lexiphylo
