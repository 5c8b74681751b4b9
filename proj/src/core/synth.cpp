#include "lexiphylo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "lexiphylo/error.hpp"

namespace lexiphylo {

namespace {

constexpr std::string_view kConsonants = "pbfvmw8tdszcnrlSZCjT5ykgxNqXh7L4G!";
constexpr std::string_view kVowels = "ieE3auo";

Symbol sym(char c) { return *SoundClassAlphabet::index_of(c); }

bool is_vowel(Symbol s) { return kVowels.find(SoundClassAlphabet::symbol(s)) != std::string_view::npos; }

// Common sound classes are drawn more often, roughly as in real lists.
Symbol random_consonant(Rng& rng) {
    static constexpr std::string_view kCommon = "ptkmnslrbdgwyh";
    return rng.bernoulli(0.8) ? sym(kCommon[rng.below(kCommon.size())]) : sym(kConsonants[rng.below(kConsonants.size())]);
}

Symbol random_vowel(Rng& rng) { return sym(kVowels[rng.below(kVowels.size())]); }

Symbol random_like(Symbol s, Rng& rng) { return is_vowel(s) ? random_vowel(rng) : random_consonant(rng); }

std::vector<Symbol> random_word(Rng& rng) {
    const std::size_t syllables = 1 + rng.below(3);
    std::vector<Symbol> w;
    for (std::size_t k = 0; k < syllables; ++k) {
        if (k == 0 && rng.bernoulli(0.2)) {
            w.push_back(random_vowel(rng));
        } else {
            w.push_back(random_consonant(rng));
            w.push_back(random_vowel(rng));
        }
        if (rng.bernoulli(0.3)) w.push_back(random_consonant(rng));
    }
    return w;
}

struct Word {
    std::vector<Symbol> segments;
    int cls = 0;
};

using Lexicon = std::vector<std::vector<Word>>;  // per concept, synonyms

void evolve(Lexicon& lex, double t, const SynthOptions& o, Rng& rng, std::vector<int>& next_class) {
    // regular sound changes, applied to every word of the lineage
    const unsigned changes = rng.poisson(o.sound_change_rate * t);
    for (unsigned k = 0; k < changes; ++k) {
        std::vector<Symbol> present;
        for (const auto& entry : lex)
            for (const auto& w : entry) present.insert(present.end(), w.segments.begin(), w.segments.end());
        if (present.empty()) break;
        const Symbol from = present[rng.below(present.size())];
        const Symbol to = random_like(from, rng);
        for (auto& entry : lex)
            for (auto& w : entry) std::replace(w.segments.begin(), w.segments.end(), from, to);
    }
    for (std::size_t c = 0; c < lex.size(); ++c) {
        for (auto& w : lex[c]) {
            if (rng.bernoulli(1.0 - std::exp(-o.replacement_rate * t))) {
                w.segments = random_word(rng);
                w.cls = next_class[c]++;
                continue;
            }
            const unsigned edits = rng.poisson(o.edit_rate * t * static_cast<double>(w.segments.size()));
            for (unsigned e = 0; e < edits; ++e) {
                const auto pos = rng.below(w.segments.size());
                const double u = rng.uniform();
                if (u < 0.6) {
                    w.segments[pos] = random_like(w.segments[pos], rng);
                } else if (u < 0.8 && w.segments.size() > 2) {
                    w.segments.erase(w.segments.begin() + static_cast<std::ptrdiff_t>(pos));
                } else {
                    w.segments.insert(w.segments.begin() + static_cast<std::ptrdiff_t>(pos), random_consonant(rng));
                }
            }
        }
    }
}

std::string render(const std::vector<Symbol>& s) {
    std::string out;
    for (Symbol x : s) out += SoundClassAlphabet::symbol(x);
    return out;
}

}  // namespace

Tree random_tree(const std::vector<std::string>& labels, Rng& rng, double mean_branch) {
    if (labels.empty()) fail(ErrorCode::InvalidArgument, "random_tree needs labels");
    // Yule process on an explicit child list, then labels assigned in leaf order.
    struct N {
        std::vector<std::size_t> children;
        double length = 0.0;
    };
    std::vector<N> nodes(1);
    std::vector<std::size_t> tips{0};
    while (tips.size() < labels.size()) {
        const std::size_t pick = rng.below(tips.size());
        const std::size_t v = tips[pick];
        for (int k = 0; k < 2; ++k) {
            nodes.push_back({});
            nodes.back().length = rng.exponential(1.0 / mean_branch);
            nodes[v].children.push_back(nodes.size() - 1);
        }
        tips.erase(tips.begin() + static_cast<std::ptrdiff_t>(pick));
        tips.push_back(nodes[v].children[0]);
        tips.push_back(nodes[v].children[1]);
    }
    std::vector<std::string> shuffled = labels;
    rng.shuffle(shuffled);
    Tree t;
    std::size_t next_label = 0;
    std::function<void(std::size_t, int)> build = [&](std::size_t v, int parent) {
        const bool leaf = nodes[v].children.empty();
        const int id = t.add_node(parent, leaf ? shuffled[next_label++] : std::string{},
                                  parent < 0 ? std::nullopt : std::optional<double>(nodes[v].length));
        for (std::size_t c : nodes[v].children) build(c, id);
    };
    build(0, -1);
    t.rooted = t.nodes[static_cast<std::size_t>(t.root)].children.size() == 2;
    return t;
}

Tree yule_tree(const std::vector<std::string>& labels, Rng& rng, double depth) {
    if (labels.empty()) fail(ErrorCode::InvalidArgument, "yule_tree needs labels");
    struct N {
        std::vector<std::size_t> children;
        double length = 0.0;
    };
    std::vector<N> nodes(1);
    std::vector<std::size_t> tips{0};
    auto grow = [&](double dt) {
        for (std::size_t v : tips) nodes[v].length += dt;
    };
    while (tips.size() < labels.size()) {
        grow(rng.exponential(static_cast<double>(tips.size())));
        const std::size_t pick = rng.below(tips.size());
        const std::size_t v = tips[pick];
        tips.erase(tips.begin() + static_cast<std::ptrdiff_t>(pick));
        for (int k = 0; k < 2; ++k) {
            nodes.push_back({});
            nodes[v].children.push_back(nodes.size() - 1);
            tips.push_back(nodes.size() - 1);
        }
    }
    grow(rng.exponential(static_cast<double>(tips.size())));
    // rescale so every tip sits at the requested depth
    double total = 0.0;
    for (std::size_t v = 0; !nodes[v].children.empty(); v = nodes[v].children[0]) total += nodes[nodes[v].children[0]].length;
    const double scale = depth / total;
    std::vector<std::string> shuffled = labels;
    rng.shuffle(shuffled);
    Tree t;
    std::size_t next_label = 0;
    std::function<void(std::size_t, int)> build = [&](std::size_t v, int parent) {
        const bool leaf = nodes[v].children.empty();
        const int id = t.add_node(parent, leaf ? shuffled[next_label++] : std::string{},
                                  parent < 0 ? std::nullopt : std::optional<double>(nodes[v].length * scale));
        for (std::size_t c : nodes[v].children) build(c, id);
    };
    build(0, -1);
    t.rooted = t.nodes[static_cast<std::size_t>(t.root)].children.size() == 2;
    return t;
}

SynthData synthesize(const SynthOptions& o, std::uint64_t seed) {
    if (o.families == 0 || o.doculects_per_family < 2)
        fail(ErrorCode::InvalidArgument, "need at least one family of two doculects");
    SynthData out;
    out.corpus.concepts = asjp_concepts();
    const std::size_t nc = out.corpus.concepts.size();
    Tree joined;
    joined.add_node(-1);

    for (std::size_t f = 0; f < o.families; ++f) {
        Rng rng(derive_seed(seed, f));
        const std::string family = o.family_prefix + std::to_string(f + 1);
        std::vector<std::string> labels;
        for (std::size_t k = 0; k < o.doculects_per_family; ++k) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%02zu", k + 1);
            labels.push_back(family + "_L" + buf);
        }
        Tree tree = yule_tree(labels, rng, o.depth);

        Lexicon proto(nc);
        std::vector<int> next_class(nc, 1);
        for (std::size_t c = 0; c < nc; ++c) proto[c].push_back({random_word(rng), next_class[c]++});

        const double center_lat = rng.uniform(-50.0, 60.0), center_lon = rng.uniform(-170.0, 170.0);
        struct State {
            Lexicon lex;
            double lat, lon;
            std::vector<std::string> path;
        };
        std::vector<State> state(tree.nodes.size());
        state[static_cast<std::size_t>(tree.root)] = {proto, center_lat, center_lon, {family}};
        std::vector<int> order{tree.root};
        for (std::size_t k = 0; k < order.size(); ++k) {
            const int v = order[k];
            for (int c : tree.nodes[static_cast<std::size_t>(v)].children) {
                State s = state[static_cast<std::size_t>(v)];
                const double t = tree.nodes[static_cast<std::size_t>(c)].length;
                evolve(s.lex, t, o, rng, next_class);
                const double step = 600.0 * std::sqrt(t) / 111.0;  // degrees
                s.lat = std::clamp(s.lat + step * rng.normal(), -80.0, 80.0);
                s.lon = std::clamp(s.lon + step * rng.normal(), -179.0, 179.0);
                if (!tree.is_leaf(c)) s.path.push_back(family + "_" + std::to_string(c));
                state[static_cast<std::size_t>(c)] = std::move(s);
                order.push_back(c);
            }
        }

        for (int leaf : tree.leaves()) {
            auto& s = state[static_cast<std::size_t>(leaf)];
            Doculect d;
            d.id = tree.nodes[static_cast<std::size_t>(leaf)].label;
            d.name = d.id;
            d.family = family;
            d.classification_path = s.path;
            d.latitude = std::round(s.lat * 1e4) / 1e4;
            d.longitude = std::round(s.lon * 1e4) / 1e4;
            d.entries.resize(nc);
            for (std::size_t c = 0; c < nc; ++c) {
                if (rng.bernoulli(o.missing_probability)) continue;
                std::vector<Word> words = s.lex[c];
                if (rng.bernoulli(o.synonym_probability)) words.push_back({random_word(rng), next_class[c]++});
                for (const auto& w : words) {
                    Form form{render(w.segments), w.segments};
                    if (std::any_of(d.entries[c].begin(), d.entries[c].end(),
                                    [&](const Form& x) { return x.raw == form.raw; }))
                        continue;
                    out.gold.records.push_back(
                        {family, d.id, out.corpus.concepts[c], form, out.corpus.concepts[c] + "_" + std::to_string(w.cls)});
                    d.entries[c].push_back(std::move(form));
                }
            }
            out.corpus.doculects.push_back(std::move(d));
        }

        // graft the family under the joint root
        std::function<void(int, int)> graft = [&](int v, int parent) {
            const auto& n = tree.nodes[static_cast<std::size_t>(v)];
            const int id = joined.add_node(parent, n.label, std::optional<double>(v == tree.root ? 1.0 : n.length));
            for (int c : n.children) graft(c, id);
        };
        graft(tree.root, joined.root);
        out.family_trees.push_back(std::move(tree));
    }
    joined.rooted = joined.nodes[static_cast<std::size_t>(joined.root)].children.size() == 2;
    out.tree = std::move(joined);
    out.corpus.alphabet = estimate_frequencies(out.corpus);
    return out;
}

}  // namespace lexiphylo
