#pragma once
// Synthetic language families for tests and the bundled mini corpus: random
// family trees, proto word lists evolved by lexical replacement, lineage-wide
// regular sound changes and sporadic edits, with true cognate classes.

#include <cstdint>
#include <string>
#include <vector>

#include "lexiphylo/corpus.hpp"
#include "lexiphylo/phylo.hpp"
#include "lexiphylo/rng.hpp"

namespace lexiphylo {

// Random binary tree over labels (Yule splits), exponential branch lengths.
Tree random_tree(const std::vector<std::string>& labels, Rng& rng, double mean_branch = 0.2);
// Pure-birth process in time: ultrametric, every tip at the given depth.
Tree yule_tree(const std::vector<std::string>& labels, Rng& rng, double depth = 1.0);

struct SynthOptions {
    std::size_t families = 2;
    std::size_t doculects_per_family = 15;
    double depth = 1.0;               // root-to-tip time of each family
    double replacement_rate = 0.25;   // per concept per unit branch length
    double sound_change_rate = 3.0;   // lineage-wide changes per unit branch length
    double edit_rate = 0.15;          // sporadic edits per segment per unit branch length
    double synonym_probability = 0.03;
    double missing_probability = 0.02;
    std::string family_prefix = "F";
};

struct SynthData {
    Corpus corpus;
    GoldStandard gold;
    std::vector<Tree> family_trees;
    Tree tree;  // families joined at a root
};

SynthData synthesize(const SynthOptions& options, std::uint64_t seed);

}  // namespace lexiphylo
