// Writes a synthetic corpus, its true cognate classes and the generating tree.
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lexiphylo/error.hpp"
#include "lexiphylo/synth.hpp"

using namespace lexiphylo;

int main(int argc, char** argv) {
    CLI::App app{"synthetic word lists with known history"};
    SynthOptions o;
    std::uint64_t seed = 1;
    std::string prefix;
    app.add_option("--out-prefix", prefix, "writes <prefix>.corpus.csv, .gold.csv, .tre")->required();
    app.add_option("--seed", seed);
    app.add_option("--families", o.families);
    app.add_option("--doculects", o.doculects_per_family);
    app.add_option("--family-prefix", o.family_prefix);
    app.add_option("--replacement-rate", o.replacement_rate);
    app.add_option("--edit-rate", o.edit_rate);
    CLI11_PARSE(app, argc, argv);

    try {
        const auto data = synthesize(o, seed);
        std::ofstream corpus(prefix + ".corpus.csv", std::ios::binary);
        write_corpus(data.corpus, corpus);
        std::ofstream gold(prefix + ".gold.csv", std::ios::binary);
        write_gold(data.gold, gold);
        save_newick(data.tree, prefix + ".tre");
        if (!corpus || !gold) fail(ErrorCode::Io, "cannot write under " + prefix);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    return 0;
}
