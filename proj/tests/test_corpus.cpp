#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "lexiphylo/corpus.hpp"
#include "lexiphylo/error.hpp"

using namespace lexiphylo;

using fixture::code;
using fixture::code_of;

TEST_CASE("alphabet has 41 distinct symbols") {
    CHECK(SoundClassAlphabet::kSymbols.size() == kAlphabetSize);
    std::set<char> seen(SoundClassAlphabet::kSymbols.begin(), SoundClassAlphabet::kSymbols.end());
    CHECK(seen.size() == kAlphabetSize);
    for (std::size_t i = 0; i < kAlphabetSize; ++i)
        CHECK(SoundClassAlphabet::index_of(SoundClassAlphabet::symbol(static_cast<Symbol>(i))) == i);
    CHECK_FALSE(SoundClassAlphabet::index_of('A').has_value());
}

TEST_CASE("bundled concept file matches the built-in list") {
    std::ifstream in(LEXIPHYLO_DATA_DIR "/asjp40_concepts.v1.txt");
    REQUIRE(in);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) lines.push_back(l);
    CHECK(lines == asjp_concepts());
    CHECK(lines.size() == 40);
}

TEST_CASE("diacritics") {
    CHECK(strip_diacritics("hund").text() == "hund");
    CHECK(strip_diacritics("t\"ri*").text() == "tri");
    CHECK(strip_diacritics("kw~a").text() == "ka");
    CHECK(strip_diacritics("ndz$a").text() == "na");
    CHECK(strip_diacritics("  a%b ").text() == "ab");
    CHECK(strip_diacritics("ts~").size() == 1);
    CHECK(code_of([] { strip_diacritics("~a"); }) == code(ErrorCode::UnknownSymbol));
    CHECK(code_of([] { strip_diacritics("abc+"); }) == code(ErrorCode::UnknownSymbol));
    CHECK(code_of([] { strip_diacritics("  "); }) == code(ErrorCode::EmptyForm));
    CHECK(code_of([] { strip_diacritics("**"); }) == code(ErrorCode::EmptyForm));
}

TEST_CASE("corpus parsing") {
    const auto c = fixture::english();
    REQUIRE(c.doculects.size() == 2);
    CHECK(c.doculects[0].id == "ANG");
    CHECK(c.doculects[0].classification_path == std::vector<std::string>{"IE", "Germanic"});
    const auto dog = *c.concept_index("dog");
    CHECK(c.doculects[1].entries[dog][0].text() == "dag");
    CHECK_FALSE(c.doculects[1].has(0));

    SUBCASE("synonyms in one field") {
        std::istringstream in(fixture::corpus_header() + "X,X,F,F,1.5,2,I,\"ego, mi\"\n");
        const auto x = read_corpus(in);
        CHECK(x.doculects[0].entries[*x.concept_index("I")].size() == 2);
        CHECK(*x.doculects[0].latitude == 1.5);
    }
    SUBCASE("unknown concept") {
        std::istringstream in(fixture::corpus_header() + "X,X,F,F,,,cat,kat\n");
        CHECK(code_of([&] { read_corpus(in); }) == code(ErrorCode::UnknownConcept));
    }
    SUBCASE("split doculect rows") {
        std::istringstream in(fixture::corpus_header() + "X,X,F,F,,,I,a\nY,Y,F,F,,,I,a\nX,X,F,F,,,you,b\n");
        CHECK(code_of([&] { read_corpus(in); }) == code(ErrorCode::DuplicateDoculect));
    }
    SUBCASE("bad header") {
        std::istringstream in("id,concept\n");
        CHECK(code_of([&] { read_corpus(in); }) == code(ErrorCode::ParseError));
    }
    SUBCASE("non-natural languages are dropped") {
        std::istringstream in(fixture::corpus_header() + "X,X,Artificial,Artificial,,,I,a\n"
                                                         "Y,Y,IE,IE/Reconstructed,,,I,a\n"
                                                         "Z,Z,IE,IE,,,I,a\n");
        std::string text = in.str();
        std::istringstream a(text), b(text);
        CHECK(read_corpus(a).doculects.size() == 1);
        LoadOptions keep;
        keep.exclude_nonnatural = false;
        CHECK(read_corpus(b, keep).doculects.size() == 3);
    }
}

TEST_CASE("corpus write/read round trip") {
    const auto c = fixture::english();
    std::ostringstream out;
    write_corpus(c, out);
    std::istringstream in(out.str());
    const auto back = read_corpus(in);
    REQUIRE(back.doculects.size() == c.doculects.size());
    for (std::size_t d = 0; d < c.doculects.size(); ++d)
        for (std::size_t k = 0; k < c.concepts.size(); ++k) {
            REQUIRE(back.doculects[d].entries[k].size() == c.doculects[d].entries[k].size());
            for (std::size_t s = 0; s < c.doculects[d].entries[k].size(); ++s)
                CHECK(back.doculects[d].entries[k][s].segments == c.doculects[d].entries[k][s].segments);
        }
}

TEST_CASE("symbol frequencies sum to one") {
    const auto c = fixture::english();
    const auto counts = symbol_counts(c);
    std::uint64_t total = 0;
    for (auto n : counts) total += n;
    CHECK(total == 4 + 5 + 3 + 3);
    double sum = 0;
    for (double q : c.alphabet.frequency) sum += q;
    CHECK(sum == doctest::Approx(1.0));
}
