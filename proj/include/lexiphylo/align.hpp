#pragma once
// String comparison kernels: edit distance and affine-gap PMI alignment with
// the licit-alignment restriction (a gap in one string is never directly
// followed by a gap in the other).

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lexiphylo/corpus.hpp"

namespace lexiphylo {

struct PmiModel {
    std::array<double, kAlphabetSize * kAlphabetSize> scores{};
    double gap_open = -2.330;    // first gap column of a run
    double gap_extend = -1.276;  // every further column of the run
    SoundClassAlphabet alphabet;

    double score(Symbol a, Symbol b) const noexcept { return scores[a * kAlphabetSize + b]; }
    double& at(Symbol a, Symbol b) noexcept { return scores[a * kAlphabetSize + b]; }
};

struct Alignment {
    static constexpr int kGap = -1;

    std::vector<int> gapped_a;  // symbol index or kGap
    std::vector<int> gapped_b;
    double score = 0.0;

    std::pair<std::string, std::string> render() const;
};

std::size_t levenshtein(const Form& x, const Form& y);

// levenshtein / longer length; throws EmptyForm if either form is empty.
double ldn(const Form& x, const Form& y);

// One optimal unit-cost alignment (diagonal preferred on ties), as
// (x index or -1, y index or -1) columns.
std::vector<std::pair<int, int>> levenshtein_alignment(const Form& x, const Form& y);

// Maximal aggregate PMI over licit alignments. A gap run of length k costs
// gap_open + (k-1)*gap_extend, terminal runs included. Ties in traceback
// prefer a match column, then a gap in x, then a gap in y.
Alignment align_pmi(const Form& x, const Form& y, const PmiModel& model);

// Score of align_pmi without the traceback.
double pmi_similarity(const Form& x, const Form& y, const PmiModel& model);

// Scores: header of 41 symbols then 41 rows of 41 values. Gap companion:
// header "gap_open,gap_extend" and one value row.
void write_model_scores(const PmiModel& model, std::ostream& out);
void write_model_gaps(const PmiModel& model, std::ostream& out);
void read_model_scores(PmiModel& model, std::istream& in);
void read_model_gaps(PmiModel& model, std::istream& in);

// "model.csv" -> "model.gaps.csv"
std::string gaps_path_for(const std::string& scores_path);
void save_model(const PmiModel& model, const std::string& scores_path);
PmiModel load_model(const std::string& scores_path);

}  // namespace lexiphylo
