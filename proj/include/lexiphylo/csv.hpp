#pragma once
// Minimal RFC-4180 reader/writer. Quoted fields may contain commas, quotes
// ("" escape) and newlines.

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace lexiphylo::csv {

using Row = std::vector<std::string>;

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Reads the next record. Returns false at end of input.
    bool next(Row& row);

    // 1-based physical line on which the last record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

std::string quote(std::string_view field);
void write_row(std::ostream& out, const Row& row);

// Reads a whole file; throws Error(Io) if it cannot be opened.
std::vector<Row> read_file(const std::string& path);

}  // namespace lexiphylo::csv
