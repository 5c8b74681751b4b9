#include "lexiphylo/csv.hpp"

#include <fstream>

#include "lexiphylo/error.hpp"

namespace lexiphylo::csv {

bool Reader::next(Row& row) {
    row.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    record_line_ = line_ + 1;

    int c;
    while ((c = in_.get()) != EOF) {
        any = true;
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line_;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (ch == '\r') {
            // tolerated before \n
        } else if (ch == '\n') {
            ++line_;
            row.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes)
        fail(ErrorCode::ParseError, "unterminated quoted field starting at line " +
                                        std::to_string(record_line_));
    if (!any) return false;
    ++line_;
    row.push_back(std::move(field));
    return true;
}

std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        out << quote(row[i]);
    }
    out << '\n';
}

std::vector<Row> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    Reader reader(in);
    std::vector<Row> rows;
    Row row;
    while (reader.next(row)) rows.push_back(row);
    return rows;
}

}  // namespace lexiphylo::csv
