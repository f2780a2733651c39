#include "mvtl/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mvtl::csv {

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> cells;
    std::size_t begin = 0;
    while (true) {
        const auto pos = line.find(sep, begin);
        cells.emplace_back(line.substr(begin, pos == std::string_view::npos ? std::string_view::npos : pos - begin));
        if (pos == std::string_view::npos) break;
        begin = pos + 1;
    }
    return cells;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename Row, typename Convert>
void read_table(const std::string& path, std::vector<std::string>& header, std::vector<Row>& rows,
                std::vector<std::size_t>& lines, Convert convert) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file", path, 0);
    std::string line;
    std::size_t number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++number;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto cells = split(body);
        for (auto& c : cells) c = std::string(trim(c));
        if (!have_header) {
            header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != header.size()) {
            throw ParseError("row has " + std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(header.size()),
                             path, number);
        }
        rows.push_back(convert(cells, number));
        lines.push_back(number);
    }
    if (!have_header) throw ParseError("missing header row", path, 0);
}

}  // namespace

double parse_number(std::string_view cell, const std::string& file, std::size_t line) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc() || ptr != last) {
        throw ParseError("non-numeric cell '" + std::string(cell) + "'", file, line);
    }
    if (!std::isfinite(value)) throw ParseError("non-finite value '" + std::string(cell) + "'", file, line);
    return value;
}

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string join(const std::vector<std::string>& cells, char sep) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += sep;
        out += cells[i];
    }
    return out;
}

NumericTable read_numeric(const std::string& path) {
    NumericTable t;
    read_table(path, t.header, t.rows, t.lines, [&](const std::vector<std::string>& cells, std::size_t line) {
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_number(c, path, line));
        return row;
    });
    return t;
}

TextTable read_text(const std::string& path) {
    TextTable t;
    read_table(path, t.header, t.rows, t.lines,
               [](const std::vector<std::string>& cells, std::size_t) { return cells; });
    return t;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file", path, 0);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << content;
    if (!out) throw Error("write failed for " + path);
}

}  // namespace mvtl::csv
