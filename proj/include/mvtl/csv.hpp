#pragma once

#include "mvtl/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mvtl::csv {

struct NumericTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> lines;  // source line of each row
};

struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;
};

std::vector<std::string> split(std::string_view line, char sep = ',');

// Finite decimal number; NaN/Inf and trailing garbage are rejected.
double parse_number(std::string_view cell, const std::string& file, std::size_t line);

// 17 significant digits: reparses to the identical double.
std::string format_number(double value);

std::string join(const std::vector<std::string>& cells, char sep = ',');

/// Header row followed by numeric rows of the same width. Lines starting with
/// '#' and blank lines are skipped.
NumericTable read_numeric(const std::string& path);

TextTable read_text(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace mvtl::csv
