// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace assemblage::csv {

// A physical line of the input and its 1-based line number.
struct Line {
  std::size_t number;
  std::string_view text;
};

// Splits text into lines, accepting LF or CRLF and dropping a UTF-8 BOM.
std::vector<Line> split_lines(std::string_view text);

// Splits one record on commas. Double-quoted fields may contain commas and
// doubled quotes. Returns false on an unterminated quote.
bool split_fields(std::string_view line, std::vector<std::string>& out);

// Quotes a field only when it contains a comma, quote or leading/trailing
// space.
std::string escape(std::string_view field);

std::string format_double(double v);

}  // namespace assemblage::csv
