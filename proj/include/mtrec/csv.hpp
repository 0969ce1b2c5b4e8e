#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mtrec::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line on which the record starts
};

/// Splits RFC 4180 text into records. Quoted fields may contain commas,
/// doubled quotes and line breaks. Throws ParseError on an unterminated quote.
std::vector<Record> parse(std::string_view text);

/// Quotes `field` when it contains a comma, quote or line break.
std::string escape(std::string_view field);

}  // namespace mtrec::csv
