#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace stancelab::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

// RFC-4180 reader: quoted fields may contain separators, doubled quotes and
// newlines. A trailing '\r' before the newline is dropped.
class Reader {
public:
  explicit Reader(std::istream& in, char sep = ',') : in_(in), sep_(sep) {}

  // False at end of input.
  bool next(Record& out);

private:
  std::istream& in_;
  char sep_;
  std::size_t line_ = 1;
};

std::string quote(std::string_view field, char sep = ',');
std::string join(const std::vector<std::string>& fields, char sep = ',');

}  // namespace stancelab::csv
