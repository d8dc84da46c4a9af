#include "stancelab/csv.hpp"

#include "stancelab/error.hpp"

namespace stancelab::csv {

bool Reader::next(Record& out) {
  out.fields.clear();
  out.line = line_;
  if (in_.peek() == std::char_traits<char>::eof()) return false;

  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  for (;;) {
    const int c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) {
        throw Error("csv: unterminated quoted field starting on line " +
                    std::to_string(out.line));
      }
      out.fields.push_back(std::move(field));
      return true;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else if (ch == sep_) {
      out.fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (ch == '\n') {
      ++line_;
      if (!field.empty() && field.back() == '\r' && !field_was_quoted) field.pop_back();
      out.fields.push_back(std::move(field));
      return true;
    } else if (ch == '\r' && in_.peek() == '\n') {
      // handled with the newline
    } else {
      field.push_back(ch);
    }
  }
}

std::string quote(std::string_view field, char sep) {
  const bool needs = field.find_first_of(std::string{'"', '\n', '\r', sep}) !=
                     std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields, char sep) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(sep);
    out += quote(fields[i], sep);
  }
  return out;
}

}  // namespace stancelab::csv
