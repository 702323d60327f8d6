#pragma once

// Minimal RFC 4180 CSV reading and writing. Numbers are written in the
// shortest form that round-trips exactly.

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kronocov/errors.hpp"

namespace kronocov::csv {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  Writer& row(std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << quote(fields[i]);
    }
    os_ << "\r\n";
    return *this;
  }
  Writer& row(std::initializer_list<std::string> fields) {
    return row(std::span<const std::string>(fields.begin(), fields.size()));
  }

 private:
  std::ostream& os_;
};

/// Parses the whole stream into records. Quoted fields may contain commas,
/// doubled quotes and line breaks. `lines[i]` is the 1-based line on which
/// record i starts.
struct Table {
  std::vector<std::vector<std::string>> records;
  std::vector<long> lines;
};

inline Table read(std::istream& is) {
  Table t;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_started = false, record_started = false;
  long line = 1, record_line = 1;
  char c;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    t.records.push_back(std::move(record));
    t.lines.push_back(record_line);
    record.clear();
    record_started = false;
  };
  while (is.get(c)) {
    if (!record_started) {
      record_started = true;
      record_line = line;
    }
    if (in_quotes) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      if (is.peek() == '\n') is.get(c);
      end_record();
      ++line;
    } else if (c == '\n') {
      end_record();
      ++line;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", record_line);
  if (record_started) end_record();
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read(in);
}

}  // namespace kronocov::csv
