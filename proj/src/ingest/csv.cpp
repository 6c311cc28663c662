#include "mobgen/ingest/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <utility>

#include "mobgen/errors.hpp"

namespace mobgen::ingest {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

LoadResult parse_csv(std::istream& in) {
  LoadResult result;
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV is empty: missing header row");
  const auto header = split_fields(line);
  std::array<std::size_t, kCsvColumns.size()> column{};
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
    bool found = false;
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (trim(header[h]) == kCsvColumns[c]) {
        column[c] = h;
        found = true;
        break;
      }
    }
    if (!found) throw DataError("CSV header is missing column '" + std::string(kCsvColumns[c]) + "'");
  }

  std::set<std::pair<std::string, int>> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      result.rejected.push_back({line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                              std::to_string(fields.size())});
      continue;
    }
    TractRecord rec;
    rec.tract_id = trim(fields[column[0]]);
    std::string error;
    if (rec.tract_id.empty()) error = "empty tract_id";
    if (error.empty() && !parse_number(trim(fields[column[1]]), rec.year)) {
      error = "unparseable year '" + fields[column[1]] + "'";
    }
    for (std::size_t f = 0; error.empty() && f < kFeatureCount; ++f) {
      const std::string cell = trim(fields[column[f + 2]]);
      if (!parse_number(cell, rec.feature(f))) {
        error = "unparseable " + std::string(kFeatureNames[f]) + " '" + cell + "'";
      }
    }
    if (error.empty()) {
      if (auto violation = validate(rec)) error = *violation;
    }
    if (error.empty() && !seen.emplace(rec.tract_id, rec.year).second) {
      error = "duplicate (tract_id, year) = (" + rec.tract_id + ", " + std::to_string(rec.year) + ")";
    }
    if (!error.empty()) {
      result.rejected.push_back({line_no, std::move(error)});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

LoadResult load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in);
}

void write_csv(std::ostream& out, const std::vector<TractRecord>& records) {
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) out << (c ? "," : "") << kCsvColumns[c];
  out << '\n';
  for (const TractRecord& r : records) {
    out << r.tract_id << ',' << r.year;
    for (std::size_t f = 0; f < kFeatureCount; ++f) out << ',' << format_real(r.feature(f));
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const std::vector<TractRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(out, records);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace mobgen::ingest
