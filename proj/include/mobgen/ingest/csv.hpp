#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mobgen/ingest/records.hpp"

namespace mobgen::ingest {

struct RowError {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string message;
};

struct LoadResult {
  std::vector<TractRecord> records;
  std::vector<RowError> rejected;
};

/// Parses the 16-column tract CSV. Columns are located by header name, so
/// order is free. A missing column throws DataError. Rows that fail to parse,
/// violate record invariants or repeat a (tract_id, year) pair are rejected
/// and reported with their line number.
LoadResult parse_csv(std::istream& in);
/// IoError if the file cannot be opened.
LoadResult load_csv(const std::filesystem::path& path);

/// Writes the canonical header and one row per record, shortest round-trip
/// formatting for reals.
void write_csv(std::ostream& out, const std::vector<TractRecord>& records);
void save_csv(const std::filesystem::path& path, const std::vector<TractRecord>& records);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

}  // namespace mobgen::ingest
