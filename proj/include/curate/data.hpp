// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#ifndef CURATE_DATA_HPP
#define CURATE_DATA_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "curate/common.hpp"

namespace curate::data {

enum class Format { fixed_table, indexed_table, token_sequence };

const char* format_name(Format f);
Format parse_format(std::string_view name);

// Whitespace-delimited token stream. Tokens are non-empty and contain no
// whitespace, with one sanctioned exception: a line break is preserved as
// the distinguished single-character token "\n".
struct TokenSequence {
  static constexpr const char* kLineBreak = "\n";

  std::vector<std::string> tokens;

  bool operator==(const TokenSequence&) const = default;
  std::size_t size() const { return tokens.size(); }
};

// Tokenize splits on whitespace runs; every '\n' becomes one line-break
// token ("\r\n" counts as one). Detokenize is the canonical serialization:
// single spaces between word tokens, line-break tokens emitted verbatim.
TokenSequence tokenize(std::string_view text);
std::string detokenize(const TokenSequence& seq);
void validate_tokens(const TokenSequence& seq);

// N x L matrix of scalar cells. The shape is fixed for the lifetime of a
// value; edits are cell corrections only.
struct FixedTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Scalar>> rows;

  bool operator==(const FixedTable&) const = default;
  std::size_t row_count() const { return rows.size(); }
  std::size_t col_count() const { return columns.size(); }
  std::size_t cell_count() const { return row_count() * col_count(); }
  const Scalar& at(std::size_t r, std::size_t c) const;
  Scalar& at(std::size_t r, std::size_t c);
  void validate() const;
};

// Set of (entity, column, value) tuples, unique per (entity, column).
struct IndexedTable {
  using Key = std::pair<std::int64_t, std::int64_t>;

  std::map<Key, Scalar> tuples;

  bool operator==(const IndexedTable&) const = default;
  std::size_t size() const { return tuples.size(); }
};

using DataState = std::variant<FixedTable, IndexedTable, TokenSequence>;

Format format_of(const DataState& state);

// Canonical text serializations: fixed table as CSV with a header row,
// indexed table as CSV with columns entity,column,value, token sequence as
// plain UTF-8 text.
std::string serialize(const DataState& state);
DataState deserialize(Format format, std::string_view text);
DataState load_state(Format format, const std::string& path);
void save_state(const DataState& state, const std::string& path);

// Content hash of the canonical serialization, as 16 hex digits.
std::string fingerprint(const DataState& state);

// Minimal RFC-4180 CSV support used by the canonical table formats.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace curate::data

#endif  // CURATE_DATA_HPP
