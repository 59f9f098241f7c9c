// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#include "curate/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "curate/rng.hpp"

namespace curate {

Scalar parse_scalar(std::string_view text) {
  // Canonical integers only: optional minus, no leading zeros, fits int64.
  if (!text.empty() && text.size() <= 20) {
    std::size_t i = text[0] == '-' ? 1 : 0;
    bool digits = i < text.size();
    for (std::size_t k = i; k < text.size(); ++k) {
      if (!std::isdigit(static_cast<unsigned char>(text[k]))) {
        digits = false;
        break;
      }
    }
    bool canonical = digits && !(text[i] == '0' && text.size() > i + 1) &&
                     !(text == "-0");
    if (canonical) {
      try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(std::string(text), &pos);
        if (pos == text.size()) return v;
      } catch (const std::exception&) {
        // out of range: keep as string
      }
    }
  }
  return std::string(text);
}

std::string format_scalar(const Scalar& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) {
    return std::to_string(*i);
  }
  return std::get<std::string>(value);
}

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace curate

namespace curate::data {

const char* format_name(Format f) {
  switch (f) {
    case Format::fixed_table: return "table";
    case Format::indexed_table: return "indexed";
    case Format::token_sequence: return "seq";
  }
  return "?";
}

Format parse_format(std::string_view name) {
  if (name == "table") return Format::fixed_table;
  if (name == "indexed") return Format::indexed_table;
  if (name == "seq") return Format::token_sequence;
  fail(ErrorCode::invalid_argument,
       "unknown format '" + std::string(name) + "' (expected table|indexed|seq)");
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      seq.tokens.push_back(word);
      word.clear();
    }
  };
  for (char c : text) {
    if (c == '\n') {
      flush();
      seq.tokens.emplace_back(TokenSequence::kLineBreak);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      word.push_back(c);
    }
  }
  flush();
  return seq;
}

std::string detokenize(const TokenSequence& seq) {
  std::string out;
  bool pending_space = false;
  for (const auto& tok : seq.tokens) {
    if (tok == TokenSequence::kLineBreak) {
      out.push_back('\n');
      pending_space = false;
    } else {
      if (pending_space) out.push_back(' ');
      out += tok;
      pending_space = true;
    }
  }
  return out;
}

void validate_tokens(const TokenSequence& seq) {
  for (const auto& tok : seq.tokens) {
    if (tok == TokenSequence::kLineBreak) continue;
    if (tok.empty()) fail(ErrorCode::invalid_argument, "empty token");
    for (char c : tok) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        fail(ErrorCode::invalid_argument,
             "token contains whitespace: '" + tok + "'");
      }
    }
  }
}

const Scalar& FixedTable::at(std::size_t r, std::size_t c) const {
  if (r >= row_count() || c >= col_count()) {
    fail(ErrorCode::dimension_mismatch,
         "cell (" + std::to_string(r) + "," + std::to_string(c) +
             ") outside table " + std::to_string(row_count()) + "x" +
             std::to_string(col_count()));
  }
  return rows[r][c];
}

Scalar& FixedTable::at(std::size_t r, std::size_t c) {
  return const_cast<Scalar&>(static_cast<const FixedTable&>(*this).at(r, c));
}

void FixedTable::validate() const {
  for (const auto& row : rows) {
    if (row.size() != columns.size()) {
      fail(ErrorCode::validation_failed,
           "ragged table: row has " + std::to_string(row.size()) +
               " cells, header has " + std::to_string(columns.size()));
    }
  }
}

Format format_of(const DataState& state) {
  if (std::holds_alternative<FixedTable>(state)) return Format::fixed_table;
  if (std::holds_alternative<IndexedTable>(state)) return Format::indexed_table;
  return Format::token_sequence;
}

std::string csv_escape(std::string_view field) {
  bool needs_quote = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quote) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(row);
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // swallow; \r\n handled by the \n branch
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (field_started || !field.empty() || !row.empty()) end_row();
  if (in_quotes) fail(ErrorCode::io_error, "unterminated quote in CSV");
  return rows;
}

namespace {

std::string serialize_fixed(const FixedTable& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out.push_back(',');
    out += csv_escape(t.columns[c]);
  }
  out.push_back('\n');
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(',');
      out += csv_escape(format_scalar(row[c]));
    }
    out.push_back('\n');
  }
  return out;
}

std::string serialize_indexed(const IndexedTable& t) {
  std::string out = "entity,column,value\n";
  for (const auto& [key, value] : t.tuples) {
    out += std::to_string(key.first);
    out.push_back(',');
    out += std::to_string(key.second);
    out.push_back(',');
    out += csv_escape(format_scalar(value));
    out.push_back('\n');
  }
  return out;
}

FixedTable parse_fixed(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty()) {
    fail(ErrorCode::io_error, "fixed table needs a header row");
  }
  FixedTable t;
  t.columns = rows[0];
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != t.columns.size()) {
      fail(ErrorCode::validation_failed,
           "row " + std::to_string(i) + " has " +
               std::to_string(rows[i].size()) + " cells, expected " +
               std::to_string(t.columns.size()));
    }
    std::vector<Scalar> cells;
    cells.reserve(rows[i].size());
    for (const auto& f : rows[i]) cells.push_back(parse_scalar(f));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

IndexedTable parse_indexed(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty() || rows[0] != std::vector<std::string>{"entity", "column", "value"}) {
    fail(ErrorCode::io_error, "indexed table needs header entity,column,value");
  }
  IndexedTable t;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) {
      fail(ErrorCode::validation_failed,
           "indexed row " + std::to_string(i) + " has " +
               std::to_string(rows[i].size()) + " fields");
    }
    std::int64_t e = 0, k = 0;
    try {
      e = std::stoll(rows[i][0]);
      k = std::stoll(rows[i][1]);
    } catch (const std::exception&) {
      fail(ErrorCode::validation_failed,
           "indexed row " + std::to_string(i) + ": non-integer key");
    }
    auto [it, inserted] =
        t.tuples.emplace(IndexedTable::Key{e, k}, parse_scalar(rows[i][2]));
    (void)it;
    if (!inserted) {
      fail(ErrorCode::validation_failed,
           "duplicate (entity,column) = (" + rows[i][0] + "," + rows[i][1] + ")");
    }
  }
  return t;
}

}  // namespace

std::string serialize(const DataState& state) {
  if (const auto* t = std::get_if<FixedTable>(&state)) return serialize_fixed(*t);
  if (const auto* t = std::get_if<IndexedTable>(&state)) return serialize_indexed(*t);
  return detokenize(std::get<TokenSequence>(state));
}

DataState deserialize(Format format, std::string_view text) {
  switch (format) {
    case Format::fixed_table: return parse_fixed(text);
    case Format::indexed_table: return parse_indexed(text);
    case Format::token_sequence: return tokenize(text);
  }
  fail(ErrorCode::invalid_argument, "bad format");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::io_error, "short write to " + path);
}

DataState load_state(Format format, const std::string& path) {
  return deserialize(format, read_file(path));
}

void save_state(const DataState& state, const std::string& path) {
  write_file(path, serialize(state));
}

std::string fingerprint(const DataState& state) {
  std::string canon = serialize(state);
  std::uint64_t h = fnv1a64(format_name(format_of(state)));
  h = fnv1a64(canon, h);
  return to_hex(h);
}

}  // namespace curate::data
