// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#ifndef CURATE_EDITS_HPP
#define CURATE_EDITS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "curate/data.hpp"

namespace curate::data {

// Unit modifications. Positions refer to the base state's coordinates;
// sequence inserts are anchored between base positions (`gap` = insert
// before base token `gap`, `sub` orders multiple inserts at one gap), which
// is what makes an edit set order-independent to apply.
struct CellSet {
  std::size_t row = 0;
  std::size_t col = 0;
  Scalar old_value;
  Scalar new_value;
  bool operator==(const CellSet&) const = default;
};

struct SeqInsert {
  std::size_t gap = 0;
  std::uint32_t sub = 0;
  std::string token;
  bool operator==(const SeqInsert&) const = default;
};

struct SeqDelete {
  std::size_t pos = 0;
  std::string token;
  bool operator==(const SeqDelete&) const = default;
};

struct TupleAdd {
  std::int64_t entity = 0;
  std::int64_t column = 0;
  Scalar value;
  bool operator==(const TupleAdd&) const = default;
};

struct TupleRemove {
  std::int64_t entity = 0;
  std::int64_t column = 0;
  Scalar value;
  bool operator==(const TupleRemove&) const = default;
};

using Edit = std::variant<CellSet, SeqInsert, SeqDelete, TupleAdd, TupleRemove>;

// Stable content-derived id, 16 hex digits with a one-letter kind prefix.
std::string edit_id(const Edit& e);
std::string describe_edit(const Edit& e);

struct EditRecord {
  Edit edit;
  std::string id;
  std::string stratum;  // file/part name; empty for single-state deltas

  bool operator==(const EditRecord&) const = default;
};

// The delta between two states. |edits| equals the distance between base
// and target under the format's metric, and no two edits touch the same
// unit, so they can be applied in any order.
struct EditSet {
  std::string base_fingerprint;
  std::vector<EditRecord> edits;

  bool operator==(const EditSet&) const = default;
  std::size_t size() const { return edits.size(); }
  bool empty() const { return edits.empty(); }
};

EditSet make_edit_set(const DataState& base, std::vector<Edit> edits,
                      const std::string& stratum = "");

std::string serialize_edit_set(const EditSet& set);
EditSet deserialize_edit_set(std::string_view text);
EditSet load_edit_set(const std::string& path);
void save_edit_set(const EditSet& set, const std::string& path);

// Distances. All three are proper metrics into the nonnegative integers.
std::size_t hamming_distance(const FixedTable& a, const FixedTable& b);
std::size_t symmetric_difference_distance(const IndexedTable& a,
                                          const IndexedTable& b);
// Addition-deletion edit distance: |a| + |b| - 2*|LCS(a, b)|.
std::size_t edit_distance(const TokenSequence& a, const TokenSequence& b);
std::size_t distance(const DataState& a, const DataState& b);

// One longest common subsequence. When either input has all-distinct tokens
// and the shared tokens appear in a consistent order, the LCS is unique;
// outside that regime the DP backtrace deterministically prefers matches
// with the smallest index in `a`.
TokenSequence lcs(const TokenSequence& a, const TokenSequence& b);

// Minimal addition-deletion edit script from `a` to `b`. Falls back to the
// classic greedy O(ND) algorithm when neither side has distinct tokens;
// with a distinct side the script is recovered from a patience-style
// longest increasing subsequence over match positions, which is exact.
EditSet sequence_diff(const TokenSequence& a, const TokenSequence& b);

// Format-dispatching delta: one CellSet per changed cell, tuple
// add/remove pairs for indexed tables, token diff for sequences.
EditSet enumerate_edits(const DataState& base, const DataState& target);

// Applies a delta; the result is independent of edit order. Rejects stale
// deltas (fingerprint mismatch) and edits whose preconditions fail.
DataState apply_edits(const DataState& base, const EditSet& delta);
DataState apply_single_edit(const DataState& base, const Edit& e);

// d(base + e, truth) - d(base, truth). The reference oracle: recomputes the
// distance before and after. Always in {-1, 0, +1}.
int edit_distance_delta(const DataState& base, const DataState& truth,
                        const Edit& e);

struct SequenceAssumptionReport {
  bool sequence_distinct = false;
  bool truth_distinct = false;
  bool order_consistent = false;
  std::string detail;

  bool all_pass() const {
    return sequence_distinct && truth_distinct && order_consistent;
  }
};

// Checks the distinct-elements and shared-order conditions under which
// sequence distance deltas are exactly additive and the LCS is unique.
SequenceAssumptionReport check_sequence_assumptions(const TokenSequence& s,
                                                    const TokenSequence& truth);

// Rendering of one edit as a small unified-diff style hunk against the base
// state, for review documents. Returns the 1-based line anchor and hunk
// lines (including the @@ header).
struct EditHunk {
  std::size_t line = 1;
  std::vector<std::string> lines;
};
EditHunk render_hunk(const DataState& base, const Edit& e,
                     std::size_t context = 2);

}  // namespace curate::data

#endif  // CURATE_EDITS_HPP
