// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#include "curate/edits.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace curate::data {

namespace {

std::string canonical_edit_text(const Edit& e) {
  std::ostringstream ss;
  if (const auto* c = std::get_if<CellSet>(&e)) {
    ss << "cell:" << c->row << ':' << c->col << ':' << format_scalar(c->old_value)
       << ':' << format_scalar(c->new_value);
  } else if (const auto* i = std::get_if<SeqInsert>(&e)) {
    ss << "ins:" << i->gap << ':' << i->sub << ':' << i->token;
  } else if (const auto* d = std::get_if<SeqDelete>(&e)) {
    ss << "del:" << d->pos << ':' << d->token;
  } else if (const auto* a = std::get_if<TupleAdd>(&e)) {
    ss << "tadd:" << a->entity << ':' << a->column << ':' << format_scalar(a->value);
  } else {
    const auto& r = std::get<TupleRemove>(e);
    ss << "trem:" << r.entity << ':' << r.column << ':' << format_scalar(r.value);
  }
  return ss.str();
}

}  // namespace

std::string edit_id(const Edit& e) {
  std::string canon = canonical_edit_text(e);
  char kind = canon[0] == 'c' ? 'c' : canon[0] == 'i' ? 'i'
              : canon[0] == 'd' ? 'd' : canon[1] == 'a' ? 'a' : 'r';
  return std::string(1, kind) + to_hex(fnv1a64(canon));
}

std::string describe_edit(const Edit& e) { return canonical_edit_text(e); }

EditSet make_edit_set(const DataState& base, std::vector<Edit> edits,
                      const std::string& stratum) {
  EditSet set;
  set.base_fingerprint = fingerprint(base);
  set.edits.reserve(edits.size());
  std::unordered_set<std::string> seen;
  for (auto& e : edits) {
    EditRecord rec{std::move(e), "", stratum};
    rec.id = edit_id(rec.edit);
    if (!seen.insert(rec.id).second) {
      fail(ErrorCode::internal, "duplicate edit in set: " + rec.id);
    }
    set.edits.push_back(std::move(rec));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Distances and diff

std::size_t hamming_distance(const FixedTable& a, const FixedTable& b) {
  if (a.row_count() != b.row_count() || a.col_count() != b.col_count()) {
    fail(ErrorCode::dimension_mismatch,
         "table shapes differ: " + std::to_string(a.row_count()) + "x" +
             std::to_string(a.col_count()) + " vs " +
             std::to_string(b.row_count()) + "x" +
             std::to_string(b.col_count()));
  }
  std::size_t d = 0;
  for (std::size_t r = 0; r < a.row_count(); ++r) {
    for (std::size_t c = 0; c < a.col_count(); ++c) {
      if (!scalar_eq(a.rows[r][c], b.rows[r][c])) ++d;
    }
  }
  return d;
}

std::size_t symmetric_difference_distance(const IndexedTable& a,
                                          const IndexedTable& b) {
  std::size_t d = 0;
  auto ia = a.tuples.begin();
  auto ib = b.tuples.begin();
  while (ia != a.tuples.end() || ib != b.tuples.end()) {
    if (ib == b.tuples.end() || (ia != a.tuples.end() && ia->first < ib->first)) {
      ++d;
      ++ia;
    } else if (ia == a.tuples.end() || ib->first < ia->first) {
      ++d;
      ++ib;
    } else {
      // same key; an incorrect value at a valid key costs 2
      if (!scalar_eq(ia->second, ib->second)) d += 2;
      ++ia;
      ++ib;
    }
  }
  return d;
}

namespace {

struct Trimmed {
  std::size_t prefix = 0;
  std::span<const std::string> a;
  std::span<const std::string> b;
};

Trimmed trim_common(const TokenSequence& a, const TokenSequence& b) {
  std::size_t p = 0;
  std::size_t na = a.tokens.size(), nb = b.tokens.size();
  while (p < na && p < nb && a.tokens[p] == b.tokens[p]) ++p;
  std::size_t s = 0;
  while (s < na - p && s < nb - p &&
         a.tokens[na - 1 - s] == b.tokens[nb - 1 - s]) {
    ++s;
  }
  return Trimmed{p, std::span(a.tokens).subspan(p, na - p - s),
                 std::span(b.tokens).subspan(p, nb - p - s)};
}

// token -> position map; empty optional when tokens are not distinct.
std::optional<std::unordered_map<std::string_view, std::size_t>>
distinct_positions(std::span<const std::string> seq) {
  std::unordered_map<std::string_view, std::size_t> map;
  map.reserve(seq.size() * 2);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!map.emplace(seq[i], i).second) return std::nullopt;
  }
  return map;
}

using Matches = std::vector<std::pair<std::size_t, std::size_t>>;

// LCS via longest increasing subsequence over match positions; exact when
// `bpos` indexes a duplicate-free side.
Matches lis_matches(std::span<const std::string> a,
                    const std::unordered_map<std::string_view, std::size_t>& bpos) {
  std::vector<std::pair<std::size_t, std::size_t>> cand;  // (a index, b pos)
  cand.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto it = bpos.find(a[i]);
    if (it != bpos.end()) cand.emplace_back(i, it->second);
  }
  std::vector<std::size_t> tails;  // candidate index with smallest tail bpos
  std::vector<std::ptrdiff_t> parent(cand.size(), -1);
  for (std::size_t c = 0; c < cand.size(); ++c) {
    std::size_t v = cand[c].second;
    auto it = std::lower_bound(tails.begin(), tails.end(), v,
                               [&](std::size_t t, std::size_t val) {
                                 return cand[t].second < val;
                               });
    if (it != tails.begin()) parent[c] = static_cast<std::ptrdiff_t>(*(it - 1));
    if (it == tails.end()) {
      tails.push_back(c);
    } else {
      *it = c;
    }
  }
  Matches out;
  if (!tails.empty()) {
    std::ptrdiff_t c = static_cast<std::ptrdiff_t>(tails.back());
    while (c >= 0) {
      out.emplace_back(cand[static_cast<std::size_t>(c)].first,
                       cand[static_cast<std::size_t>(c)].second);
      c = parent[static_cast<std::size_t>(c)];
    }
    std::reverse(out.begin(), out.end());
  }
  return out;
}

std::vector<int> intern(std::span<const std::string> a,
                        std::span<const std::string> b,
                        std::vector<int>& b_out) {
  std::unordered_map<std::string_view, int> ids;
  ids.reserve((a.size() + b.size()) * 2);
  auto get = [&](const std::string& s) {
    auto [it, _] = ids.emplace(s, static_cast<int>(ids.size()));
    return it->second;
  };
  std::vector<int> a_out;
  a_out.reserve(a.size());
  for (const auto& s : a) a_out.push_back(get(s));
  b_out.clear();
  b_out.reserve(b.size());
  for (const auto& s : b) b_out.push_back(get(s));
  return a_out;
}

// Greedy O(ND) shortest edit script, with the d-step frontier kept for
// backtracking. Used when neither side is duplicate-free.
Matches myers_matches(std::span<const std::string> as,
                      std::span<const std::string> bs) {
  std::vector<int> b;
  std::vector<int> a = intern(as, bs, b);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(b.size());
  std::vector<std::vector<std::ptrdiff_t>> trace;
  std::vector<std::ptrdiff_t> v(static_cast<std::size_t>(n + m) * 2 + 3, 0);
  const std::ptrdiff_t offset = n + m + 1;
  std::ptrdiff_t found_d = -1;
  for (std::ptrdiff_t d = 0; d <= n + m; ++d) {
    trace.emplace_back(v.begin() + (offset - d - 1), v.begin() + (offset + d + 2));
    for (std::ptrdiff_t k = -d; k <= d; k += 2) {
      std::ptrdiff_t x;
      if (k == -d || (k != d && v[static_cast<std::size_t>(offset + k - 1)] <
                                    v[static_cast<std::size_t>(offset + k + 1)])) {
        x = v[static_cast<std::size_t>(offset + k + 1)];
      } else {
        x = v[static_cast<std::size_t>(offset + k - 1)] + 1;
      }
      std::ptrdiff_t y = x - k;
      while (x < n && y < m && a[static_cast<std::size_t>(x)] ==
                                   b[static_cast<std::size_t>(y)]) {
        ++x;
        ++y;
      }
      v[static_cast<std::size_t>(offset + k)] = x;
      if (x >= n && y >= m) {
        found_d = d;
        break;
      }
    }
    if (found_d >= 0) break;
  }
  // Backtrack. trace[d] is the frontier the depth-d sweep read from; its
  // slice covers diagonals [-d-1, d+1], so diagonal k sits at index k+d+1.
  Matches out;
  std::ptrdiff_t x = n, y = m;
  for (std::ptrdiff_t d = found_d; d > 0; --d) {
    const auto& pv = trace[static_cast<std::size_t>(d)];
    auto pva = [&](std::ptrdiff_t k) {
      return pv[static_cast<std::size_t>(k + d + 1)];
    };
    std::ptrdiff_t k = x - y;
    std::ptrdiff_t prev_k;
    if (k == -d || (k != d && pva(k - 1) < pva(k + 1))) {
      prev_k = k + 1;
    } else {
      prev_k = k - 1;
    }
    std::ptrdiff_t prev_x = pva(prev_k);
    std::ptrdiff_t prev_y = prev_x - prev_k;
    while (x > prev_x && y > prev_y) {
      out.emplace_back(static_cast<std::size_t>(x - 1),
                       static_cast<std::size_t>(y - 1));
      --x;
      --y;
    }
    x = prev_x;
    y = prev_y;
  }
  while (x > 0 && y > 0) {
    out.emplace_back(static_cast<std::size_t>(x - 1),
                     static_cast<std::size_t>(y - 1));
    --x;
    --y;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

Matches best_matches(std::span<const std::string> a,
                     std::span<const std::string> b) {
  if (auto bpos = distinct_positions(b)) {
    return lis_matches(a, *bpos);
  }
  if (auto apos = distinct_positions(a)) {
    Matches swapped = lis_matches(b, *apos);
    Matches out;
    out.reserve(swapped.size());
    for (auto& [bj, ai] : swapped) out.emplace_back(ai, bj);
    std::sort(out.begin(), out.end());
    return out;
  }
  return myers_matches(a, b);
}

std::size_t myers_distance_only(std::span<const std::string> as,
                                std::span<const std::string> bs) {
  std::vector<int> b;
  std::vector<int> a = intern(as, bs, b);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(b.size());
  std::vector<std::ptrdiff_t> v(static_cast<std::size_t>(n + m) * 2 + 3, 0);
  const std::ptrdiff_t offset = n + m + 1;
  for (std::ptrdiff_t d = 0; d <= n + m; ++d) {
    for (std::ptrdiff_t k = -d; k <= d; k += 2) {
      std::ptrdiff_t x;
      if (k == -d || (k != d && v[static_cast<std::size_t>(offset + k - 1)] <
                                    v[static_cast<std::size_t>(offset + k + 1)])) {
        x = v[static_cast<std::size_t>(offset + k + 1)];
      } else {
        x = v[static_cast<std::size_t>(offset + k - 1)] + 1;
      }
      std::ptrdiff_t y = x - k;
      while (x < n && y < m && a[static_cast<std::size_t>(x)] ==
                                   b[static_cast<std::size_t>(y)]) {
        ++x;
        ++y;
      }
      v[static_cast<std::size_t>(offset + k)] = x;
      if (x >= n && y >= m) return static_cast<std::size_t>(d);
    }
  }
  return static_cast<std::size_t>(n + m);
}

}  // namespace

std::size_t edit_distance(const TokenSequence& a, const TokenSequence& b) {
  Trimmed t = trim_common(a, b);
  if (t.a.empty()) return t.b.size();
  if (t.b.empty()) return t.a.size();
  if (auto bpos = distinct_positions(t.b)) {
    std::size_t l = lis_matches(t.a, *bpos).size();
    return t.a.size() + t.b.size() - 2 * l;
  }
  if (auto apos = distinct_positions(t.a)) {
    std::size_t l = lis_matches(t.b, *apos).size();
    return t.a.size() + t.b.size() - 2 * l;
  }
  return myers_distance_only(t.a, t.b);
}

std::size_t distance(const DataState& a, const DataState& b) {
  if (format_of(a) != format_of(b)) {
    fail(ErrorCode::format_mismatch, "states have different formats");
  }
  if (const auto* t = std::get_if<FixedTable>(&a)) {
    return hamming_distance(*t, std::get<FixedTable>(b));
  }
  if (const auto* t = std::get_if<IndexedTable>(&a)) {
    return symmetric_difference_distance(*t, std::get<IndexedTable>(b));
  }
  return edit_distance(std::get<TokenSequence>(a), std::get<TokenSequence>(b));
}

TokenSequence lcs(const TokenSequence& a, const TokenSequence& b) {
  const std::size_t n = a.tokens.size(), m = b.tokens.size();
  TokenSequence out;
  if (n == 0 || m == 0) return out;
  // The suffix-length DP keeps the backtrace deterministic: at each step
  // prefer matching the current (smallest) index of `a`.
  if ((n + 1) * (m + 1) <= 16u * 1024u * 1024u) {
    std::vector<std::uint32_t> L((n + 1) * (m + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& {
      return L[i * (m + 1) + j];
    };
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = m; j-- > 0;) {
        at(i, j) = a.tokens[i] == b.tokens[j]
                       ? at(i + 1, j + 1) + 1
                       : std::max(at(i + 1, j), at(i, j + 1));
      }
    }
    std::size_t i = 0, j = 0;
    while (i < n && j < m && at(i, j) > 0) {
      if (a.tokens[i] == b.tokens[j] && at(i + 1, j + 1) + 1 == at(i, j)) {
        out.tokens.push_back(a.tokens[i]);
        ++i;
        ++j;
      } else if (at(i + 1, j) >= at(i, j + 1)) {
        ++i;
      } else {
        ++j;
      }
    }
    return out;
  }
  // Large inputs: recover a (still deterministic) LCS from the diff engine.
  Trimmed t = trim_common(a, b);
  Matches matches = best_matches(t.a, t.b);
  for (std::size_t i = 0; i < t.prefix; ++i) out.tokens.push_back(a.tokens[i]);
  for (auto& [ai, bj] : matches) out.tokens.push_back(std::string(t.a[ai]));
  std::size_t suffix = a.tokens.size() - t.prefix - t.a.size();
  for (std::size_t i = a.tokens.size() - suffix; i < a.tokens.size(); ++i) {
    out.tokens.push_back(a.tokens[i]);
  }
  return out;
}

EditSet sequence_diff(const TokenSequence& a, const TokenSequence& b) {
  Trimmed t = trim_common(a, b);
  Matches matches = best_matches(t.a, t.b);
  matches.emplace_back(t.a.size(), t.b.size());  // sentinel
  std::vector<Edit> edits;
  std::size_t i = 0, j = 0;
  for (const auto& [ma, mb] : matches) {
    while (i < ma) {
      edits.push_back(SeqDelete{t.prefix + i, std::string(t.a[i])});
      ++i;
    }
    std::uint32_t sub = 0;
    while (j < mb) {
      edits.push_back(SeqInsert{t.prefix + i, sub++, std::string(t.b[j])});
      ++j;
    }
    ++i;
    ++j;
  }
  return make_edit_set(DataState{a}, std::move(edits));
}

EditSet enumerate_edits(const DataState& base, const DataState& target) {
  if (format_of(base) != format_of(target)) {
    fail(ErrorCode::format_mismatch, "base and target formats differ");
  }
  if (const auto* bt = std::get_if<FixedTable>(&base)) {
    const auto& tt = std::get<FixedTable>(target);
    if (bt->row_count() != tt.row_count() || bt->col_count() != tt.col_count()) {
      fail(ErrorCode::dimension_mismatch, "table shapes differ");
    }
    std::vector<Edit> edits;
    for (std::size_t r = 0; r < bt->row_count(); ++r) {
      for (std::size_t c = 0; c < bt->col_count(); ++c) {
        if (!scalar_eq(bt->rows[r][c], tt.rows[r][c])) {
          edits.push_back(CellSet{r, c, bt->rows[r][c], tt.rows[r][c]});
        }
      }
    }
    return make_edit_set(base, std::move(edits));
  }
  if (const auto* bi = std::get_if<IndexedTable>(&base)) {
    const auto& ti = std::get<IndexedTable>(target);
    std::vector<Edit> edits;
    for (const auto& [key, value] : bi->tuples) {
      auto it = ti.tuples.find(key);
      if (it == ti.tuples.end() || !scalar_eq(it->second, value)) {
        edits.push_back(TupleRemove{key.first, key.second, value});
      }
    }
    for (const auto& [key, value] : ti.tuples) {
      auto it = bi->tuples.find(key);
      if (it == bi->tuples.end() || !scalar_eq(it->second, value)) {
        edits.push_back(TupleAdd{key.first, key.second, value});
      }
    }
    return make_edit_set(base, std::move(edits));
  }
  return sequence_diff(std::get<TokenSequence>(base),
                       std::get<TokenSequence>(target));
}

namespace {

void apply_cell(FixedTable& t, const CellSet& e) {
  const Scalar& cur = t.at(e.row, e.col);
  if (!scalar_eq(cur, e.old_value)) {
    fail(ErrorCode::edit_conflict,
         "cell (" + std::to_string(e.row) + "," + std::to_string(e.col) +
             ") holds '" + format_scalar(cur) + "', edit expects '" +
             format_scalar(e.old_value) + "'");
  }
  if (scalar_eq(e.old_value, e.new_value)) {
    fail(ErrorCode::edit_conflict, "cell edit with old == new");
  }
  t.at(e.row, e.col) = e.new_value;
}

DataState apply_to_sequence(const TokenSequence& base,
                            const std::vector<const SeqInsert*>& inserts,
                            const std::vector<const SeqDelete*>& deletes) {
  const std::size_t n = base.tokens.size();
  std::vector<bool> deleted(n, false);
  for (const auto* d : deletes) {
    if (d->pos >= n) {
      fail(ErrorCode::edit_conflict,
           "delete position " + std::to_string(d->pos) + " beyond length " +
               std::to_string(n));
    }
    if (base.tokens[d->pos] != d->token) {
      fail(ErrorCode::edit_conflict,
           "delete at " + std::to_string(d->pos) + " expects '" + d->token +
               "', base has '" + base.tokens[d->pos] + "'");
    }
    if (deleted[d->pos]) {
      fail(ErrorCode::edit_conflict,
           "two deletes touch position " + std::to_string(d->pos));
    }
    deleted[d->pos] = true;
  }
  std::map<std::pair<std::size_t, std::uint32_t>, const SeqInsert*> by_anchor;
  for (const auto* ins : inserts) {
    if (ins->gap > n) {
      fail(ErrorCode::edit_conflict,
           "insert gap " + std::to_string(ins->gap) + " beyond length " +
               std::to_string(n));
    }
    if (!by_anchor.emplace(std::make_pair(ins->gap, ins->sub), ins).second) {
      fail(ErrorCode::edit_conflict,
           "two inserts share anchor (" + std::to_string(ins->gap) + "," +
               std::to_string(ins->sub) + ")");
    }
  }
  TokenSequence out;
  out.tokens.reserve(n + inserts.size());
  auto it = by_anchor.begin();
  for (std::size_t i = 0; i <= n; ++i) {
    while (it != by_anchor.end() && it->first.first == i) {
      out.tokens.push_back(it->second->token);
      ++it;
    }
    if (i < n && !deleted[i]) out.tokens.push_back(base.tokens[i]);
  }
  return out;
}

}  // namespace

DataState apply_edits(const DataState& base, const EditSet& delta) {
  std::string fp = fingerprint(base);
  if (fp != delta.base_fingerprint) {
    fail(ErrorCode::stale_delta, "edit set was built against " +
                                     delta.base_fingerprint +
                                     ", base is now " + fp);
  }
  Format fmt = format_of(base);
  if (fmt == Format::fixed_table) {
    FixedTable out = std::get<FixedTable>(base);
    std::set<std::pair<std::size_t, std::size_t>> touched;
    for (const auto& rec : delta.edits) {
      const auto* c = std::get_if<CellSet>(&rec.edit);
      if (!c) fail(ErrorCode::format_mismatch, "non-cell edit on a table");
      if (!touched.emplace(c->row, c->col).second) {
        fail(ErrorCode::edit_conflict, "two edits touch one cell");
      }
      apply_cell(out, *c);
    }
    return out;
  }
  if (fmt == Format::indexed_table) {
    IndexedTable out = std::get<IndexedTable>(base);
    std::set<std::tuple<std::int64_t, std::int64_t, bool>> touched;
    // removals first so that a remove/add pair on one key is a value change
    for (const auto& rec : delta.edits) {
      if (const auto* r = std::get_if<TupleRemove>(&rec.edit)) {
        if (!touched.emplace(r->entity, r->column, false).second) {
          fail(ErrorCode::edit_conflict, "two removes on one key");
        }
        auto it = out.tuples.find({r->entity, r->column});
        if (it == out.tuples.end() || !scalar_eq(it->second, r->value)) {
          fail(ErrorCode::edit_conflict,
               "remove of absent tuple (" + std::to_string(r->entity) + "," +
                   std::to_string(r->column) + ")");
        }
        out.tuples.erase(it);
      } else if (!std::holds_alternative<TupleAdd>(rec.edit)) {
        fail(ErrorCode::format_mismatch, "non-tuple edit on an indexed table");
      }
    }
    for (const auto& rec : delta.edits) {
      if (const auto* a = std::get_if<TupleAdd>(&rec.edit)) {
        if (!touched.emplace(a->entity, a->column, true).second) {
          fail(ErrorCode::edit_conflict, "two adds on one key");
        }
        auto [it, inserted] =
            out.tuples.emplace(IndexedTable::Key{a->entity, a->column}, a->value);
        (void)it;
        if (!inserted) {
          fail(ErrorCode::edit_conflict,
               "add of already present key (" + std::to_string(a->entity) +
                   "," + std::to_string(a->column) + ")");
        }
      }
    }
    return out;
  }
  std::vector<const SeqInsert*> inserts;
  std::vector<const SeqDelete*> deletes;
  for (const auto& rec : delta.edits) {
    if (const auto* i = std::get_if<SeqInsert>(&rec.edit)) {
      inserts.push_back(i);
    } else if (const auto* d = std::get_if<SeqDelete>(&rec.edit)) {
      deletes.push_back(d);
    } else {
      fail(ErrorCode::format_mismatch, "non-sequence edit on a sequence");
    }
  }
  return apply_to_sequence(std::get<TokenSequence>(base), inserts, deletes);
}

DataState apply_single_edit(const DataState& base, const Edit& e) {
  EditSet one;
  one.base_fingerprint = fingerprint(base);
  one.edits.push_back(EditRecord{e, edit_id(e), ""});
  return apply_edits(base, one);
}

int edit_distance_delta(const DataState& base, const DataState& truth,
                        const Edit& e) {
  std::size_t before = distance(base, truth);
  DataState after = apply_single_edit(base, e);
  std::size_t after_d = distance(after, truth);
  return static_cast<int>(static_cast<std::ptrdiff_t>(after_d) -
                          static_cast<std::ptrdiff_t>(before));
}

SequenceAssumptionReport check_sequence_assumptions(
    const TokenSequence& s, const TokenSequence& truth) {
  SequenceAssumptionReport report;
  auto distinct = [](const TokenSequence& seq, std::string* dup) {
    std::unordered_set<std::string_view> seen;
    for (const auto& tok : seq.tokens) {
      if (!seen.insert(tok).second) {
        if (dup) *dup = tok;
        return false;
      }
    }
    return true;
  };
  std::string dup;
  report.sequence_distinct = distinct(s, &dup);
  if (!report.sequence_distinct) report.detail = "duplicate token '" + dup + "' in sequence";
  report.truth_distinct = distinct(truth, &dup);
  if (!report.truth_distinct && report.detail.empty()) {
    report.detail = "duplicate token '" + dup + "' in truth";
  }
  // Order consistency over tokens unique in both sequences: their truth
  // positions must be increasing along s.
  std::unordered_map<std::string_view, std::size_t> truth_pos;
  std::unordered_set<std::string_view> truth_dup;
  for (std::size_t i = 0; i < truth.tokens.size(); ++i) {
    if (!truth_pos.emplace(truth.tokens[i], i).second) {
      truth_dup.insert(truth.tokens[i]);
    }
  }
  std::unordered_map<std::string_view, int> s_count;
  for (const auto& tok : s.tokens) ++s_count[tok];
  report.order_consistent = true;
  std::ptrdiff_t last = -1;
  std::string last_tok;
  for (const auto& tok : s.tokens) {
    auto it = truth_pos.find(tok);
    if (it == truth_pos.end() || truth_dup.count(tok) || s_count[tok] > 1) continue;
    if (static_cast<std::ptrdiff_t>(it->second) < last) {
      report.order_consistent = false;
      if (report.detail.empty()) {
        report.detail = "tokens '" + last_tok + "' and '" + tok +
                        "' appear in inverted order";
      }
      break;
    }
    last = static_cast<std::ptrdiff_t>(it->second);
    last_tok = tok;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

json scalar_to_json(const Scalar& v) {
  json j;
  if (std::holds_alternative<std::int64_t>(v)) {
    j["t"] = "i";
  } else {
    j["t"] = "s";
  }
  j["v"] = format_scalar(v);
  return j;
}

Scalar scalar_from_json(const json& j) {
  std::string v = j.at("v").get<std::string>();
  if (j.at("t").get<std::string>() == "i") {
    return Scalar{std::stoll(v)};
  }
  return Scalar{v};
}

json edit_to_json(const Edit& e) {
  json j;
  if (const auto* c = std::get_if<CellSet>(&e)) {
    j["kind"] = "cell";
    j["row"] = c->row;
    j["col"] = c->col;
    j["old"] = scalar_to_json(c->old_value);
    j["new"] = scalar_to_json(c->new_value);
  } else if (const auto* i = std::get_if<SeqInsert>(&e)) {
    j["kind"] = "ins";
    j["gap"] = i->gap;
    j["sub"] = i->sub;
    j["token"] = i->token;
  } else if (const auto* d = std::get_if<SeqDelete>(&e)) {
    j["kind"] = "del";
    j["pos"] = d->pos;
    j["token"] = d->token;
  } else if (const auto* a = std::get_if<TupleAdd>(&e)) {
    j["kind"] = "tadd";
    j["entity"] = a->entity;
    j["column"] = a->column;
    j["value"] = scalar_to_json(a->value);
  } else {
    const auto& r = std::get<TupleRemove>(e);
    j["kind"] = "trem";
    j["entity"] = r.entity;
    j["column"] = r.column;
    j["value"] = scalar_to_json(r.value);
  }
  return j;
}

Edit edit_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "cell") {
    return CellSet{j.at("row").get<std::size_t>(), j.at("col").get<std::size_t>(),
                   scalar_from_json(j.at("old")), scalar_from_json(j.at("new"))};
  }
  if (kind == "ins") {
    return SeqInsert{j.at("gap").get<std::size_t>(), j.at("sub").get<std::uint32_t>(),
                     j.at("token").get<std::string>()};
  }
  if (kind == "del") {
    return SeqDelete{j.at("pos").get<std::size_t>(), j.at("token").get<std::string>()};
  }
  if (kind == "tadd") {
    return TupleAdd{j.at("entity").get<std::int64_t>(),
                    j.at("column").get<std::int64_t>(),
                    scalar_from_json(j.at("value"))};
  }
  if (kind == "trem") {
    return TupleRemove{j.at("entity").get<std::int64_t>(),
                       j.at("column").get<std::int64_t>(),
                       scalar_from_json(j.at("value"))};
  }
  fail(ErrorCode::io_error, "unknown edit kind '" + kind + "'");
}

}  // namespace

std::string serialize_edit_set(const EditSet& set) {
  json j;
  j["base_fingerprint"] = set.base_fingerprint;
  json edits = json::array();
  for (const auto& rec : set.edits) {
    json e = edit_to_json(rec.edit);
    e["id"] = rec.id;
    if (!rec.stratum.empty()) e["stratum"] = rec.stratum;
    edits.push_back(std::move(e));
  }
  j["edits"] = std::move(edits);
  return j.dump(2) + "\n";
}

EditSet deserialize_edit_set(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, std::string("bad edit set document: ") + e.what());
  }
  EditSet set;
  try {
    set.base_fingerprint = j.at("base_fingerprint").get<std::string>();
    for (const auto& e : j.at("edits")) {
      EditRecord rec;
      rec.edit = edit_from_json(e);
      rec.id = e.contains("id") ? e.at("id").get<std::string>() : edit_id(rec.edit);
      if (e.contains("stratum")) rec.stratum = e.at("stratum").get<std::string>();
      set.edits.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, std::string("bad edit set document: ") + e.what());
  }
  return set;
}

EditSet load_edit_set(const std::string& path) {
  return deserialize_edit_set(read_file(path));
}

void save_edit_set(const EditSet& set, const std::string& path) {
  write_file(path, serialize_edit_set(set));
}

// ---------------------------------------------------------------------------
// Review hunks

namespace {

std::size_t line_of_token(const TokenSequence& seq, std::size_t pos) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < pos && i < seq.tokens.size(); ++i) {
    if (seq.tokens[i] == TokenSequence::kLineBreak) ++line;
  }
  return line;
}

std::string show_token(const std::string& tok) {
  return tok == TokenSequence::kLineBreak ? "\\n" : tok;
}

}  // namespace

EditHunk render_hunk(const DataState& base, const Edit& e, std::size_t context) {
  EditHunk hunk;
  if (const auto* c = std::get_if<CellSet>(&e)) {
    const auto& t = std::get<FixedTable>(base);
    hunk.line = c->row + 2;  // header occupies line 1
    std::string col = c->col < t.columns.size() ? t.columns[c->col]
                                                : std::to_string(c->col);
    hunk.lines.push_back("@@ row " + std::to_string(c->row) + ", column " +
                         col + " @@");
    hunk.lines.push_back("-" + format_scalar(c->old_value));
    hunk.lines.push_back("+" + format_scalar(c->new_value));
    return hunk;
  }
  if (const auto* a = std::get_if<TupleAdd>(&e)) {
    hunk.lines.push_back("@@ entity " + std::to_string(a->entity) +
                         ", column " + std::to_string(a->column) + " @@");
    hunk.lines.push_back("+" + format_scalar(a->value));
    return hunk;
  }
  if (const auto* r = std::get_if<TupleRemove>(&e)) {
    hunk.lines.push_back("@@ entity " + std::to_string(r->entity) +
                         ", column " + std::to_string(r->column) + " @@");
    hunk.lines.push_back("-" + format_scalar(r->value));
    return hunk;
  }
  const auto& seq = std::get<TokenSequence>(base);
  std::size_t anchor =
      std::holds_alternative<SeqInsert>(e) ? std::get<SeqInsert>(e).gap
                                           : std::get<SeqDelete>(e).pos;
  hunk.line = line_of_token(seq, anchor);
  std::size_t lo = anchor > context ? anchor - context : 0;
  std::size_t hi = std::min(seq.tokens.size(), anchor + context + 1);
  hunk.lines.push_back("@@ token " + std::to_string(anchor) + " @@");
  for (std::size_t i = lo; i < hi; ++i) {
    if (std::holds_alternative<SeqInsert>(e) && i == anchor) {
      hunk.lines.push_back("+" + show_token(std::get<SeqInsert>(e).token));
    }
    if (std::holds_alternative<SeqDelete>(e) && i == anchor) {
      hunk.lines.push_back("-" + show_token(seq.tokens[i]));
    } else {
      hunk.lines.push_back(" " + show_token(seq.tokens[i]));
    }
  }
  if (std::holds_alternative<SeqInsert>(e) && anchor >= seq.tokens.size()) {
    hunk.lines.push_back("+" + show_token(std::get<SeqInsert>(e).token));
  }
  return hunk;
}

}  // namespace curate::data
