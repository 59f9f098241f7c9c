// Test-only reference oracles, kept independent of the library's own
// algorithms: plain DP / exhaustive scans that the fast paths are checked
// against.
#ifndef CURATE_TESTS_ORACLES_HPP
#define CURATE_TESTS_ORACLES_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "curate/data.hpp"
#include "curate/rng.hpp"

namespace oracles {

// Classic full-table DP for the addition-deletion edit distance.
inline std::size_t dp_edit_distance(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1];
      } else {
        cur[j] = 1 + std::min(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

// Length of the LCS by full DP.
inline std::size_t dp_lcs_length(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> L(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      L[i][j] = a[i - 1] == b[j - 1]
                    ? L[i - 1][j - 1] + 1
                    : std::max(L[i - 1][j], L[i][j - 1]);
    }
  }
  return L[n][m];
}

// All distinct LCS strings via memoized path enumeration, capped so the
// caller can still ask "is it unique?" cheaply.
inline std::set<std::vector<std::string>> all_lcs(
    const std::vector<std::string>& a, const std::vector<std::string>& b,
    std::size_t cap = 8) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> L(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      L[i][j] = a[i] == b[j] ? L[i + 1][j + 1] + 1
                             : std::max(L[i + 1][j], L[i][j + 1]);
    }
  }
  std::set<std::vector<std::string>> out;
  std::vector<std::string> stack;
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t i,
                                                           std::size_t j) {
    if (out.size() >= cap) return;
    if (L[i][j] == 0) {
      out.insert(stack);
      return;
    }
    if (i >= n || j >= m) return;
    if (a[i] == b[j] && L[i + 1][j + 1] + 1 == L[i][j]) {
      stack.push_back(a[i]);
      walk(i + 1, j + 1);
      stack.pop_back();
    }
    if (L[i + 1][j] == L[i][j]) walk(i + 1, j);
    if (L[i][j + 1] == L[i][j]) walk(i, j + 1);
  };
  walk(0, 0);
  return out;
}

// Cell-by-cell comparison loop.
inline std::size_t scan_hamming(const curate::data::FixedTable& a,
                                const curate::data::FixedTable& b) {
  std::size_t d = 0;
  for (std::size_t r = 0; r < a.row_count(); ++r) {
    for (std::size_t c = 0; c < a.col_count(); ++c) {
      if (!(a.rows[r][c] == b.rows[r][c])) ++d;
    }
  }
  return d;
}

// Membership scan over both tuple sets.
inline std::size_t scan_symmetric_difference(const curate::data::IndexedTable& a,
                                             const curate::data::IndexedTable& b) {
  std::size_t d = 0;
  for (const auto& [key, value] : a.tuples) {
    auto it = b.tuples.find(key);
    if (it == b.tuples.end() || !(it->second == value)) ++d;
  }
  for (const auto& [key, value] : b.tuples) {
    auto it = a.tuples.find(key);
    if (it == a.tuples.end() || !(it->second == value)) ++d;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Random generators

inline std::vector<std::string> random_tokens(curate::Rng& rng, std::size_t n,
                                              std::size_t alphabet) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back("t" + std::to_string(rng.below(alphabet)));
  }
  return out;
}

inline curate::data::TokenSequence seq_of(std::vector<std::string> tokens) {
  curate::data::TokenSequence s;
  s.tokens = std::move(tokens);
  return s;
}

// Truth with distinct elements plus a derived state that keeps a random
// subsequence of the truth and interleaves fresh junk tokens, so the
// distinct-elements and shared-order conditions hold for the pair.
struct AssumptionPair {
  curate::data::TokenSequence truth;
  curate::data::TokenSequence state;
};

inline AssumptionPair random_assumption_pair(curate::Rng& rng, std::size_t n,
                                             std::size_t tag) {
  AssumptionPair out;
  for (std::size_t i = 0; i < n; ++i) {
    out.truth.tokens.push_back("w" + std::to_string(tag) + "_" + std::to_string(i));
  }
  std::size_t junk = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (rng.bernoulli(0.15)) {
      out.state.tokens.push_back("j" + std::to_string(tag) + "_" +
                                 std::to_string(junk++));
    }
    if (!rng.bernoulli(0.2)) out.state.tokens.push_back(out.truth.tokens[i]);
  }
  while (rng.bernoulli(0.15)) {
    out.state.tokens.push_back("j" + std::to_string(tag) + "_" +
                               std::to_string(junk++));
  }
  return out;
}

inline curate::data::FixedTable random_table(curate::Rng& rng, std::size_t rows,
                                             std::size_t cols,
                                             std::size_t values) {
  curate::data::FixedTable t;
  for (std::size_t c = 0; c < cols; ++c) t.columns.push_back("c" + std::to_string(c));
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<curate::Scalar> row;
    for (std::size_t c = 0; c < cols; ++c) {
      row.push_back(curate::Scalar{static_cast<std::int64_t>(rng.below(values))});
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline curate::data::IndexedTable random_indexed(curate::Rng& rng,
                                                 std::size_t keys,
                                                 std::size_t values) {
  curate::data::IndexedTable t;
  for (std::size_t i = 0; i < keys; ++i) {
    if (rng.bernoulli(0.7)) {
      t.tuples[{static_cast<std::int64_t>(i % 7),
                static_cast<std::int64_t>(i / 7 + 1)}] =
          curate::Scalar{static_cast<std::int64_t>(rng.below(values))};
    }
  }
  return t;
}

}  // namespace oracles

#endif  // CURATE_TESTS_ORACLES_HPP
