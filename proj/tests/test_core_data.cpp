#include <doctest.h>

#include <algorithm>

#include "curate/edits.hpp"
#include "curate/rng.hpp"
#include "oracles.hpp"

using namespace curate;
using namespace curate::data;

namespace {

TokenSequence seq(const char* text) { return tokenize(text); }

FixedTable table2x2(std::int64_t a, std::int64_t b, std::int64_t c,
                    std::int64_t d) {
  FixedTable t;
  t.columns = {"x", "y"};
  t.rows = {{Scalar{a}, Scalar{b}}, {Scalar{c}, Scalar{d}}};
  return t;
}

}  // namespace

TEST_CASE("scalar parsing keeps canonical integers numeric") {
  CHECK(parse_scalar("5") == Scalar{std::int64_t{5}});
  CHECK(parse_scalar("-7") == Scalar{std::int64_t{-7}});
  CHECK(parse_scalar("0") == Scalar{std::int64_t{0}});
  CHECK(parse_scalar("05") == Scalar{std::string("05")});
  CHECK(parse_scalar("-0") == Scalar{std::string("-0")});
  CHECK(parse_scalar("5.0") == Scalar{std::string("5.0")});
  CHECK(parse_scalar("abc") == Scalar{std::string("abc")});
  CHECK(format_scalar(parse_scalar("123")) == "123");
}

TEST_CASE("tokenize splits on whitespace and keeps line breaks") {
  TokenSequence s = tokenize("a b\tc\nd  e\n");
  std::vector<std::string> expect{"a", "b", "c", "\n", "d", "e", "\n"};
  CHECK(s.tokens == expect);
  CHECK(detokenize(s) == "a b c\nd e\n");
  CHECK(tokenize(detokenize(s)).tokens == s.tokens);
}

TEST_CASE("canonical serializations round trip") {
  FixedTable t;
  t.columns = {"id", "note"};
  t.rows = {{Scalar{std::int64_t{1}}, Scalar{std::string("has, comma")}},
            {Scalar{std::int64_t{2}}, Scalar{std::string("\"quoted\"")}}};
  DataState s{t};
  DataState back = deserialize(Format::fixed_table, serialize(s));
  CHECK(back == s);

  IndexedTable it;
  it.tuples[{1, 1}] = Scalar{std::string("5.0")};
  it.tuples[{2, 3}] = Scalar{std::int64_t{-4}};
  DataState is{it};
  CHECK(deserialize(Format::indexed_table, serialize(is)) == is);

  CHECK(fingerprint(s) != fingerprint(is));
  CHECK(fingerprint(s) == fingerprint(DataState{t}));
}

TEST_CASE("indexed table rejects duplicate keys") {
  CHECK_THROWS_AS(deserialize(Format::indexed_table,
                              "entity,column,value\n1,1,a\n1,1,b\n"),
                  CurateError);
}

TEST_CASE("hamming distance") {
  FixedTable a = table2x2(1, 2, 3, 4);
  CHECK(hamming_distance(a, a) == 0);
  FixedTable b = table2x2(1, 0, 3, 4);
  CHECK(hamming_distance(a, b) == 1);
  CHECK(hamming_distance(b, a) == 1);

  FixedTable c;
  c.columns = {"x"};
  c.rows = {{Scalar{std::int64_t{1}}}};
  CHECK_THROWS_AS(hamming_distance(a, c), CurateError);

  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    FixedTable x = oracles::random_table(rng, 6, 6, 4);
    FixedTable y = oracles::random_table(rng, 6, 6, 4);
    CHECK(hamming_distance(x, y) == oracles::scan_hamming(x, y));
  }
}

TEST_CASE("symmetric difference distance") {
  IndexedTable a, b;
  a.tuples[{1, 1}] = Scalar{std::string("5.0")};
  b.tuples[{1, 1}] = Scalar{std::string("5.0")};
  CHECK(symmetric_difference_distance(a, b) == 0);
  // an incorrect value at a valid key costs 2
  b.tuples[{1, 1}] = Scalar{std::string("6.0")};
  CHECK(symmetric_difference_distance(a, b) == 2);

  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    IndexedTable x = oracles::random_indexed(rng, 20, 3);
    IndexedTable y = oracles::random_indexed(rng, 20, 3);
    CHECK(symmetric_difference_distance(x, y) ==
          oracles::scan_symmetric_difference(x, y));
    CHECK(symmetric_difference_distance(x, y) ==
          symmetric_difference_distance(y, x));
  }
}

TEST_CASE("lcs basics and tie-break determinism") {
  CHECK(lcs(seq("a b c"), seq("a b c")).tokens == seq("a b c").tokens);
  CHECK(lcs(seq("a b c"), seq("a c")).tokens == seq("a c").tokens);
  CHECK(lcs(seq(""), seq("a b")).tokens.empty());
  // same inputs, same output
  CHECK(lcs(seq("x a x b"), seq("a b x")).tokens ==
        lcs(seq("x a x b"), seq("a b x")).tokens);
}

TEST_CASE("lcs length matches DP and is unique under the assumptions") {
  Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    auto pair = oracles::random_assumption_pair(rng, 4 + rng.below(8), i);
    TokenSequence l = lcs(pair.state, pair.truth);
    CHECK(l.tokens.size() ==
          oracles::dp_lcs_length(pair.state.tokens, pair.truth.tokens));
    auto all = oracles::all_lcs(pair.state.tokens, pair.truth.tokens);
    CHECK(all.size() == 1);
    CHECK(all.count(l.tokens) == 1);
  }
}

TEST_CASE("lcs falls back to the diff engine on large inputs") {
  // 4200 x 4200 crosses the DP-table budget, forcing the fallback; with a
  // constructed pair the expected LCS length is known exactly
  const std::size_t n = 4200;
  TokenSequence a, b;
  Rng rng(99);
  std::size_t kept = 0, junk = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::string tok = "u" + std::to_string(i);
    a.tokens.push_back(tok);
    if (rng.bernoulli(0.9)) {
      b.tokens.push_back(tok);
      ++kept;
    }
    if (rng.bernoulli(0.05)) {
      b.tokens.push_back("v" + std::to_string(junk++));
    }
  }
  TokenSequence l = lcs(a, b);
  CHECK(l.tokens.size() == kept);
  // the result is a common subsequence of both inputs
  auto is_subsequence = [](const std::vector<std::string>& sub,
                           const std::vector<std::string>& full) {
    std::size_t i = 0;
    for (const auto& tok : full) {
      if (i < sub.size() && sub[i] == tok) ++i;
    }
    return i == sub.size();
  };
  CHECK(is_subsequence(l.tokens, a.tokens));
  CHECK(is_subsequence(l.tokens, b.tokens));
  CHECK(edit_distance(a, b) == a.tokens.size() + b.tokens.size() - 2 * kept);
}

TEST_CASE("edit distance equals the DP oracle on random pairs") {
  CHECK(edit_distance(seq("a b c"), seq("a b c")) == 0);
  CHECK(edit_distance(seq("a b c"), seq("a c")) == 1);  // 3 + 2 - 2*2
  Rng rng(14);
  for (int i = 0; i < 500; ++i) {
    // small alphabet forces repeats, exercising the general path
    auto a = oracles::random_tokens(rng, rng.below(15), 4);
    auto b = oracles::random_tokens(rng, rng.below(15), 4);
    std::size_t got = edit_distance(oracles::seq_of(a), oracles::seq_of(b));
    CHECK(got == oracles::dp_edit_distance(a, b));
    CHECK(got == edit_distance(oracles::seq_of(b), oracles::seq_of(a)));
  }
}

TEST_CASE("sequence diff: forced single edit and empty diff") {
  EditSet none = sequence_diff(seq("a b c"), seq("a b c"));
  CHECK(none.empty());

  EditSet one = sequence_diff(seq("a b c"), seq("a c"));
  REQUIRE(one.size() == 1);
  const auto* del = std::get_if<SeqDelete>(&one.edits[0].edit);
  REQUIRE(del != nullptr);
  CHECK(del->pos == 1);
  CHECK(del->token == "b");
}

TEST_CASE("sequence diff is minimal and applies back to the target") {
  Rng rng(15);
  for (int i = 0; i < 400; ++i) {
    auto a = oracles::random_tokens(rng, rng.below(18), 5);
    auto b = oracles::random_tokens(rng, rng.below(18), 5);
    TokenSequence sa = oracles::seq_of(a), sb = oracles::seq_of(b);
    EditSet delta = sequence_diff(sa, sb);
    CHECK(delta.size() == oracles::dp_edit_distance(a, b));
    DataState applied = apply_edits(DataState{sa}, delta);
    CHECK(std::get<TokenSequence>(applied).tokens == b);
  }
}

TEST_CASE("diff fast path agrees with the DP oracle on distinct sides") {
  Rng rng(16);
  for (int i = 0; i < 300; ++i) {
    auto pair = oracles::random_assumption_pair(rng, 5 + rng.below(10), 1000 + i);
    EditSet delta = sequence_diff(pair.state, pair.truth);
    CHECK(delta.size() ==
          oracles::dp_edit_distance(pair.state.tokens, pair.truth.tokens));
    DataState applied = apply_edits(DataState{pair.state}, delta);
    CHECK(std::get<TokenSequence>(applied) == pair.truth);
  }
}

TEST_CASE("enumerate_edits per format") {
  FixedTable a = table2x2(1, 2, 3, 4);
  CHECK(enumerate_edits(DataState{a}, DataState{a}).empty());
  FixedTable b = table2x2(9, 2, 8, 7);
  EditSet cells = enumerate_edits(DataState{a}, DataState{b});
  CHECK(cells.size() == 3);
  CHECK(cells.size() == hamming_distance(a, b));

  IndexedTable ia, ib;
  ia.tuples[{1, 1}] = Scalar{std::int64_t{5}};
  ib.tuples[{1, 1}] = Scalar{std::int64_t{6}};
  EditSet tuples = enumerate_edits(DataState{ia}, DataState{ib});
  // a value change is one removal plus one addition
  REQUIRE(tuples.size() == 2);
  CHECK(std::holds_alternative<TupleRemove>(tuples.edits[0].edit));
  CHECK(std::holds_alternative<TupleAdd>(tuples.edits[1].edit));

  CHECK_THROWS_AS(enumerate_edits(DataState{a}, DataState{ia}), CurateError);
}

TEST_CASE("apply_edits validates fingerprints and preconditions") {
  FixedTable a = table2x2(1, 2, 3, 4);
  FixedTable b = table2x2(1, 2, 3, 9);
  EditSet delta = enumerate_edits(DataState{a}, DataState{b});

  SUBCASE("empty delta is identity") {
    EditSet none = enumerate_edits(DataState{a}, DataState{a});
    CHECK(apply_edits(DataState{a}, none) == DataState{a});
  }
  SUBCASE("stale fingerprint") {
    FixedTable other = table2x2(5, 5, 5, 5);
    try {
      apply_edits(DataState{other}, delta);
      CHECK(false);
    } catch (const CurateError& e) {
      CHECK(e.code() == ErrorCode::stale_delta);
    }
  }
  SUBCASE("old-value conflict") {
    EditSet bad = delta;
    std::get<CellSet>(bad.edits[0].edit).old_value = Scalar{std::int64_t{42}};
    CHECK_THROWS_AS(apply_edits(DataState{a}, bad), CurateError);
  }
  SUBCASE("sequence delete token mismatch") {
    TokenSequence s = seq("a b c");
    EditSet bad = make_edit_set(DataState{s}, {SeqDelete{1, "zzz"}});
    CHECK_THROWS_AS(apply_edits(DataState{s}, bad), CurateError);
  }
}

TEST_CASE("apply_edits is order independent") {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    auto pair = oracles::random_assumption_pair(rng, 6 + rng.below(6), 2000 + i);
    EditSet delta = sequence_diff(pair.state, pair.truth);
    DataState first = apply_edits(DataState{pair.state}, delta);
    EditSet shuffled = delta;
    for (std::size_t k = shuffled.edits.size(); k > 1; --k) {
      std::swap(shuffled.edits[k - 1], shuffled.edits[rng.below(k)]);
    }
    DataState second = apply_edits(DataState{pair.state}, shuffled);
    CHECK(first == second);
  }
}

TEST_CASE("round trip: apply(enumerate(a,b)) == b for all formats") {
  Rng rng(18);
  for (int i = 0; i < 150; ++i) {
    FixedTable ta = oracles::random_table(rng, 5, 4, 3);
    FixedTable tb = oracles::random_table(rng, 5, 4, 3);
    CHECK(apply_edits(DataState{ta}, enumerate_edits(DataState{ta}, DataState{tb})) ==
          DataState{tb});

    IndexedTable ia = oracles::random_indexed(rng, 15, 3);
    IndexedTable ib = oracles::random_indexed(rng, 15, 3);
    CHECK(apply_edits(DataState{ia}, enumerate_edits(DataState{ia}, DataState{ib})) ==
          DataState{ib});
  }
}

TEST_CASE("edit ids are stable and unique within a set") {
  TokenSequence a = seq("a b c d");
  TokenSequence b = seq("a x c y");
  EditSet delta = sequence_diff(a, b);
  std::set<std::string> ids;
  for (const auto& rec : delta.edits) ids.insert(rec.id);
  CHECK(ids.size() == delta.size());
  EditSet again = sequence_diff(a, b);
  for (std::size_t i = 0; i < delta.size(); ++i) {
    CHECK(delta.edits[i].id == again.edits[i].id);
  }
}

TEST_CASE("edit set serialization round trips") {
  FixedTable ta = table2x2(1, 2, 3, 4);
  FixedTable tb = table2x2(7, 2, 3, 9);
  EditSet delta = enumerate_edits(DataState{ta}, DataState{tb});
  EditSet back = deserialize_edit_set(serialize_edit_set(delta));
  CHECK(back == delta);

  Rng rng(19);
  auto pair = oracles::random_assumption_pair(rng, 8, 5);
  EditSet sdelta = sequence_diff(pair.state, pair.truth);
  CHECK(deserialize_edit_set(serialize_edit_set(sdelta)) == sdelta);
}

TEST_CASE("edit_distance_delta is the distance change of one edit") {
  // table: fixing a wrong cell moves one closer, breaking a correct one away
  FixedTable truth = table2x2(1, 2, 3, 4);
  FixedTable state = table2x2(1, 9, 3, 4);
  CHECK(edit_distance_delta(DataState{state}, DataState{truth},
                            CellSet{0, 1, Scalar{std::int64_t{9}},
                                    Scalar{std::int64_t{2}}}) == -1);
  CHECK(edit_distance_delta(DataState{state}, DataState{truth},
                            CellSet{1, 0, Scalar{std::int64_t{3}},
                                    Scalar{std::int64_t{8}}}) == 1);
  // inapplicable edit
  CHECK_THROWS_AS(edit_distance_delta(DataState{state}, DataState{truth},
                                      CellSet{0, 0, Scalar{std::int64_t{5}},
                                              Scalar{std::int64_t{1}}}),
                  CurateError);

  // sequences: against full recomputation with the DP oracle
  Rng rng(20);
  for (int i = 0; i < 120; ++i) {
    auto a = oracles::random_tokens(rng, 2 + rng.below(10), 4);
    auto b = oracles::random_tokens(rng, 2 + rng.below(10), 4);
    TokenSequence sa = oracles::seq_of(a), sb = oracles::seq_of(b);
    Edit e;
    if (rng.bernoulli(0.5)) {
      std::size_t pos = rng.below(sa.tokens.size());
      e = SeqDelete{pos, sa.tokens[pos]};
    } else {
      e = SeqInsert{static_cast<std::size_t>(rng.below(sa.tokens.size() + 1)), 0,
                    "t" + std::to_string(rng.below(5))};
    }
    int got = edit_distance_delta(DataState{sa}, DataState{sb}, e);
    auto after = std::get<TokenSequence>(apply_single_edit(DataState{sa}, e));
    int expect = static_cast<int>(oracles::dp_edit_distance(after.tokens, b)) -
                 static_cast<int>(oracles::dp_edit_distance(a, b));
    CHECK(got == expect);
    CHECK(got >= -1);
    CHECK(got <= 1);
  }
}

TEST_CASE("additivity of distance deltas for orthogonal edit pairs") {
  Rng rng(21);
  int cases = 0;
  for (int i = 0; i < 300; ++i) {
    auto pair = oracles::random_assumption_pair(rng, 6 + rng.below(8), 3000 + i);
    EditSet delta = sequence_diff(pair.state, pair.truth);
    if (delta.size() < 2) continue;
    std::size_t u = rng.below(delta.size());
    std::size_t v = rng.below(delta.size());
    if (u == v) continue;
    DataState base{pair.state};
    DataState truth{pair.truth};
    int du = edit_distance_delta(base, truth, delta.edits[u].edit);
    int dv = edit_distance_delta(base, truth, delta.edits[v].edit);
    EditSet both;
    both.base_fingerprint = fingerprint(base);
    both.edits = {delta.edits[u], delta.edits[v]};
    DataState applied = apply_edits(base, both);
    int together = static_cast<int>(distance(applied, truth)) -
                   static_cast<int>(distance(base, truth));
    CHECK(together == du + dv);
    ++cases;
  }
  CHECK(cases > 100);
}

TEST_CASE("check_sequence_assumptions") {
  auto ok = check_sequence_assumptions(seq("a b c"), seq("a b c d"));
  CHECK(ok.sequence_distinct);
  CHECK(ok.truth_distinct);
  CHECK(ok.order_consistent);
  CHECK(ok.all_pass());

  auto dup = check_sequence_assumptions(seq("a b a"), seq("a b c"));
  CHECK_FALSE(dup.sequence_distinct);

  auto inverted = check_sequence_assumptions(seq("c a"), seq("a b c"));
  CHECK(inverted.sequence_distinct);
  CHECK(inverted.truth_distinct);
  CHECK_FALSE(inverted.order_consistent);
}

TEST_CASE("render_hunk shows the edit with context") {
  TokenSequence base = seq("alpha beta gamma delta");
  EditHunk h = render_hunk(DataState{base}, SeqDelete{1, "beta"});
  REQUIRE(h.lines.size() >= 3);
  CHECK(h.lines[0].rfind("@@", 0) == 0);
  bool has_minus = false;
  for (const auto& l : h.lines) has_minus |= l.rfind("-beta", 0) == 0;
  CHECK(has_minus);

  FixedTable t = table2x2(1, 2, 3, 4);
  EditHunk ch = render_hunk(
      DataState{t}, CellSet{1, 0, Scalar{std::int64_t{3}}, Scalar{std::int64_t{7}}});
  CHECK(ch.line == 3);  // header + row offset
  CHECK(ch.lines[1] == "-3");
  CHECK(ch.lines[2] == "+7");
}
