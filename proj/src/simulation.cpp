// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#include "curate/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace curate::sim {

double LambdaSpec::mean() const {
  if (const auto* fixed = std::get_if<double>(&value)) return *fixed;
  const auto& b = std::get<decision::BetaPrior>(value);
  return b.alpha / (b.alpha + b.beta);
}

double LambdaSpec::draw(Rng& rng) const {
  if (const auto* fixed = std::get_if<double>(&value)) return *fixed;
  const auto& b = std::get<decision::BetaPrior>(value);
  return rng.beta(b.alpha, b.beta);
}

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::extinct: return "extinct";
    case RunStatus::censored: return "censored";
    case RunStatus::exploded: return "exploded";
  }
  return "?";
}

std::int64_t Trajectory::initial_errors() const {
  return steps.empty() ? 0 : steps.front().errors;
}

std::int64_t Trajectory::final_errors() const {
  return steps.empty() ? 0 : steps.back().errors;
}

// ---------------------------------------------------------------------------
// Vocabulary

namespace {

// bijective base-26 word for an index: 0 -> "a", 25 -> "z", 26 -> "aa", ...
std::string index_word(std::size_t i) {
  std::string out;
  std::size_t n = i + 1;
  while (n > 0) {
    n -= 1;
    out.push_back(static_cast<char>('a' + n % 26));
    n /= 26;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

Vocabulary Vocabulary::zipf(std::size_t size) {
  if (size == 0) fail(ErrorCode::invalid_argument, "empty vocabulary");
  Vocabulary v;
  v.tokens.reserve(size);
  v.weights.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    v.tokens.push_back(index_word(i));
    v.weights.push_back(1.0 / static_cast<double>(i + 1));
  }
  return v;
}

Vocabulary Vocabulary::from_file(const std::string& path) {
  std::string text = data::read_file(path);
  Vocabulary v;
  std::istringstream in(text);
  std::string token;
  double weight = 0.0;
  while (in >> token >> weight) {
    if (weight <= 0.0) {
      fail(ErrorCode::validation_failed,
           "vocabulary weight for '" + token + "' must be positive");
    }
    v.tokens.push_back(token);
    v.weights.push_back(weight);
  }
  if (v.tokens.empty()) {
    fail(ErrorCode::validation_failed, "vocabulary file " + path + " is empty");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Shared review-step mechanics

namespace {

// Acceptance threshold when the sample was clamped to a small delta: the
// rule keeps its m/n ratio on the effective sample size.
std::int64_t sim_threshold(int n, int m, std::int64_t n_eff) {
  if (n_eff >= n) return m;
  std::int64_t scaled = (static_cast<std::int64_t>(m) * n_eff + n - 1) / n;
  return std::max<std::int64_t>(1, scaled);
}

struct ReviewDraw {
  std::int64_t n_eff = 0;
  std::int64_t m_observed = 0;
  bool accepted = false;
};

// SRS of the proposal's edits drawn hypergeometrically from its
// correct/incorrect split; oracle noise marks incorrect edits correct with
// probability epsilon.
ReviewDraw bpre_review(std::int64_t delta, std::int64_t correct,
                       const decision::DecisionConfig& rule, double epsilon,
                       Rng& rng) {
  ReviewDraw out;
  out.n_eff = std::min<std::int64_t>(rule.n, delta);
  std::int64_t correct_in_sample =
      rng.hypergeometric(correct, delta - correct, out.n_eff);
  if (epsilon > 0.0) {
    correct_in_sample += rng.binomial(out.n_eff - correct_in_sample, epsilon);
  }
  out.m_observed = correct_in_sample;
  out.accepted = correct_in_sample >= sim_threshold(rule.n, rule.m, out.n_eff);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Direct BPRE simulation

std::vector<Trajectory> simulate_bpre(const BpreConfig& config) {
  if (config.runs < 1 || config.max_steps < 1) {
    fail(ErrorCode::invalid_argument, "runs and max_steps must be >= 1");
  }
  if (config.initial_errors < 0) {
    fail(ErrorCode::invalid_argument, "initial_errors must be >= 0");
  }
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(config.runs));
  for (std::int64_t run = 0; run < config.runs; ++run) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(run)));
    Trajectory traj;
    traj.run_id = run;
    std::int64_t errors = config.initial_errors;
    std::int64_t t = 0;
    while (true) {
      if (errors == 0) {
        traj.steps.push_back({t, errors, 0, -1, false, 0, 0});
        traj.status = RunStatus::extinct;
        break;
      }
      if (errors >= config.explosion_cap) {
        traj.steps.push_back({t, errors, 0, -1, false, 0, 0});
        traj.status = RunStatus::exploded;
        break;
      }
      if (t >= config.max_steps) {
        traj.steps.push_back({t, errors, 0, -1, false, 0, 0});
        traj.status = RunStatus::censored;
        break;
      }
      double r = rng.beta(config.prior_r.alpha, config.prior_r.beta);
      double lambda = config.lambda.draw(rng);
      std::int64_t delta = rng.binomial(errors, lambda);
      std::int64_t correct = rng.binomial(delta, 1.0 - r);
      StepRecord rec{t, errors, delta, -1, false, 0, 0};
      if (!config.decision.has_value()) {
        rec.accepted = true;
      } else if (delta > 0) {
        ReviewDraw draw =
            bpre_review(delta, correct, *config.decision, config.epsilon, rng);
        rec.m_observed = draw.m_observed;
        rec.accepted = draw.accepted;
      }
      traj.steps.push_back(rec);
      if (rec.accepted) {
        errors = errors - correct + (delta - correct);
      }
      ++t;
    }
    out.push_back(std::move(traj));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text simulation

namespace {

// Weighted sampling without replacement (exponential-keys method): the
// truth gets `n` distinct vocabulary words, Zipf-flavoured, in random order.
std::vector<std::size_t> weighted_sample_without_replacement(
    const Vocabulary& vocab, std::size_t n, Rng& rng) {
  if (n > vocab.size()) {
    fail(ErrorCode::invalid_argument,
         "vocabulary (" + std::to_string(vocab.size()) +
             " words) smaller than requested sample " + std::to_string(n));
  }
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    keys.emplace_back(std::log(u) / vocab.weights[i], i);
  }
  std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n),
                   keys.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  keys.resize(n);
  std::sort(keys.begin(), keys.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> out;
  out.reserve(n);
  for (const auto& [key, idx] : keys) out.push_back(idx);
  for (std::size_t i = out.size(); i > 1; --i) {
    std::swap(out[i - 1], out[rng.below(i)]);
  }
  return out;
}

// Weighted draws without replacement from the vocabulary words outside the
// truth's support; keeps corrupted copies duplicate-free.
class ComplementDrawer {
 public:
  ComplementDrawer(const Vocabulary& vocab,
                   const std::unordered_set<std::string_view>& truth_words) {
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      if (!truth_words.count(vocab.tokens[i])) {
        tokens_.push_back(vocab.tokens[i]);
        cumulative_.push_back((cumulative_.empty() ? 0.0 : cumulative_.back()) +
                              vocab.weights[i]);
      }
    }
    used_.assign(tokens_.size(), false);
  }

  bool empty() const { return tokens_.empty(); }

  std::string draw(Rng& rng) {
    if (tokens_.empty()) {
      fail(ErrorCode::invalid_argument,
           "vocabulary has no words outside the truth");
    }
    for (int tries = 0; tries < 10000; ++tries) {
      double u = rng.uniform() * cumulative_.back();
      std::size_t i = static_cast<std::size_t>(
          std::lower_bound(cumulative_.begin(), cumulative_.end(), u) -
          cumulative_.begin());
      if (i >= tokens_.size()) i = tokens_.size() - 1;
      if (!used_[i]) {
        used_[i] = true;
        return std::string(tokens_[i]);
      }
    }
    // weighted retries exhausted; fall back to the first unused word
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!used_[i]) {
        used_[i] = true;
        return std::string(tokens_[i]);
      }
    }
    fail(ErrorCode::invalid_argument, "complement vocabulary exhausted");
  }

 private:
  std::vector<std::string_view> tokens_;
  std::vector<double> cumulative_;
  std::vector<bool> used_;
};

}  // namespace

data::TokenSequence corrupt_sequence(const data::TokenSequence& truth,
                                     const Vocabulary& vocab, double p,
                                     std::uint64_t seed) {
  if (!(p > 0.0 && p < 1.0 / 3.0)) {
    fail(ErrorCode::invalid_argument,
         "corruption probability must lie in (0, 1/3)");
  }
  std::unordered_set<std::string_view> truth_words(truth.tokens.begin(),
                                                   truth.tokens.end());
  ComplementDrawer drawer(vocab, truth_words);
  Rng rng(seed);
  data::TokenSequence out;
  out.tokens.reserve(truth.tokens.size() + 16);
  const double probs[4] = {1.0 - 3.0 * p, p, p, p};
  for (const auto& word : truth.tokens) {
    std::size_t op = rng.categorical(std::span<const double>(probs, 4));
    switch (op) {
      case 0:  // keep
        out.tokens.push_back(word);
        break;
      case 1:  // remove
        break;
      case 2:  // replace
        out.tokens.push_back(drawer.draw(rng));
        break;
      case 3:  // insert after
        out.tokens.push_back(word);
        out.tokens.push_back(drawer.draw(rng));
        break;
    }
  }
  return out;
}

namespace {

// Chooses which corrections a proposal includes and which become junk.
// Returns the proposal edit set against `state` (corrections + fresh
// errors, all pairwise orthogonal).
data::EditSet propose_from_corrections(const data::DataState& state,
                                       const data::DataState& truth,
                                       const data::EditSet& corrections,
                                       double r, double lambda, Rng& rng,
                                       const std::string& junk_tag) {
  std::vector<data::Edit> chosen;
  std::size_t junk_counter = 0;
  data::Format fmt = data::format_of(state);

  // table junk lands on a uniformly chosen currently-correct cell
  const data::FixedTable* table = std::get_if<data::FixedTable>(&state);
  std::set<std::pair<std::size_t, std::size_t>> blocked;
  if (table) {
    for (const auto& rec : corrections.edits) {
      const auto& c = std::get<data::CellSet>(rec.edit);
      blocked.emplace(c.row, c.col);
    }
  }
  std::int64_t next_entity = 0;
  if (fmt == data::Format::indexed_table) {
    auto scan = [&](const data::IndexedTable& t) {
      for (const auto& [key, value] : t.tuples) {
        next_entity = std::max(next_entity, key.first + 1);
      }
    };
    scan(std::get<data::IndexedTable>(state));
    scan(std::get<data::IndexedTable>(truth));
  }

  for (const auto& rec : corrections.edits) {
    if (!rng.bernoulli(lambda)) continue;  // error left untouched
    if (!rng.bernoulli(r)) {
      chosen.push_back(rec.edit);  // correct fix
      continue;
    }
    // bad fix: the error stays and a fresh error appears
    std::string junk = junk_tag + std::to_string(junk_counter);
    if (fmt == data::Format::token_sequence) {
      std::size_t gap = 0;
      if (const auto* d = std::get_if<data::SeqDelete>(&rec.edit)) {
        gap = d->pos;
      } else {
        gap = std::get<data::SeqInsert>(rec.edit).gap;
      }
      chosen.push_back(data::SeqInsert{
          gap, static_cast<std::uint32_t>(1000000 + junk_counter), junk});
    } else if (fmt == data::Format::fixed_table) {
      std::size_t cells = table->cell_count();
      bool placed = false;
      for (int tries = 0; tries < 64 && !placed; ++tries) {
        std::size_t cell = static_cast<std::size_t>(rng.below(cells));
        std::size_t row = cell / table->col_count();
        std::size_t col = cell % table->col_count();
        if (blocked.count({row, col})) continue;
        blocked.emplace(row, col);
        chosen.push_back(data::CellSet{row, col, table->rows[row][col],
                                       Scalar{junk}});
        placed = true;
      }
      // dense-error corner: no free cell found, the bad fix fizzles
    } else {
      chosen.push_back(data::TupleAdd{next_entity++, 1, Scalar{junk}});
    }
    ++junk_counter;
  }
  return data::make_edit_set(state, std::move(chosen));
}

}  // namespace

data::DataState generate_proposal(const data::DataState& state,
                                  const data::DataState& truth, double r,
                                  double lambda, std::uint64_t seed,
                                  const std::string& junk_tag) {
  data::EditSet corrections = data::enumerate_edits(state, truth);
  Rng rng(seed);
  data::EditSet chosen =
      propose_from_corrections(state, truth, corrections, r, lambda, rng, junk_tag);
  return data::apply_edits(state, chosen);
}

std::vector<Trajectory> simulate_text(const TextSimConfig& config) {
  if (config.truth_size < 1) {
    fail(ErrorCode::invalid_argument, "truth_size must be >= 1");
  }
  if (config.runs < 1 || config.max_steps < 1) {
    fail(ErrorCode::invalid_argument, "runs and max_steps must be >= 1");
  }
  Vocabulary vocab;
  if (!config.vocabulary_path.empty()) {
    vocab = Vocabulary::from_file(config.vocabulary_path);
  } else {
    std::size_t size = config.vocabulary_size
                           ? config.vocabulary_size
                           : 2 * config.truth_size;
    vocab = Vocabulary::zipf(size);
  }
  if (vocab.size() < 2 * config.truth_size) {
    fail(ErrorCode::invalid_argument,
         "vocabulary must hold at least 2x truth_size words");
  }

  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(config.runs));
  for (std::int64_t run = 0; run < config.runs; ++run) {
    std::uint64_t run_seed = derive_seed(config.seed, static_cast<std::uint64_t>(run));
    Rng truth_rng(derive_seed(run_seed, 1));
    data::TokenSequence truth;
    truth.tokens.reserve(config.truth_size);
    for (std::size_t idx :
         weighted_sample_without_replacement(vocab, config.truth_size, truth_rng)) {
      truth.tokens.push_back(vocab.tokens[idx]);
    }
    data::TokenSequence state =
        corrupt_sequence(truth, vocab, config.corruption_p, derive_seed(run_seed, 2));

    std::unordered_set<std::string_view> truth_words(truth.tokens.begin(),
                                                     truth.tokens.end());
    data::DataState truth_state{truth};
    data::DataState current{std::move(state)};

    Rng rng(derive_seed(run_seed, 3));
    Trajectory traj;
    traj.run_id = run;
    std::int64_t t = 0;
    while (true) {
      data::EditSet corrections = data::enumerate_edits(current, truth_state);
      std::int64_t errors = static_cast<std::int64_t>(corrections.size());
      if (errors == 0) {
        traj.steps.push_back({t, errors, 0, -1, false, 0, 0});
        traj.status = RunStatus::extinct;
        break;
      }
      if (errors >= config.explosion_cap) {
        traj.steps.push_back({t, errors, 0, -1, false, 0, 0});
        traj.status = RunStatus::exploded;
        break;
      }
      if (t >= config.max_steps) {
        traj.steps.push_back({t, errors, 0, -1, false, 0, 0});
        traj.status = RunStatus::censored;
        break;
      }
      double r = rng.beta(config.prior_r.alpha, config.prior_r.beta);
      double lambda = config.lambda.draw(rng);
      std::string junk_tag =
          "!r" + std::to_string(run) + "t" + std::to_string(t) + ":";
      data::EditSet chosen = propose_from_corrections(
          current, truth_state, corrections, r, lambda, rng, junk_tag);
      data::DataState proposal = data::apply_edits(current, chosen);
      data::EditSet delta = data::enumerate_edits(current, proposal);

      StepRecord rec{t, errors, static_cast<std::int64_t>(delta.size()), -1,
                     false, 0, 0};
      if (!config.decision.has_value()) {
        rec.accepted = true;
      } else if (!delta.empty()) {
        sampling::SampleReport report = sampling::srs_sample(
            delta, static_cast<std::size_t>(config.decision->n),
            derive_seed(run_seed, 1000 + static_cast<std::uint64_t>(t)));
        std::unordered_map<std::string_view, const data::Edit*> by_id;
        for (const auto& e : delta.edits) by_id[e.id] = &e.edit;
        for (auto& entry : report.entries) {
          const data::Edit* e = by_id.at(entry.edit_id);
          bool correct;
          if (const auto* ins = std::get_if<data::SeqInsert>(e)) {
            // inserting a missing truth word fixes an error; anything else
            // (junk or duplicate) introduces one
            correct = truth_words.count(ins->token) > 0;
          } else {
            const auto& del = std::get<data::SeqDelete>(*e);
            correct = truth_words.count(del.token) == 0;
          }
          entry.verdict = correct ? sampling::Verdict::correct
                                  : sampling::Verdict::incorrect;
        }
        rec.m_observed = static_cast<std::int64_t>(report.m_observed());
        rec.accepted =
            decision::decide(report, *config.decision) == decision::Outcome::accept;
      }
      traj.steps.push_back(rec);
      if (rec.accepted) {
        current = data::apply_edits(current, delta);
      }
      ++t;
    }
    out.push_back(std::move(traj));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Data-tests simulation (paired arms)

std::size_t TestRegistry::violations(const data::FixedTable& table) const {
  std::size_t v = 0;
  for (const auto& a : assertions) {
    if (!scalar_eq(table.at(a.row, a.col), a.value)) ++v;
  }
  return v;
}

TestsSimSetup make_tests_setup(const TestsSimConfig& config,
                               std::uint64_t seed) {
  std::size_t cells = config.rows * config.cols;
  if (config.initial_errors < 0 ||
      static_cast<std::size_t>(config.initial_errors) > cells) {
    fail(ErrorCode::invalid_argument, "initial_errors exceed the table");
  }
  std::size_t pins = static_cast<std::size_t>(
      config.pin_fraction * static_cast<double>(cells));
  if (static_cast<std::size_t>(config.initial_errors) + pins > cells) {
    fail(ErrorCode::invalid_argument, "pins and errors together exceed the table");
  }
  TestsSimSetup setup;
  setup.truth.columns.reserve(config.cols);
  for (std::size_t c = 0; c < config.cols; ++c) {
    setup.truth.columns.push_back("c" + std::to_string(c));
  }
  for (std::size_t r = 0; r < config.rows; ++r) {
    std::vector<Scalar> row;
    row.reserve(config.cols);
    for (std::size_t c = 0; c < config.cols; ++c) {
      row.push_back(Scalar{static_cast<std::int64_t>(r * config.cols + c)});
    }
    setup.truth.rows.push_back(std::move(row));
  }
  setup.initial = setup.truth;

  Rng rng(seed);
  for (std::size_t cell :
       rng.sample_indices(cells, static_cast<std::size_t>(config.initial_errors))) {
    std::size_t row = cell / config.cols;
    std::size_t col = cell % config.cols;
    setup.initial.rows[row][col] = Scalar{"!e" + std::to_string(cell)};
  }
  // pins assert truth values over arbitrary cells, erroneous ones included;
  // a correction landing on a pinned cell can therefore pass the test
  for (std::size_t cell : rng.sample_indices(cells, pins)) {
    std::size_t row = cell / config.cols;
    std::size_t col = cell % config.cols;
    setup.registry.assertions.push_back(
        TestAssertion{row, col, setup.truth.rows[row][col]});
  }
  return setup;
}

namespace {

Trajectory run_tests_arm(const TestsSimSetup& setup, const TestsSimConfig& config,
                         bool gate_on, std::uint64_t seed, std::int64_t run_id) {
  Rng rng(seed);
  data::DataState truth{setup.truth};
  data::DataState current{setup.initial};
  Trajectory traj;
  traj.run_id = run_id;
  std::int64_t t = 0;
  while (true) {
    data::EditSet corrections = data::enumerate_edits(current, truth);
    std::int64_t errors = static_cast<std::int64_t>(corrections.size());
    if (errors == 0) {
      traj.steps.push_back({t, errors, 0, -1, false, 0, 0});
      traj.status = RunStatus::extinct;
      break;
    }
    if (t >= config.max_steps) {
      traj.steps.push_back({t, errors, 0, -1, false, 0, 0});
      traj.status = RunStatus::censored;
      break;
    }
    // One timestep is one oracle review cycle. The data tests are cheap and
    // run before the costly review, so a gate-bounced proposal is replaced
    // by a fresh draw inside the same cycle; only reviewed proposals spend
    // a step. The gate checks the changed tested dimensions: the revision
    // may not write anything but the asserted value there.
    data::EditSet chosen;
    data::DataState proposal;
    std::int64_t j_prime = 0;
    std::set<std::pair<std::size_t, std::size_t>> changed;
    for (int attempt = 0; attempt < 200; ++attempt) {
      double r = rng.beta(config.prior_r.alpha, config.prior_r.beta);
      double lambda = config.lambda.draw(rng);
      std::string junk_tag = "!j" + std::to_string(run_id) + "t" +
                             std::to_string(t) + "a" + std::to_string(attempt) +
                             ":";
      chosen = propose_from_corrections(current, truth, corrections, r, lambda,
                                        rng, junk_tag);
      proposal = data::apply_edits(current, chosen);
      const auto& proposal_table = std::get<data::FixedTable>(proposal);
      changed.clear();
      for (const auto& e : chosen.edits) {
        const auto& c = std::get<data::CellSet>(e.edit);
        changed.emplace(c.row, c.col);
      }
      j_prime = 0;
      bool pin_broken = false;
      for (const auto& a : setup.registry.assertions) {
        if (changed.count({a.row, a.col})) {
          ++j_prime;
          if (!scalar_eq(proposal_table.rows[a.row][a.col], a.value)) {
            pin_broken = true;
          }
        }
      }
      if (!gate_on || !pin_broken) break;
    }

    StepRecord rec{t, errors, static_cast<std::int64_t>(chosen.size()), -1,
                   false, j_prime, j_prime};
    if (!chosen.empty()) {
      sampling::SampleReport report = sampling::srs_sample(
          chosen, static_cast<std::size_t>(config.decision.n),
          derive_seed(seed, 5000 + static_cast<std::uint64_t>(t)));
      std::unordered_map<std::string_view, const data::Edit*> by_id;
      for (const auto& e : chosen.edits) by_id[e.id] = &e.edit;
      std::set<std::pair<std::size_t, std::size_t>> sampled_cells;
      const auto& truth_table = std::get<data::FixedTable>(truth);
      for (auto& entry : report.entries) {
        const auto& c = std::get<data::CellSet>(*by_id.at(entry.edit_id));
        sampled_cells.emplace(c.row, c.col);
        bool correct = scalar_eq(c.new_value, truth_table.rows[c.row][c.col]);
        entry.verdict = correct ? sampling::Verdict::correct
                                : sampling::Verdict::incorrect;
      }
      std::int64_t j_star = 0;
      for (const auto& a : setup.registry.assertions) {
        if (changed.count({a.row, a.col}) && !sampled_cells.count({a.row, a.col})) {
          ++j_star;
        }
      }
      rec.j_star = j_star;
      rec.m_observed = static_cast<std::int64_t>(report.m_observed());
      rec.accepted =
          decision::decide(report, config.decision) == decision::Outcome::accept;
    }
    traj.steps.push_back(rec);
    if (rec.accepted) {
      current = std::move(proposal);
    }
    ++t;
  }
  return traj;
}

}  // namespace

PairedTrajectories simulate_with_tests(const TestsSimConfig& config,
                                       const TestRegistry& registry) {
  if (config.pairs < 1) fail(ErrorCode::invalid_argument, "pairs must be >= 1");
  PairedTrajectories out;
  out.with_tests.reserve(static_cast<std::size_t>(config.pairs));
  out.without.reserve(static_cast<std::size_t>(config.pairs));
  for (std::int64_t pair = 0; pair < config.pairs; ++pair) {
    TestsSimSetup setup =
        make_tests_setup(config, derive_seed(config.seed, 2 * static_cast<std::uint64_t>(pair)));
    if (!registry.assertions.empty()) {
      setup.registry = registry;  // caller-supplied pins override
    }
    std::uint64_t arm_seed =
        derive_seed(config.seed, 2 * static_cast<std::uint64_t>(pair) + 1);
    out.with_tests.push_back(run_tests_arm(setup, config, true, arm_seed, pair));
    out.without.push_back(run_tests_arm(setup, config, false, arm_seed, pair));
  }
  return out;
}

PairedTrajectories simulate_noisy_oracle(const NoisySimConfig& config) {
  if (!(config.epsilon >= 0.0 && config.epsilon < 1.0)) {
    fail(ErrorCode::domain_error, "epsilon must lie in [0, 1)");
  }
  decision::NoisyRule rule =
      decision::noisy_adjust(config.n, config.m, config.epsilon);
  BpreConfig true_arm;
  true_arm.initial_errors = config.initial_errors;
  true_arm.prior_r = config.prior_r;
  true_arm.lambda = config.lambda;
  true_arm.decision = decision::DecisionConfig{config.n, config.m, 0.0};
  true_arm.max_steps = config.max_steps;
  true_arm.runs = config.runs;
  true_arm.seed = config.seed;
  true_arm.epsilon = 0.0;
  true_arm.explosion_cap = config.explosion_cap;

  BpreConfig noisy_arm = true_arm;
  noisy_arm.decision = decision::DecisionConfig{rule.n, rule.m, 0.0};
  noisy_arm.epsilon = config.epsilon;

  PairedTrajectories out;
  out.with_tests = simulate_bpre(noisy_arm);  // noisy arm
  out.without = simulate_bpre(true_arm);      // true-oracle arm
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation and CSV output

std::vector<std::vector<std::int64_t>> errors_by_step(
    const std::vector<Trajectory>& runs) {
  std::size_t horizon = 0;
  for (const auto& r : runs) horizon = std::max(horizon, r.steps.size());
  std::vector<std::vector<std::int64_t>> out(horizon);
  for (const auto& run : runs) {
    for (std::size_t t = 0; t < horizon; ++t) {
      if (t < run.steps.size()) {
        out[t].push_back(run.steps[t].errors);
      } else if (run.status == RunStatus::extinct) {
        out[t].push_back(0);  // extinction is absorbing
      }
      // exploded/censored runs drop out of later aggregates
    }
  }
  return out;
}

double extinction_fraction_at(const std::vector<Trajectory>& runs,
                              std::int64_t t) {
  if (runs.empty()) return 0.0;
  std::size_t extinct = 0;
  for (const auto& run : runs) {
    std::size_t last = run.steps.size() - 1;
    if (run.status == RunStatus::extinct &&
        run.steps[last].t <= t) {
      ++extinct;
    } else if (static_cast<std::size_t>(t) < run.steps.size() &&
               run.steps[static_cast<std::size_t>(t)].errors == 0) {
      ++extinct;
    }
  }
  return static_cast<double>(extinct) / static_cast<double>(runs.size());
}

namespace {

double quantile_sorted(const std::vector<std::int64_t>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  double idx = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(idx);
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = idx - static_cast<double>(lo);
  return static_cast<double>(sorted[lo]) * (1.0 - frac) +
         static_cast<double>(sorted[hi]) * frac;
}

}  // namespace

void write_trajectories_csv(std::ostream& out,
                            const std::vector<Trajectory>& runs,
                            bool with_test_columns) {
  out << "run_id,t,E_t,delta_size,m_observed,accepted,status";
  if (with_test_columns) out << ",j_prime,j_star";
  out << '\n';
  for (const auto& run : runs) {
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
      const auto& s = run.steps[i];
      out << run.run_id << ',' << s.t << ',' << s.errors << ',' << s.delta_size
          << ',';
      if (s.m_observed >= 0) out << s.m_observed;
      out << ',' << (s.accepted ? 1 : 0) << ',';
      if (i + 1 == run.steps.size()) out << run_status_name(run.status);
      if (with_test_columns) out << ',' << s.j_prime << ',' << s.j_star;
      out << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const std::vector<Trajectory>& runs) {
  out << "t,mean,median,q05,q95,extinct_fraction\n";
  out << std::setprecision(10);
  auto by_step = errors_by_step(runs);
  for (std::size_t t = 0; t < by_step.size(); ++t) {
    auto values = by_step[t];
    if (values.empty()) break;
    std::sort(values.begin(), values.end());
    double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                  static_cast<double>(values.size());
    out << t << ',' << mean << ',' << quantile_sorted(values, 0.5) << ','
        << quantile_sorted(values, 0.05) << ',' << quantile_sorted(values, 0.95)
        << ',' << extinction_fraction_at(runs, static_cast<std::int64_t>(t))
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// Config files and the simulation job runner

namespace {

using nlohmann::json;

decision::BetaPrior parse_beta(const json& j) {
  return decision::BetaPrior{j.at("alpha").get<double>(),
                             j.at("beta").get<double>()};
}

LambdaSpec parse_lambda(const json& j) {
  LambdaSpec spec;
  if (j.is_number()) {
    spec.value = j.get<double>();
    return spec;
  }
  std::string type = j.at("type").get<std::string>();
  if (type == "fixed") {
    spec.value = j.at("value").get<double>();
  } else if (type == "beta") {
    spec.value = parse_beta(j);
  } else {
    fail(ErrorCode::io_error, "unknown lambda type '" + type + "'");
  }
  return spec;
}

std::optional<decision::DecisionConfig> parse_decision(const json& j) {
  if (j.is_null()) return std::nullopt;
  decision::DecisionConfig cfg;
  cfg.n = j.at("n").get<int>();
  cfg.m = j.at("m").get<int>();
  if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
  return cfg;
}

}  // namespace

SimJob load_sim_config(const std::string& path) {
  json j;
  try {
    j = json::parse(data::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, std::string("bad simulation config: ") + e.what());
  }
  try {
    SimJob job;
    job.kind = j.at("kind").get<std::string>();
    std::uint64_t seed = j.at("seed").get<std::uint64_t>();  // explicit seed
    if (job.kind == "bpre") {
      BpreConfig c;
      c.seed = seed;
      c.initial_errors = j.at("initial_errors").get<std::int64_t>();
      c.prior_r = parse_beta(j.at("prior_r"));
      if (j.contains("lambda")) c.lambda = parse_lambda(j.at("lambda"));
      if (j.contains("decision")) c.decision = parse_decision(j.at("decision"));
      if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<std::int64_t>();
      if (j.contains("runs")) c.runs = j.at("runs").get<std::int64_t>();
      if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
      if (j.contains("explosion_cap")) c.explosion_cap = j.at("explosion_cap").get<std::int64_t>();
      job.config = c;
    } else if (job.kind == "text") {
      TextSimConfig c;
      c.seed = seed;
      c.truth_size = j.at("truth_size").get<std::size_t>();
      if (j.contains("corruption_p")) c.corruption_p = j.at("corruption_p").get<double>();
      if (j.contains("vocabulary_size")) c.vocabulary_size = j.at("vocabulary_size").get<std::size_t>();
      if (j.contains("vocabulary_path")) c.vocabulary_path = j.at("vocabulary_path").get<std::string>();
      c.prior_r = parse_beta(j.at("prior_r"));
      if (j.contains("lambda")) c.lambda = parse_lambda(j.at("lambda"));
      if (j.contains("decision")) c.decision = parse_decision(j.at("decision"));
      if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<std::int64_t>();
      if (j.contains("runs")) c.runs = j.at("runs").get<std::int64_t>();
      if (j.contains("explosion_cap")) c.explosion_cap = j.at("explosion_cap").get<std::int64_t>();
      job.config = c;
    } else if (job.kind == "tests") {
      TestsSimConfig c;
      c.seed = seed;
      if (j.contains("rows")) c.rows = j.at("rows").get<std::size_t>();
      if (j.contains("cols")) c.cols = j.at("cols").get<std::size_t>();
      if (j.contains("initial_errors")) c.initial_errors = j.at("initial_errors").get<std::int64_t>();
      if (j.contains("pin_fraction")) c.pin_fraction = j.at("pin_fraction").get<double>();
      if (j.contains("prior_r")) c.prior_r = parse_beta(j.at("prior_r"));
      if (j.contains("lambda")) c.lambda = parse_lambda(j.at("lambda"));
      if (j.contains("decision")) {
        auto d = parse_decision(j.at("decision"));
        if (d) c.decision = *d;
      }
      if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<std::int64_t>();
      if (j.contains("pairs")) c.pairs = j.at("pairs").get<std::int64_t>();
      job.config = c;
    } else if (job.kind == "noisy") {
      NoisySimConfig c;
      c.seed = seed;
      if (j.contains("initial_errors")) c.initial_errors = j.at("initial_errors").get<std::int64_t>();
      if (j.contains("prior_r")) c.prior_r = parse_beta(j.at("prior_r"));
      if (j.contains("lambda")) c.lambda = parse_lambda(j.at("lambda"));
      if (j.contains("n")) c.n = j.at("n").get<int>();
      if (j.contains("m")) c.m = j.at("m").get<int>();
      if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
      if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<std::int64_t>();
      if (j.contains("runs")) c.runs = j.at("runs").get<std::int64_t>();
      if (j.contains("explosion_cap")) c.explosion_cap = j.at("explosion_cap").get<std::int64_t>();
      job.config = c;
    } else {
      fail(ErrorCode::invalid_argument,
           "unknown simulation kind '" + job.kind + "'");
    }
    return job;
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, std::string("bad simulation config: ") + e.what());
  }
}

namespace {

void write_csv_file(const std::string& path, const std::string& content) {
  data::write_file(path, content);
}

std::string trajectories_string(const std::vector<Trajectory>& runs,
                                bool test_cols = false) {
  std::ostringstream ss;
  write_trajectories_csv(ss, runs, test_cols);
  return ss.str();
}

std::string summary_string(const std::vector<Trajectory>& runs) {
  std::ostringstream ss;
  write_summary_csv(ss, runs);
  return ss.str();
}

}  // namespace

void run_sim_job(const SimJob& job, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto path = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  if (const auto* c = std::get_if<BpreConfig>(&job.config)) {
    auto runs = simulate_bpre(*c);
    write_csv_file(path("trajectories.csv"), trajectories_string(runs));
    write_csv_file(path("summary.csv"), summary_string(runs));
  } else if (const auto* c = std::get_if<TextSimConfig>(&job.config)) {
    auto runs = simulate_text(*c);
    write_csv_file(path("trajectories.csv"), trajectories_string(runs));
    write_csv_file(path("summary.csv"), summary_string(runs));
  } else if (const auto* c = std::get_if<TestsSimConfig>(&job.config)) {
    TestRegistry empty;
    auto paired = simulate_with_tests(*c, empty);
    write_csv_file(path("trajectories_with_tests.csv"),
                   trajectories_string(paired.with_tests, true));
    write_csv_file(path("trajectories_without_tests.csv"),
                   trajectories_string(paired.without, true));
    write_csv_file(path("summary_with_tests.csv"), summary_string(paired.with_tests));
    write_csv_file(path("summary_without_tests.csv"), summary_string(paired.without));
  } else {
    const auto& noisy = std::get<NoisySimConfig>(job.config);
    auto paired = simulate_noisy_oracle(noisy);
    write_csv_file(path("trajectories_noisy.csv"), trajectories_string(paired.with_tests));
    write_csv_file(path("trajectories_true.csv"), trajectories_string(paired.without));
    write_csv_file(path("summary_noisy.csv"), summary_string(paired.with_tests));
    write_csv_file(path("summary_true.csv"), summary_string(paired.without));
  }
}

}  // namespace curate::sim
