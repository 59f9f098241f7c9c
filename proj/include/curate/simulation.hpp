// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#ifndef CURATE_SIMULATION_HPP
#define CURATE_SIMULATION_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "curate/decision.hpp"
#include "curate/edits.hpp"
#include "curate/rng.hpp"

namespace curate::sim {

// lambda_t: either a fixed revision intensity or a fresh Beta draw per step.
struct LambdaSpec {
  std::variant<double, decision::BetaPrior> value = 0.5;

  double mean() const;
  double draw(Rng& rng) const;
};

struct BpreConfig {
  std::int64_t initial_errors = 0;
  decision::BetaPrior prior_r{1.0, 1.0};
  LambdaSpec lambda;
  std::optional<decision::DecisionConfig> decision;  // none = accept all
  std::int64_t max_steps = 100;
  std::int64_t runs = 1;
  std::uint64_t seed = 0;
  double epsilon = 0.0;  // oracle noise applied to review verdicts
  std::int64_t explosion_cap = 1000000;
};

// Token-frequency source for the text simulation. The bundled default is a
// synthetic Zipf distribution; any "token frequency" file can be ingested.
struct Vocabulary {
  std::vector<std::string> tokens;
  std::vector<double> weights;

  static Vocabulary zipf(std::size_t size);
  static Vocabulary from_file(const std::string& path);
  std::size_t size() const { return tokens.size(); }
};

struct TextSimConfig {
  std::size_t truth_size = 0;     // word count N
  double corruption_p = 1.0 / 300.0;
  std::size_t vocabulary_size = 0;  // 0 = 2 * truth_size
  std::string vocabulary_path;      // overrides the synthetic vocabulary
  decision::BetaPrior prior_r{1.0, 1.0};
  LambdaSpec lambda;
  std::optional<decision::DecisionConfig> decision;
  std::int64_t max_steps = 100;
  std::int64_t runs = 1;
  std::uint64_t seed = 0;
  std::int64_t explosion_cap = 1000000;
};

// Coordinate-value pins over a fixed table (Theorem-style data tests).
struct TestAssertion {
  std::size_t row = 0;
  std::size_t col = 0;
  Scalar value;
};

struct TestRegistry {
  std::vector<TestAssertion> assertions;

  std::size_t size() const { return assertions.size(); }
  // Number of violated assertions against a table.
  std::size_t violations(const data::FixedTable& table) const;
};

struct TestsSimConfig {
  std::size_t rows = 12;
  std::size_t cols = 12;
  std::int64_t initial_errors = 16;
  double pin_fraction = 0.2;  // share of cells covered by assertions
  decision::BetaPrior prior_r{3.0, 2.0};
  LambdaSpec lambda;
  decision::DecisionConfig decision{4, 2, 0.0};
  std::int64_t max_steps = 60;
  std::int64_t pairs = 500;
  std::uint64_t seed = 0;
};

struct NoisySimConfig {
  std::int64_t initial_errors = 500;
  decision::BetaPrior prior_r{1.0, 2.0};
  LambdaSpec lambda;
  int n = 20;
  int m = 10;
  double epsilon = 0.2;
  std::int64_t max_steps = 80;
  std::int64_t runs = 50;
  std::uint64_t seed = 0;
  std::int64_t explosion_cap = 1000000;
};

enum class RunStatus { extinct, censored, exploded };
const char* run_status_name(RunStatus s);

struct StepRecord {
  std::int64_t t = 0;
  std::int64_t errors = 0;      // E_t, before the step's proposal
  std::int64_t delta_size = 0;  // |Delta_t|
  std::int64_t m_observed = -1; // -1 when no review happened
  bool accepted = false;
  std::int64_t j_prime = 0;  // pins on changed dimensions (tests sim)
  std::int64_t j_star = 0;   // of those, not in the review sample
};

struct Trajectory {
  std::int64_t run_id = 0;
  std::vector<StepRecord> steps;  // includes a terminal record for E_T
  RunStatus status = RunStatus::censored;

  std::int64_t initial_errors() const;
  std::int64_t final_errors() const;
};

std::vector<Trajectory> simulate_bpre(const BpreConfig& config);

// Independent per-word corruption: one categorical draw per position over
// {keep, remove, replace, insert-after} with probabilities
// (1-3p, p, p, p). Replacement and inserted words are drawn from the
// vocabulary outside the truth's support so that every corruption op
// costs its full distance (delete 1, insert 1, replace 2).
data::TokenSequence corrupt_sequence(const data::TokenSequence& truth,
                                     const Vocabulary& vocab, double p,
                                     std::uint64_t seed);

// Mechanical proposal: each outstanding error is addressed with
// probability lambda; an addressed error is fixed correctly with
// probability 1-r, otherwise the "fix" is a fresh error (junk token or
// junk cell value) that raises the distance by one.
data::DataState generate_proposal(const data::DataState& state,
                                  const data::DataState& truth, double r,
                                  double lambda, std::uint64_t seed,
                                  const std::string& junk_tag);

std::vector<Trajectory> simulate_text(const TextSimConfig& config);

struct PairedTrajectories {
  std::vector<Trajectory> with_tests;   // or: noisy arm
  std::vector<Trajectory> without;      // or: true-oracle arm
};

// Matched pairs (shared seeds) with and without the data-test gate; the
// gate rejects any proposal violating an assertion before sampling.
PairedTrajectories simulate_with_tests(const TestsSimConfig& config,
                                       const TestRegistry& registry);

// Builds the registry + truth/initial state for a tests simulation:
// errors are placed on unpinned cells, pins cover correct cells.
struct TestsSimSetup {
  data::FixedTable truth;
  data::FixedTable initial;
  TestRegistry registry;
};
TestsSimSetup make_tests_setup(const TestsSimConfig& config,
                               std::uint64_t seed);

// True-oracle arm at (n, m) paired with a noisy arm at noisy_adjust(n,m,e).
PairedTrajectories simulate_noisy_oracle(const NoisySimConfig& config);

// Trajectory CSV: run_id,t,E_t,delta_size,m_observed,accepted,status
// (tests-sim trajectories append j_prime,j_star).
void write_trajectories_csv(std::ostream& out,
                            const std::vector<Trajectory>& runs,
                            bool with_test_columns = false);

// Summary CSV: t,mean,median,q05,q95,extinct_fraction. Exploded runs drop
// out of aggregates after their cap step; extinct runs stay at zero.
void write_summary_csv(std::ostream& out,
                       const std::vector<Trajectory>& runs);

// Per-t E_t values pooled across runs (empty once a run exploded).
std::vector<std::vector<std::int64_t>> errors_by_step(
    const std::vector<Trajectory>& runs);

double extinction_fraction_at(const std::vector<Trajectory>& runs,
                              std::int64_t t);

struct SimJob {
  std::string kind;  // bpre | text | tests | noisy
  std::variant<BpreConfig, TextSimConfig, TestsSimConfig, NoisySimConfig>
      config;
};

SimJob load_sim_config(const std::string& path);
// Runs the job and writes trajectory + summary CSVs into out_dir.
void run_sim_job(const SimJob& job, const std::string& out_dir);

}  // namespace curate::sim

#endif  // CURATE_SIMULATION_HPP
