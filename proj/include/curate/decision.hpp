// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#ifndef CURATE_DECISION_HPP
#define CURATE_DECISION_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "curate/sampling.hpp"

namespace curate::decision {

// Accept a revision iff at least m of n sampled edits are correct.
// epsilon > 0 means verdicts come from a noisy oracle that marks any edit
// correct with probability epsilon; the threshold is then adjusted.
struct DecisionConfig {
  int n = 0;
  int m = 0;
  double epsilon = 0.0;
};

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
};

// Worst-case prior with density `a` on [0, 1/2) and the remaining mass
// 1 - a/2 concentrated at r_max(n, m); numeric expectations under it make
// the convergence condition exactly the sufficient one, not a looser one.
struct DensityFloor {
  double a = 1.0;
};

struct PriorSpec {
  std::variant<BetaPrior, DensityFloor> prior = BetaPrior{};
  double lambda_mean = 0.5;  // E[lambda_t], in (0, 1]
};

enum class Conditioning { equal, at_least };

struct OffspringStats {
  double posterior_r = 0.0;  // E[r | M = m] or E[r | M >= m]
  double p0 = 0.0;           // error fixed
  double p1 = 0.0;           // error untouched
  double p2 = 0.0;           // error mis-fixed, spawning a fresh one
  double mu = 0.0;           // expected offspring mean given acceptance
  double improvement_rate = 0.0;  // -log(mu)
  double accept_probability = 1.0;
  // Per-step factor with rejections folded in: rejected steps leave the
  // error count unchanged, so the curve over m peaks instead of growing.
  double step_mu = 0.0;
  double step_improvement_rate = 0.0;
};

enum class Outcome { accept, reject };

// Argmax of (r - 1/2)(1 - r)^m r^(n-m) on (1/2, 1). Requires 2m >= n.
double r_max(int n, int m);

// log C(n, m); C is evaluated in log space so n up to 1e4 stays finite.
double c_function_log(int n, int m);
double c_function(int n, int m);

// Convergence holds when a > C(n,m) / (2 + C(n,m)). Compared in log space.
bool convergence_condition(double a, int n, int m);

// Smallest m with 2m > n satisfying the convergence condition, if any.
std::optional<int> min_threshold(double a, int n);

struct NoisyRule {
  int n = 0;
  int m = 0;
};

// m_noisy = ceil(m / (1 - eps)); n_noisy = floor(n + eps/(1-eps) * m_noisy).
// Threshold rounds up and sample size rounds down, both conservative.
NoisyRule noisy_adjust(int n, int m, double epsilon);

// E[r | M = m] under likelihood (1-r)^m r^(n-m) (or its noisy variant when
// epsilon > 0) and the given prior. Beta priors use the conjugate closed
// form; density-floor priors and noisy likelihoods use adaptive quadrature
// to 1e-10 absolute tolerance.
double posterior_mean_r(int n, int m, const PriorSpec& prior,
                        double epsilon = 0.0);

// E[r | M = m, J* passing data tests] under likelihood
// (1-r)^(j_star + m) r^(n-m); strictly below posterior_mean_r for j_star>0.
double tests_adjusted_posterior_mean(int n, int m, int j_star,
                                     const PriorSpec& prior);

OffspringStats offspring_stats(int n, int m, const PriorSpec& prior,
                               Conditioning conditioning);

// Grid check of the monotone likelihood ratio between the noisy posterior
// ((1-e)(1-r)+e)^m r^(n-m) and (1-r)^((1-e)m) r^(n-m).
bool noisy_posterior_mlr_check(int n, int m, double epsilon,
                               std::size_t grid_points = 10000);

// The effective acceptance threshold for a report: the configured m,
// noisy-adjusted when epsilon > 0, and scaled proportionally when the
// sample was clamped to an exhausted delta.
int effective_threshold(const sampling::SampleReport& report,
                        const DecisionConfig& config);

Outcome decide(const sampling::SampleReport& report,
               const DecisionConfig& config);

// CSV emitters (External interfaces).
// Threshold table: n,m_min,C,r_max,condition_bound.
void write_threshold_table(std::ostream& out, double a,
                           const std::vector<int>& ns);
// Improvement-rate curve: n,m,m_over_n,mu,improvement_rate plus the
// acceptance-weighted columns accept_prob,step_rate.
void write_rate_curve(std::ostream& out, int n, const PriorSpec& prior,
                      Conditioning conditioning);

}  // namespace curate::decision

#endif  // CURATE_DECISION_HPP
