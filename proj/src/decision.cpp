// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#include "curate/decision.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace curate::decision {

namespace {

double lchoose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double lbeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

void check_rule(int n, int m) {
  if (n < 1 || m < 1 || m > n) {
    fail(ErrorCode::invalid_argument,
         "need 1 <= m <= n, got n=" + std::to_string(n) +
             " m=" + std::to_string(m));
  }
}

// Adaptive Gauss-Kronrod on [lo, hi]; the integrand is supplied in log
// space together with a shift so ratios of integrals stay well scaled.
double integrate_exp(const std::function<double(double)>& log_f, double lo,
                     double hi, double shift) {
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  double value = gauss_kronrod<double, 61>::integrate(
      [&](double r) {
        double lf = log_f(r);
        return std::isfinite(lf) ? std::exp(lf - shift) : 0.0;
      },
      lo, hi, 15, 1e-12, &error);
  if (!(error <= 1e-10 * std::max(1.0, std::abs(value)))) {
    std::ostringstream ss;
    ss << "quadrature did not converge on [" << lo << "," << hi
       << "]: estimate " << value << ", error " << error;
    fail(ErrorCode::numeric_error, ss.str());
  }
  return value;
}

// log likelihood of observing m correct out of n, binomial part only.
// epsilon > 0 is the noisy oracle: any edit is marked correct with
// probability epsilon on top of the true verdict.
double log_likelihood(int n, int m, double epsilon, double r) {
  if (r <= 0.0 || r >= 1.0) {
    // endpoint limits; avoid log(0) blowups inside quadrature
    if (r <= 0.0) return m == n ? 0.0 : -std::numeric_limits<double>::infinity();
    return epsilon > 0.0
               ? m * std::log(epsilon) + 0.0
               : (m == 0 ? 0.0 : -std::numeric_limits<double>::infinity());
  }
  double p_correct = epsilon > 0.0 ? (1.0 - epsilon) * (1.0 - r) + epsilon
                                   : 1.0 - r;
  return m * std::log(p_correct) + (n - m) * std::log(r);
}

struct Moments {
  double mass = 0.0;  // unnormalised
  double mean = 0.0;  // E[r] under the normalised measure
};

// First two prior-weighted moments of the likelihood for one (n, m).
// `floor_atom` places the density-floor prior's upper point mass; it is
// tied to the decision rule under analysis, not to the observed count.
Moments posterior_moments(int n, int m, const PriorSpec& prior, double epsilon,
                          int extra_correct, double floor_atom = -1.0) {
  auto ll = [&](double r) {
    double base = log_likelihood(n, m, epsilon, r);
    // data tests behave like extra correct observations
    if (extra_correct > 0 && r < 1.0) {
      base += extra_correct * std::log1p(-std::min(r, 1.0 - 1e-300));
    }
    return base;
  };
  if (const auto* beta = std::get_if<BetaPrior>(&prior.prior)) {
    if (epsilon == 0.0) {
      // conjugate: posterior is Beta(n - m + a, m + extra + b)
      double a = n - m + beta->alpha;
      double b = m + extra_correct + beta->beta;
      Moments mom;
      mom.mass = std::exp(lchoose(n, m) + lbeta(a, b) -
                          lbeta(beta->alpha, beta->beta));
      mom.mean = a / (a + b);
      return mom;
    }
    auto log_f = [&](double r) {
      return ll(r) + (beta->alpha - 1.0) * std::log(r) +
             (beta->beta - 1.0) * std::log1p(-r);
    };
    double shift = log_f(std::clamp((n - m) / std::max(1.0, double(n)), 1e-6, 1.0 - 1e-6));
    if (!std::isfinite(shift)) shift = 0.0;
    double mass = integrate_exp(log_f, 0.0, 1.0, shift);
    double first = integrate_exp([&](double r) { return log_f(r) + std::log(r); },
                                 0.0, 1.0, shift);
    return Moments{mass, first / mass};
  }
  const auto& floor = std::get<DensityFloor>(prior.prior);
  double atom_r = floor_atom;
  if (atom_r < 0.0) {
    if (2 * m < n) {
      fail(ErrorCode::domain_error,
           "density-floor expectations need 2m >= n (atom sits at r_max)");
    }
    atom_r = r_max(n, m);
  }
  // density `a` on [0, 1/2), remaining mass 1 - a/2 at the atom
  double shift = ll(0.25);
  if (!std::isfinite(shift)) shift = 0.0;
  double cont_mass = floor.a * integrate_exp(ll, 0.0, 0.5, shift);
  double cont_first =
      floor.a * integrate_exp([&](double r) { return ll(r) + std::log(r); },
                              0.0, 0.5, shift);
  double atom_mass = (1.0 - floor.a / 2.0) * std::exp(ll(atom_r) - shift);
  Moments mom;
  mom.mass = cont_mass + atom_mass;
  mom.mean = (cont_first + atom_mass * atom_r) / mom.mass;
  return mom;
}

}  // namespace

double r_max(int n, int m) {
  check_rule(n, m);
  if (2 * m < n) {
    fail(ErrorCode::domain_error,
         "r_max needs 2m >= n, got n=" + std::to_string(n) +
             " m=" + std::to_string(m));
  }
  double disc = std::sqrt(double(2 * m - n) * double(2 * m - n) + 4.0 * (n + 1));
  return (3.0 * n - 2.0 * m + 2.0 + disc) / (4.0 * (n + 1));
}

double c_function_log(int n, int m) {
  check_rule(n, m);
  if (2 * m <= n) {
    fail(ErrorCode::domain_error,
         "C(n,m) needs 2m > n, got n=" + std::to_string(n) +
             " m=" + std::to_string(m));
  }
  double r = r_max(n, m);
  return std::log(2.0) + std::log(double(n) + 1.0) + std::log(double(n) + 2.0) -
         std::log(double(2 * m - n)) + lchoose(n, m) + std::log(r - 0.5) +
         m * std::log1p(-r) + (n - m) * std::log(r);
}

double c_function(int n, int m) { return std::exp(c_function_log(n, m)); }

bool convergence_condition(double a, int n, int m) {
  if (a <= 0.0) return false;
  if (a >= 1.0) return true;  // C/(2+C) < 1 always
  // a > C/(2+C)  <=>  C < 2a/(1-a), compared in log space
  return c_function_log(n, m) < std::log(2.0 * a / (1.0 - a));
}

std::optional<int> min_threshold(double a, int n) {
  if (n < 2) fail(ErrorCode::invalid_argument, "need n >= 2");
  if (a <= 0.0) return std::nullopt;
  for (int m = n / 2 + 1; m <= n; ++m) {
    if (convergence_condition(a, n, m)) return m;
  }
  return std::nullopt;
}

NoisyRule noisy_adjust(int n, int m, double epsilon) {
  check_rule(n, m);
  if (epsilon < 0.0 || epsilon >= 1.0) {
    fail(ErrorCode::domain_error, "epsilon must lie in [0, 1)");
  }
  if (epsilon == 0.0) return NoisyRule{n, m};
  // threshold rounds up, sample size rounds down (both conservative)
  double m_raw = m / (1.0 - epsilon);
  int m_noisy = static_cast<int>(std::ceil(m_raw - 1e-9));
  double n_raw = n + epsilon / (1.0 - epsilon) * m_noisy;
  int n_noisy = static_cast<int>(std::floor(n_raw + 1e-9));
  if (m_noisy > n_noisy) {
    fail(ErrorCode::domain_error,
         "noisy threshold " + std::to_string(m_noisy) +
             " exceeds adjusted sample size " + std::to_string(n_noisy));
  }
  return NoisyRule{n_noisy, m_noisy};
}

double posterior_mean_r(int n, int m, const PriorSpec& prior, double epsilon) {
  if (m < 0 || m > n || n < 1) {
    fail(ErrorCode::invalid_argument, "need 0 <= m <= n");
  }
  if (epsilon < 0.0 || epsilon >= 1.0) {
    fail(ErrorCode::domain_error, "epsilon must lie in [0, 1)");
  }
  return posterior_moments(n, m, prior, epsilon, 0).mean;
}

double tests_adjusted_posterior_mean(int n, int m, int j_star,
                                     const PriorSpec& prior) {
  if (j_star < 0) fail(ErrorCode::invalid_argument, "j_star must be >= 0");
  if (m < 0 || m > n || n < 1) {
    fail(ErrorCode::invalid_argument, "need 0 <= m <= n");
  }
  return posterior_moments(n, m, prior, 0.0, j_star).mean;
}

OffspringStats offspring_stats(int n, int m, const PriorSpec& prior,
                               Conditioning conditioning) {
  check_rule(n, m);
  if (prior.lambda_mean <= 0.0 || prior.lambda_mean > 1.0) {
    fail(ErrorCode::invalid_argument, "lambda_mean must lie in (0, 1]");
  }
  double posterior_r = 0.0;
  double accept_mass = 0.0;
  double total_mass = 0.0;
  // a density-floor prior keeps its adversarial atom at the rule's r_max
  double floor_atom = -1.0;
  if (std::holds_alternative<DensityFloor>(prior.prior)) {
    if (2 * m < n) {
      fail(ErrorCode::domain_error,
           "density-floor offspring stats need 2m >= n");
    }
    floor_atom = r_max(n, m);
  }
  // prior-predictive mixture over the acceptance event M >= m
  double weighted_mean = 0.0;
  for (int k = 0; k <= n; ++k) {
    Moments mom = posterior_moments(n, k, prior, 0.0, 0, floor_atom);
    total_mass += mom.mass;
    if (k >= m) {
      accept_mass += mom.mass;
      weighted_mean += mom.mass * mom.mean;
    }
  }
  if (accept_mass <= 0.0 || !std::isfinite(accept_mass)) {
    fail(ErrorCode::numeric_error,
         "acceptance event has no prior-predictive mass");
  }
  if (conditioning == Conditioning::equal) {
    posterior_r = posterior_moments(n, m, prior, 0.0, 0, floor_atom).mean;
  } else {
    posterior_r = weighted_mean / accept_mass;
  }
  OffspringStats stats;
  stats.posterior_r = posterior_r;
  stats.accept_probability = accept_mass / total_mass;
  double el = prior.lambda_mean;
  stats.p0 = el * (1.0 - posterior_r);
  stats.p1 = 1.0 - el;
  stats.p2 = el * posterior_r;
  stats.mu = 1.0 - 2.0 * el * (0.5 - posterior_r);
  stats.improvement_rate = -std::log(stats.mu);
  stats.step_mu = 1.0 - stats.accept_probability * (1.0 - stats.mu);
  stats.step_improvement_rate = -std::log(stats.step_mu);
  return stats;
}

bool noisy_posterior_mlr_check(int n, int m, double epsilon,
                               std::size_t grid_points) {
  check_rule(n, m);
  if (epsilon < 0.0 || epsilon >= 1.0) {
    fail(ErrorCode::domain_error, "epsilon must lie in [0, 1)");
  }
  // log ratio of the noisy posterior to (1-r)^((1-eps) m) r^(n-m)
  auto log_ratio = [&](double r) {
    return m * std::log((1.0 - epsilon) * (1.0 - r) + epsilon) -
           (1.0 - epsilon) * m * std::log1p(-r);
  };
  double prev = log_ratio(0.5 / static_cast<double>(grid_points));
  for (std::size_t i = 1; i < grid_points; ++i) {
    double r = (static_cast<double>(i) + 0.5) / static_cast<double>(grid_points);
    double cur = log_ratio(r);
    if (cur < prev - 1e-9) return false;
    prev = cur;
  }
  return true;
}

int effective_threshold(const sampling::SampleReport& report,
                        const DecisionConfig& config) {
  check_rule(config.n, config.m);
  NoisyRule rule{config.n, config.m};
  if (config.epsilon > 0.0) {
    rule = noisy_adjust(config.n, config.m, config.epsilon);
  }
  if (report.n == static_cast<std::size_t>(rule.n)) return rule.m;
  if (report.exhaustive && report.n < static_cast<std::size_t>(rule.n)) {
    // an exhausted delta clamps the sample; the rule keeps its ratio
    double scaled = static_cast<double>(rule.m) * static_cast<double>(report.n) /
                    static_cast<double>(rule.n);
    return std::max(1, static_cast<int>(std::ceil(scaled - 1e-9)));
  }
  fail(ErrorCode::invalid_argument,
       "report sample size " + std::to_string(report.n) +
           " does not match the (n=" + std::to_string(rule.n) + ") rule");
}

Outcome decide(const sampling::SampleReport& report,
               const DecisionConfig& config) {
  if (std::size_t u = report.unreviewed_count(); u > 0) {
    fail(ErrorCode::review_incomplete,
         std::to_string(u) + " sampled edits are still unreviewed");
  }
  int threshold = effective_threshold(report, config);
  return report.m_observed() >= static_cast<std::size_t>(threshold)
             ? Outcome::accept
             : Outcome::reject;
}

void write_threshold_table(std::ostream& out, double a,
                           const std::vector<int>& ns) {
  out << "n,m_min,C,r_max,condition_bound\n";
  out << std::setprecision(12);
  for (int n : ns) {
    auto m = min_threshold(a, n);
    if (!m) continue;
    double c = c_function(n, *m);
    out << n << ',' << *m << ',' << c << ',' << r_max(n, *m) << ','
        << c / (2.0 + c) << '\n';
  }
}

void write_rate_curve(std::ostream& out, int n, const PriorSpec& prior,
                      Conditioning conditioning) {
  out << "n,m,m_over_n,mu,improvement_rate,accept_prob,step_rate\n";
  out << std::setprecision(12);
  for (int m = n / 2 + 1; m <= n; ++m) {
    OffspringStats s = offspring_stats(n, m, prior, conditioning);
    out << n << ',' << m << ',' << double(m) / n << ',' << s.mu << ','
        << s.improvement_rate << ',' << s.accept_probability << ','
        << s.step_improvement_rate << '\n';
  }
}

}  // namespace curate::decision
