#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "pearsonbf/errors.hpp"
#include "pearsonbf/special_functions.hpp"
#include "pearsonbf/summary_stats.hpp"

namespace pearsonbf {

enum class Method { PearsonRM, PearsonBetween, BicRM, GdsOracle };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::PearsonRM: return "pearson_rm";
    case Method::PearsonBetween: return "pearson_between";
    case Method::BicRM: return "bic_rm";
    case Method::GdsOracle: return "gds_oracle";
  }
  return "unknown";
}

enum class Hypothesis { H0, H1 };

// Evidence for H1 over H0, kept in natural-log domain so Gamma-heavy values
// never overflow; exponentiation happens only at the accessors.
struct BayesFactor {
  double log_bf10;
  Method method;
  std::optional<double> alpha_used;

  double bf10() const { return std::exp(log_bf10); }
  double bf01() const { return std::exp(-log_bf10); }
  double log10_bf10() const { return log_bf10 / 2.302585092994045684; }
};

namespace detail {

// Wang-Sun analytic Bayes factor as a function of the variance ratio
// r = SSR/SST (passed as ln r), for a k-group design with n_obs independent
// observations. Both public formulas are thin wrappers over this core.
inline double wang_sun_log_bf10(double log_rss_ratio, int k, double n_obs,
                                double alpha) {
  return log_gamma(0.5 * k + alpha + 0.5) + log_gamma(0.5 * (n_obs - k)) -
         log_gamma(0.5 * (n_obs - 1)) - log_gamma(alpha + 1.0) +
         (alpha - 0.5 * (n_obs - k - 2.0)) * log_rss_ratio;
}

}  // namespace detail

// Analytic repeated-measures Bayes factor from (F, x, y):
//   BF10 = Gamma(x/2+a+1) Gamma((y-1)/2) / (Gamma((x+y-1)/2) Gamma(a+1))
//          * (y/(y+xF))^(a-(y-3)/2)
inline BayesFactor pearson_bf_rm(const SummaryStats& stats, double alpha,
                                 AlphaPolicy policy = AlphaPolicy::Consistency) {
  stats.validate();
  validate_alpha(alpha, policy);
  const double x = stats.x;
  const double y = stats.y;
  const double log_ratio = std::log(y) - std::log(y + x * stats.f_stat);
  const double log_bf10 = log_gamma(0.5 * x + alpha + 1.0) +
                          log_gamma(0.5 * (y - 1.0)) -
                          log_gamma(0.5 * (x + y - 1.0)) -
                          log_gamma(alpha + 1.0) +
                          (alpha - 0.5 * (y - 3.0)) * log_ratio;
  return {log_bf10, Method::PearsonRM, alpha};
}

// Between-subjects Wang-Sun Bayes factor for k groups and N = n_total
// observations, with SSR/SST recovered from F via x = k-1, y = N-k.
inline BayesFactor pearson_bf_between(double f_stat, int k, int n_total,
                                      double alpha,
                                      AlphaPolicy policy = AlphaPolicy::Consistency) {
  if (!std::isfinite(f_stat) || f_stat < 0.0) {
    throw DomainError("pearson_bf_between: F must be finite and >= 0");
  }
  if (k < 2) throw DomainError("pearson_bf_between: k must be >= 2");
  if (n_total <= k) {
    throw DomainError("pearson_bf_between: n_total must exceed k");
  }
  validate_alpha(alpha, policy);
  const double x = k - 1;
  const double y = n_total - k;
  const double log_ratio = std::log(y) - std::log(y + x * f_stat);
  return {detail::wang_sun_log_bf10(log_ratio, k, n_total, alpha),
          Method::PearsonBetween, alpha};
}

// BIC approximation for the repeated-measures design:
//   BF01 ~= sqrt((nk-n)^(k-1) (1 + F/(n-1))^(n-nk)), stored as log BF10.
inline BayesFactor bic_bf_rm(double f_stat, int n, int k) {
  if (!std::isfinite(f_stat) || f_stat < 0.0) {
    throw DomainError("bic_bf_rm: F must be finite and >= 0");
  }
  if (n < 2 || k < 2) {
    throw DomainError("bic_bf_rm: need n >= 2 and k >= 2");
  }
  const double log_bf01 =
      0.5 * ((k - 1) * std::log(static_cast<double>(n) * k - n) +
             (static_cast<double>(n) - static_cast<double>(n) * k) *
                 std::log1p(f_stat / (n - 1.0)));
  return {-log_bf01, Method::BicRM, std::nullopt};
}

// Sellke-Bayarri-Berger upper bound on BF10 from a p-value:
//   B(p) = -1/(e p ln p), valid for 0 < p < 1/e.
inline double sellke_bound(double p) {
  constexpr double kInvE = 0.36787944117144232160;  // 1/e
  if (!std::isfinite(p) || p <= 0.0 || p >= kInvE) {
    throw DomainError("sellke_bound: requires 0 < p < 1/e ~= 0.3679, got " +
                      std::to_string(p));
  }
  constexpr double kE = 2.71828182845904523536;
  return -1.0 / (kE * p * std::log(p));
}

// Posterior model probabilities (H0, H1) from a Bayes factor and prior odds
// w = p(H0)/p(H1). Computed from the log Bayes factor through a stable
// logistic, so extreme evidence never overflows.
inline std::pair<Probability, Probability> posterior_prob(
    const BayesFactor& bf, double prior_odds_h0 = 1.0) {
  if (!std::isfinite(prior_odds_h0) || prior_odds_h0 <= 0.0) {
    throw DomainError("posterior_prob: prior odds must be positive");
  }
  // p(H0|y) = 1 / (1 + exp(z)), z = log BF10 - ln w
  const double z = bf.log_bf10 - std::log(prior_odds_h0);
  double p_h0;
  if (z >= 0.0) {
    const double e = std::exp(-z);
    p_h0 = e / (1.0 + e);
  } else {
    p_h0 = 1.0 / (1.0 + std::exp(z));
  }
  return {Probability(p_h0), Probability(1.0 - p_h0)};
}

// Pearson Type VI log density at tau >= 0:
//   ln pi(tau) = ln k + b ln(k tau) - (a+b+2) ln(1+k tau) - ln B(a+1, b+1).
inline double pearson_prior_log_density(double tau, const PriorSpec& prior) {
  if (!std::isfinite(tau) || tau < 0.0) {
    throw DomainError("pearson_prior_density: tau must be >= 0");
  }
  const double log_norm = log_beta(prior.alpha + 1.0, prior.beta + 1.0);
  if (tau == 0.0) {
    if (prior.beta > 0.0) return -std::numeric_limits<double>::infinity();
    if (prior.beta == 0.0) return std::log(prior.kappa) - log_norm;
    return std::numeric_limits<double>::infinity();  // integrable singularity
  }
  const double kt = prior.kappa * tau;
  return std::log(prior.kappa) + prior.beta * std::log(kt) -
         (prior.alpha + prior.beta + 2.0) * std::log1p(kt) - log_norm;
}

inline double pearson_prior_density(double tau, const PriorSpec& prior) {
  return std::exp(pearson_prior_log_density(tau, prior));
}

// Everything a report consumer wants in one bundle.
struct EvidenceReport {
  BayesFactor bf;
  double bf10;
  double bf01;
  Hypothesis favored;
  double directed_bf;  // max(bf10, bf01), always >= 1
  Probability posterior_h0;
  Probability posterior_h1;
  std::optional<Probability> p_value;
  std::optional<double> sellke_bound_bf10;  // present only when p < 1/e
};

inline EvidenceReport evidence_report(const SummaryStats& stats, double alpha,
                                      Method method, double prior_odds_h0 = 1.0,
                                      AlphaPolicy policy = AlphaPolicy::Consistency) {
  stats.validate();
  BayesFactor bf{0.0, method, std::nullopt};
  switch (method) {
    case Method::PearsonRM:
      bf = pearson_bf_rm(stats, alpha, policy);
      break;
    case Method::PearsonBetween:
      // k and N are implied by the dfs: k = x+1, N = x+y+1.
      bf = pearson_bf_between(stats.f_stat, stats.x + 1, stats.x + stats.y + 1,
                              alpha, policy);
      break;
    case Method::BicRM:
      if (!stats.n_subjects || !stats.k_conditions) {
        throw DomainError(
            "evidence_report: the BIC method needs subject and condition "
            "counts (n, k)");
      }
      bf = bic_bf_rm(stats.f_stat, *stats.n_subjects, *stats.k_conditions);
      break;
    default:
      throw DomainError("evidence_report: unsupported method");
  }
  const auto [p_h0, p_h1] = posterior_prob(bf, prior_odds_h0);
  const Probability p = f_upper_tail(stats.f_stat, stats.x, stats.y);
  constexpr double kInvE = 0.36787944117144232160;
  EvidenceReport report{
      bf,
      bf.bf10(),
      bf.bf01(),
      bf.log_bf10 > 0.0 ? Hypothesis::H1 : Hypothesis::H0,  // tie -> H0
      std::exp(std::fabs(bf.log_bf10)),
      p_h0,
      p_h1,
      p,
      std::nullopt};
  if (p.value() > 0.0 && p.value() < kInvE) {
    report.sellke_bound_bf10 = sellke_bound(p.value());
  }
  return report;
}

// Recovers F from its upper-tail probability by bisection, to an absolute
// p tolerance of 1e-12.
inline double invert_f_upper_tail(double p, int x, int y) {
  if (!std::isfinite(p) || p <= 0.0 || p >= 1.0) {
    throw DomainError("invert_f_upper_tail: p must lie in (0, 1)");
  }
  constexpr double kTol = 1e-12;
  double lo = 0.0;
  double hi = 1.0;
  while (f_upper_tail(hi, x, y).value() > p) {
    hi *= 2.0;
    if (hi > 1e300) {
      throw ConvergenceError("invert_f_upper_tail: failed to bracket F");
    }
  }
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double pm = f_upper_tail(mid, x, y).value();
    if (std::fabs(pm - p) <= kTol) return mid;
    if (pm > p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace pearsonbf
