#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "pearsonbf/errors.hpp"

namespace pearsonbf {

// How strictly the Pearson prior shape alpha is validated. Consistency is the
// range the method is proven consistent on; Permissive widens to alpha > -1,
// where the formulas stay mathematically defined, for exploratory use.
enum class AlphaPolicy { Consistency, Permissive };

inline void validate_alpha(double alpha, AlphaPolicy policy) {
  if (!std::isfinite(alpha)) throw DomainError("alpha must be finite");
  if (policy == AlphaPolicy::Consistency) {
    if (alpha < -0.5 || alpha > 0.0) {
      throw DomainError("alpha must lie in [-1/2, 0] (got " +
                        std::to_string(alpha) +
                        "); use AlphaPolicy::Permissive to widen to (-1, inf)");
    }
  } else if (alpha <= -1.0) {
    throw DomainError("alpha must exceed -1 for Gamma(alpha+1) to be defined");
  }
}

// The minimal ANOVA summary an analytic Bayes factor needs: the observed F,
// the between-treatments df x and residual df y, optionally the design
// counts. For a repeated-measures design x = k-1 and y = (n-1)(k-1).
struct SummaryStats {
  double f_stat = 0.0;
  int x = 0;
  int y = 0;
  std::optional<int> n_subjects;
  std::optional<int> k_conditions;

  void validate() const {
    if (!std::isfinite(f_stat) || f_stat < 0.0) {
      throw DomainError("SummaryStats: F must be finite and >= 0, got " +
                        std::to_string(f_stat));
    }
    if (x < 1) throw DomainError("SummaryStats: x must be >= 1");
    if (y < 2) throw DomainError("SummaryStats: y must be >= 2");
    if (n_subjects && k_conditions) {
      const int n = *n_subjects;
      const int k = *k_conditions;
      if (n < 2 || k < 2) {
        throw DomainError("SummaryStats: need n >= 2 and k >= 2");
      }
      if (x != k - 1 || y != (n - 1) * (k - 1)) {
        throw DomainError(
            "SummaryStats: repeated-measures dfs inconsistent with design "
            "(expected x = k-1 = " +
            std::to_string(k - 1) + ", y = (n-1)(k-1) = " +
            std::to_string((n - 1) * (k - 1)) + ")");
      }
    }
  }

  // Builds the summary for a repeated-measures design from (F, n, k).
  static SummaryStats repeated_measures(double f, int n, int k) {
    SummaryStats s{f, k - 1, (n - 1) * (k - 1), n, k};
    s.validate();
    return s;
  }
};

// Pearson Type VI hyperparameters under the one-parameter reduction:
// kappa is the scale (the per-condition observation count) and
// beta = (N - k)/2 - alpha - 2 ties the prior to the design size.
struct PriorSpec {
  double alpha;
  double kappa;
  double beta;

  PriorSpec(double alpha_, double kappa_, double beta_,
            AlphaPolicy policy = AlphaPolicy::Consistency)
      : alpha(alpha_), kappa(kappa_), beta(beta_) {
    validate_alpha(alpha, policy);
    if (!std::isfinite(kappa) || kappa <= 0.0) {
      throw DomainError("PriorSpec: kappa must be positive");
    }
    if (!std::isfinite(beta) || beta <= -1.0) {
      throw DomainError(
          "PriorSpec: beta must exceed -1 (design too small for a proper "
          "prior); got beta = " +
          std::to_string(beta));
    }
  }

  static PriorSpec wang_sun(double alpha, double kappa, double n_obs, int k,
                            AlphaPolicy policy = AlphaPolicy::Consistency) {
    return PriorSpec(alpha, kappa, 0.5 * (n_obs - k) - alpha - 2.0, policy);
  }
};

}  // namespace pearsonbf
