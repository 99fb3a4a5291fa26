#pragma once

#include <cstddef>
#include <span>

namespace shallowrl {

double mean(std::span<const double> xs);
/// Sample (n - 1) standard deviation; NaN for fewer than two values.
double sample_stddev(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

/// Cross-trial view of per-trial evaluation means.
struct TrialSummary {
  std::size_t trials = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t best_trial = 0;
  double best = 0.0;
  /// The ceil(n/2)-th best trial (12th of 24; the median for odd n).
  std::size_t middle_trial = 0;
  double middle = 0.0;
  double worst = 0.0;
};

/// Ranks trials by mean, highest first; equal means keep trial order.
TrialSummary summarize_trials(std::span<const double> trial_means);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  /// Two-sided.
  double p = 1.0;
};

/// Unequal-variance two-sample t-test with Welch-Satterthwaite degrees of
/// freedom. Both samples need at least two values. Two constant samples give
/// p = 1 when their means agree and p = 0 otherwise.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace shallowrl
