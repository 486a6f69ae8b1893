#pragma once

// Goodness-of-fit and summary statistics for correlated MCMC output.

#include <cstdint>
#include <span>
#include <vector>

namespace mghmc {

/// Equal-width histogram over [lo, hi) that also keeps per-batch counts so
/// the variance of each bin frequency can be estimated by batch means.
class BatchedHistogram {
 public:
  BatchedHistogram(double lo, double hi, std::size_t bins, std::uint64_t batch_length);

  void add(double x);

  std::size_t bins() const { return counts_.size(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double bin_width() const { return (hi_ - lo_) / static_cast<double>(counts_.size()); }
  double bin_lo(std::size_t i) const { return lo_ + bin_width() * static_cast<double>(i); }
  std::uint64_t total() const { return total_; }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  /// Empirical density count / (total * width).
  double density(std::size_t i) const;

  /// Complete batches only; a trailing partial batch is ignored.
  std::size_t complete_batches() const { return batch_counts_.size(); }
  const std::vector<std::vector<std::uint32_t>>& batch_counts() const { return batch_counts_; }
  std::uint64_t batch_length() const { return batch_length_; }

 private:
  double lo_;
  double hi_;
  std::uint64_t batch_length_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::vector<std::uint32_t>> batch_counts_;
  std::vector<std::uint32_t> current_;
  std::uint64_t in_current_ = 0;
  std::uint64_t total_ = 0;
};

struct ChiSquareResult {
  /// Pearson statistic assuming independent draws.
  double statistic = 0.0;
  /// Statistic divided by the mean design effect (first-order Rao-Scott).
  double corrected_statistic = 0.0;
  /// Mean variance inflation of the bin frequencies relative to independent
  /// sampling, estimated from batch means; 1 when not estimated.
  double design_effect = 1.0;
  double degrees_of_freedom = 0.0;
  /// Upper-tail probability of corrected_statistic.
  double p_value = 0.0;
};

/// Pearson test of the histogram against expected bin probabilities. When the
/// histogram holds at least 2 complete batches the statistic is corrected for
/// serial correlation.
ChiSquareResult chi_square_test(const BatchedHistogram& h, std::span<const double> expected_probabilities);

/// Upper 1 - alpha quantile of the chi-square law with `dof` degrees of freedom.
double chi_square_critical(double dof, double alpha);
double chi_square_upper_tail(double statistic, double dof);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against Uniform[lo, hi). Sorts a copy.
KsResult ks_test_uniform(std::vector<double> samples, double lo, double hi);

/// Asymptotic Kolmogorov tail P(K > lambda).
double kolmogorov_tail(double lambda);

/// Tracks switches between the wells around x = +R and x = -R: with
/// Theta_0 = 1, switch k+1 happens at the first n with Theta_k x_n < -R, after
/// which Theta flips.
class ResidenceTracker {
 public:
  explicit ResidenceTracker(double threshold, int initial_well = 1)
      : threshold_(threshold), well_(initial_well) {}

  /// Feed x at step n (n increasing, starting at 1).
  void observe(std::uint64_t n, double x);

  std::uint64_t switches() const { return switches_; }
  std::uint64_t last_switch() const { return last_switch_; }
  int well() const { return well_; }
  /// Mean number of steps between consecutive switches (tau_K / K); NaN
  /// when no switch happened.
  double mean_residence() const;

 private:
  double threshold_;
  int well_;
  std::uint64_t switches_ = 0;
  std::uint64_t last_switch_ = 0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y = intercept + slope x. Needs at least 2 points.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);
/// Fit of log y against log x.
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// sqrt(p (1 - p) / n).
double binomial_stderr(double p, std::uint64_t n);

}  // namespace mghmc
