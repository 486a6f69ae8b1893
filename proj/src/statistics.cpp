#include "mghmc/statistics.hpp"

#include "mghmc/geometry.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mghmc {

BatchedHistogram::BatchedHistogram(double lo, double hi, std::size_t bins, std::uint64_t batch_length)
    : lo_(lo), hi_(hi), batch_length_(batch_length), counts_(bins, 0), current_(bins, 0) {
  if (bins < 2) throw InvalidParams("histogram needs at least 2 bins");
  if (!(hi > lo)) throw InvalidParams("histogram range must be non-empty");
  if (batch_length < 1) throw InvalidParams("batch length must be >= 1");
}

void BatchedHistogram::add(double x) {
  const double u = (x - lo_) / (hi_ - lo_) * static_cast<double>(counts_.size());
  auto bin = static_cast<std::ptrdiff_t>(std::floor(u));
  bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(counts_.size()) - 1);
  ++counts_[static_cast<std::size_t>(bin)];
  ++current_[static_cast<std::size_t>(bin)];
  ++total_;
  if (++in_current_ == batch_length_) {
    batch_counts_.push_back(current_);
    std::fill(current_.begin(), current_.end(), 0U);
    in_current_ = 0;
  }
}

double BatchedHistogram::density(std::size_t i) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(counts_[i]) / (static_cast<double>(total_) * bin_width());
}

double chi_square_upper_tail(double statistic, double dof) {
  if (!(statistic > 0.0)) return 1.0;
  if (!std::isfinite(statistic)) return 0.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double chi_square_critical(double dof, double alpha) {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

ChiSquareResult chi_square_test(const BatchedHistogram& h, std::span<const double> expected) {
  if (expected.size() != h.bins()) throw InvalidParams("expected probabilities do not match bins");
  ChiSquareResult res;
  const auto n = static_cast<double>(h.total());
  std::size_t used = 0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (!(expected[i] > 0.0)) continue;
    const double e = n * expected[i];
    const double d = static_cast<double>(h.count(i)) - e;
    res.statistic += d * d / e;
    ++used;
  }
  res.degrees_of_freedom = static_cast<double>(used) - 1.0;

  // Design effect of each bin frequency from batch means: the variance of a
  // batch frequency times the batch length, over p (1 - p).
  const auto& batches = h.batch_counts();
  const std::size_t nb = batches.size();
  if (nb >= 2 && res.degrees_of_freedom > 0.0) {
    const auto len = static_cast<double>(h.batch_length());
    double weighted = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
      const double p = expected[i];
      if (!(p > 0.0) || !(p < 1.0)) continue;
      double mean = 0.0;
      for (const auto& b : batches) mean += b[i] / len;
      mean /= static_cast<double>(nb);
      double var = 0.0;
      for (const auto& b : batches) {
        const double f = b[i] / len - mean;
        var += f * f;
      }
      var /= static_cast<double>(nb - 1);
      weighted += (1.0 - p) * var * len / (p * (1.0 - p));
    }
    res.design_effect = weighted / res.degrees_of_freedom;
  }
  res.corrected_statistic =
      res.design_effect > 0.0 ? res.statistic / res.design_effect : res.statistic;
  res.p_value = chi_square_upper_tail(res.corrected_statistic, res.degrees_of_freedom);
  return res;
}

double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_uniform(std::vector<double> samples, double lo, double hi) {
  if (samples.empty()) throw InvalidParams("KS test needs samples");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double root = std::sqrt(n);
  return {d, kolmogorov_tail((root + 0.12 + 0.11 / root) * d)};
}

void ResidenceTracker::observe(std::uint64_t n, double x) {
  if (static_cast<double>(well_) * x < -threshold_) {
    ++switches_;
    last_switch_ = n;
    well_ = -well_;
  }
}

double ResidenceTracker::mean_residence() const {
  if (switches_ == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(last_switch_) / static_cast<double>(switches_);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidParams("line fit needs >= 2 paired points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidParams("line fit needs distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      ssr += r * r;
    }
    fit.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return fit;
}

LinearFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  std::transform(x.begin(), x.end(), lx.begin(), [](double v) { return std::log(v); });
  std::transform(y.begin(), y.end(), ly.begin(), [](double v) { return std::log(v); });
  return fit_line(lx, ly);
}

double binomial_stderr(double p, std::uint64_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

}  // namespace mghmc
