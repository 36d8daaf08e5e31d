#include "bohmkit/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "bohmkit/error.hpp"

namespace bohmkit {

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t h = x.size() / 2;
  return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

MeanStderr mean_stderr(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of an empty sample");
  MeanStderr r;
  r.n = x.size();
  r.mean = pairwise_sum(x) / double(r.n);
  if (r.n > 1) {
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = (x[i] - r.mean) * (x[i] - r.mean);
    const double var = pairwise_sum(d) / double(r.n - 1);
    r.std_error = std::sqrt(var / double(r.n));
  }
  return r;
}

double chi2_survival(double statistic, std::size_t dof) {
  if (dof == 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * double(dof), 0.5 * statistic);
}

Chi2Result chi2_equiprobable(std::span<const double> samples, const std::function<double(double)>& cdf,
                             const std::function<double(double)>& quantile, std::size_t max_bins) {
  const std::size_t n = samples.size();
  detail::require(n >= 40, "chi-squared test needs at least 40 samples");
  const std::size_t k = std::clamp<std::size_t>(n / 20, 2, std::max<std::size_t>(2, max_bins));
  std::vector<double> edges(k - 1);
  for (std::size_t b = 1; b < k; ++b) edges[b - 1] = quantile(double(b) / double(k));
  std::vector<double> counts(k, 0.0);
  for (double x : samples) {
    const auto b = std::size_t(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
    counts[b] += 1.0;
  }
  // Expected counts from the CDF itself so that quantile round-off does not bias the test.
  std::vector<double> expected(k);
  double prev = 0.0;
  for (std::size_t b = 0; b < k; ++b) {
    const double c = b + 1 < k ? cdf(edges[b]) : 1.0;
    expected[b] = double(n) * (c - prev);
    prev = c;
  }
  return chi2_counts(counts, expected);
}

Chi2Result chi2_counts(std::span<const double> observed, std::span<const double> expected) {
  detail::require(observed.size() == expected.size() && !observed.empty(),
                  "chi-squared needs matching non-empty count arrays");
  std::vector<double> o, e;
  double acc_o = 0.0, acc_e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_o += observed[i];
    acc_e += expected[i];
    if (acc_e >= 5.0) {
      o.push_back(acc_o);
      e.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (e.empty()) {
      o.push_back(acc_o);
      e.push_back(acc_e);
    } else {
      o.back() += acc_o;
      e.back() += acc_e;
    }
  }
  Chi2Result r;
  r.bins = e.size();
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] <= 0.0) continue;
    r.statistic += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  }
  r.dof = r.bins > 1 ? r.bins - 1 : 0;
  r.p_value = chi2_survival(r.statistic, r.dof);
  return r;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  detail::require(!samples.empty(), "KS statistic of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = double(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
  }
  return d;
}

}  // namespace bohmkit
