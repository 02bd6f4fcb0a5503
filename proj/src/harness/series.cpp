#include "isim/harness/series.hpp"

#include <algorithm>
#include <cmath>

#include "isim/errors.hpp"

namespace isim::harness {

std::vector<double> rolling_mean(const std::vector<double>& series, int window) {
  if (series.empty()) throw shape_error("rolling_mean: empty series");
  if (window < 1) throw shape_error("rolling_mean: window must be >= 1");
  std::vector<double> out(series.size());
  double acc = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= static_cast<std::size_t>(window)) acc -= series[i - window];
    const std::size_t n = std::min<std::size_t>(i + 1, window);
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

double delta_first_last(const std::vector<double>& series, int window) {
  if (window < 1) throw shape_error("delta_first_last: window must be >= 1");
  if (series.size() < 2 * static_cast<std::size_t>(window))
    throw shape_error("delta_first_last: series shorter than two windows");
  double first = 0, last = 0;
  for (int i = 0; i < window; ++i) {
    first += series[i];
    last += series[series.size() - window + i];
  }
  return (last - first) / window;
}

double lastn_mean(const std::vector<double>& series, int n) {
  if (n < 1) throw shape_error("lastn_mean: n must be >= 1");
  if (series.size() < static_cast<std::size_t>(n))
    throw shape_error("lastn_mean: series shorter than n");
  double acc = 0;
  for (std::size_t i = series.size() - n; i < series.size(); ++i) acc += series[i];
  return acc / n;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw shape_error("mean: empty");
  double acc = 0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double stddev(const std::vector<double>& xs) {
  const double m = mean(xs);
  double acc = 0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw shape_error("median: empty");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace isim::harness
