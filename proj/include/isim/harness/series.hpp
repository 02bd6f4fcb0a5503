#pragma once

#include <vector>

namespace isim::harness {

inline constexpr int kRollingWindow = 35;
inline constexpr int kLastN = 120;

// Trailing mean; the first window-1 entries average the available prefix.
std::vector<double> rolling_mean(const std::vector<double>& series,
                                 int window = kRollingWindow);

// mean(last window) - mean(first window) of the raw series.
double delta_first_last(const std::vector<double>& series, int window = kRollingWindow);

double lastn_mean(const std::vector<double>& series, int n = kLastN);

double mean(const std::vector<double>& xs);
double stddev(const std::vector<double>& xs);
double median(std::vector<double> xs);

}  // namespace isim::harness
