#pragma once

#include <functional>
#include <span>

namespace huberfactor {

double mean(std::span<const double> x);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> x);

/// Quantile by linear interpolation between order statistics, h = (n-1)p + 1.
double quantile_linear(std::span<const double> x, double p);

double median(std::span<const double> x);

/// quantile(0.75) - quantile(0.25).
double iqr(std::span<const double> x);

/// Runs body(k) for k in [0, count) on up to `threads` workers. Every index is
/// visited exactly once; the first exception thrown by any body is rethrown
/// after all workers finish. threads <= 1 runs inline.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

/// Worker count used when a caller asks for "machine parallelism".
int default_thread_count();

}  // namespace huberfactor
