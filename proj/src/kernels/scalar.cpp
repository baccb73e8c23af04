#include "dcs/kernels/kernels.hpp"

#include <algorithm>

namespace dcs::kernels {

namespace {

std::size_t select_time(std::span<const std::int64_t> ts, std::int64_t lo, std::int64_t hi, std::uint32_t* out) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] >= lo && ts[i] < hi) out[n++] = static_cast<std::uint32_t>(i);
  }
  return n;
}

std::size_t select_time_value(std::span<const std::int64_t> ts, std::span<const double> values, std::int64_t lo,
                              std::int64_t hi, const ValueBounds& b, std::uint32_t* out) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] >= lo && ts[i] < hi && b.matches(values[i])) out[n++] = static_cast<std::uint32_t>(i);
  }
  return n;
}

Extrema extrema(std::span<const double> values) {
  Extrema e;
  for (double v : values) {
    e.min = std::min(e.min, v);
    e.max = std::max(e.max, v);
    e.sum += v;
  }
  return e;
}

double sum_sq_dev(std::span<const double> values, double mean) {
  double acc = 0.0;
  for (double v : values) {
    double d = v - mean;
    acc += d * d;
  }
  return acc;
}

std::size_t count_above(std::span<const double> values, double threshold) {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [&](double v) { return v > threshold; }));
}

constexpr KernelTable kScalar{"scalar", select_time, select_time_value, extrema, sum_sq_dev, count_above};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace dcs::kernels
