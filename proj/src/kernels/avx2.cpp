// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include "dcs/kernels/kernels.hpp"

namespace dcs::kernels::avx2 {

namespace {

inline std::size_t emit(unsigned mask, std::size_t base, std::uint32_t* out, std::size_t n) {
  while (mask) {
    unsigned bit = static_cast<unsigned>(__builtin_ctz(mask));
    out[n++] = static_cast<std::uint32_t>(base + bit);
    mask &= mask - 1;
  }
  return n;
}

inline __m256i time_mask(const std::int64_t* p, __m256i lo, __m256i hi) {
  __m256i t = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
  // !(lo > t) && (hi > t)
  return _mm256_andnot_si256(_mm256_cmpgt_epi64(lo, t), _mm256_cmpgt_epi64(hi, t));
}

std::size_t select_time(std::span<const std::int64_t> ts, std::int64_t ts_lo, std::int64_t ts_hi, std::uint32_t* out) {
  const std::size_t size = ts.size();
  const __m256i lo = _mm256_set1_epi64x(ts_lo);
  const __m256i hi = _mm256_set1_epi64x(ts_hi);
  std::size_t n = 0;
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    __m256i m = time_mask(ts.data() + i, lo, hi);
    n = emit(static_cast<unsigned>(_mm256_movemask_pd(_mm256_castsi256_pd(m))), i, out, n);
  }
  for (; i < size; ++i) {
    if (ts[i] >= ts_lo && ts[i] < ts_hi) out[n++] = static_cast<std::uint32_t>(i);
  }
  return n;
}

template <bool LoOpen, bool HiOpen>
std::size_t select_time_value_impl(std::span<const std::int64_t> ts, std::span<const double> values,
                                   std::int64_t ts_lo, std::int64_t ts_hi, const ValueBounds& b,
                                   std::uint32_t* out) {
  const std::size_t size = ts.size();
  const __m256i lo = _mm256_set1_epi64x(ts_lo);
  const __m256i hi = _mm256_set1_epi64x(ts_hi);
  const __m256d vlo = _mm256_set1_pd(b.lo);
  const __m256d vhi = _mm256_set1_pd(b.hi);
  std::size_t n = 0;
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    __m256d tm = _mm256_castsi256_pd(time_mask(ts.data() + i, lo, hi));
    __m256d v = _mm256_loadu_pd(values.data() + i);
    __m256d ge = LoOpen ? _mm256_cmp_pd(v, vlo, _CMP_GT_OQ) : _mm256_cmp_pd(v, vlo, _CMP_GE_OQ);
    __m256d le = HiOpen ? _mm256_cmp_pd(v, vhi, _CMP_LT_OQ) : _mm256_cmp_pd(v, vhi, _CMP_LE_OQ);
    __m256d m = _mm256_and_pd(tm, _mm256_and_pd(ge, le));
    n = emit(static_cast<unsigned>(_mm256_movemask_pd(m)), i, out, n);
  }
  for (; i < size; ++i) {
    if (ts[i] >= ts_lo && ts[i] < ts_hi && b.matches(values[i])) out[n++] = static_cast<std::uint32_t>(i);
  }
  return n;
}

std::size_t select_time_value(std::span<const std::int64_t> ts, std::span<const double> values, std::int64_t ts_lo,
                              std::int64_t ts_hi, const ValueBounds& b, std::uint32_t* out) {
  if (b.lo_open) {
    return b.hi_open ? select_time_value_impl<true, true>(ts, values, ts_lo, ts_hi, b, out)
                     : select_time_value_impl<true, false>(ts, values, ts_lo, ts_hi, b, out);
  }
  return b.hi_open ? select_time_value_impl<false, true>(ts, values, ts_lo, ts_hi, b, out)
                   : select_time_value_impl<false, false>(ts, values, ts_lo, ts_hi, b, out);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmin(__m256d v) {
  __m128d m = _mm_min_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return _mm_cvtsd_f64(_mm_min_sd(m, _mm_unpackhi_pd(m, m)));
}

inline double hmax(__m256d v) {
  __m128d m = _mm_max_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

Extrema extrema(std::span<const double> values) {
  Extrema e;
  const std::size_t size = values.size();
  std::size_t i = 0;
  if (size >= 4) {
    __m256d mn = _mm256_set1_pd(e.min);
    __m256d mx = _mm256_set1_pd(e.max);
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    for (; i + 8 <= size; i += 8) {
      __m256d a = _mm256_loadu_pd(values.data() + i);
      __m256d b = _mm256_loadu_pd(values.data() + i + 4);
      mn = _mm256_min_pd(mn, _mm256_min_pd(a, b));
      mx = _mm256_max_pd(mx, _mm256_max_pd(a, b));
      s0 = _mm256_add_pd(s0, a);
      s1 = _mm256_add_pd(s1, b);
    }
    for (; i + 4 <= size; i += 4) {
      __m256d a = _mm256_loadu_pd(values.data() + i);
      mn = _mm256_min_pd(mn, a);
      mx = _mm256_max_pd(mx, a);
      s0 = _mm256_add_pd(s0, a);
    }
    e.min = hmin(mn);
    e.max = hmax(mx);
    e.sum = hsum(_mm256_add_pd(s0, s1));
  }
  for (; i < size; ++i) {
    double v = values[i];
    e.min = v < e.min ? v : e.min;
    e.max = v > e.max ? v : e.max;
    e.sum += v;
  }
  return e;
}

double sum_sq_dev(std::span<const double> values, double mean) {
  const std::size_t size = values.size();
  const __m256d m = _mm256_set1_pd(mean);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= size; i += 8) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(values.data() + i), m);
    __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(values.data() + i + 4), m);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < size; ++i) {
    double d = values[i] - mean;
    acc += d * d;
  }
  return acc;
}

std::size_t count_above(std::span<const double> values, double threshold) {
  const std::size_t size = values.size();
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t n = 0;
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    __m256d gt = _mm256_cmp_pd(_mm256_loadu_pd(values.data() + i), t, _CMP_GT_OQ);
    n += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(gt))));
  }
  for (; i < size; ++i) n += values[i] > threshold ? 1 : 0;
  return n;
}

}  // namespace

extern const KernelTable kTable{"avx2", select_time, select_time_value, extrema, sum_sq_dev, count_above};

}  // namespace dcs::kernels::avx2
