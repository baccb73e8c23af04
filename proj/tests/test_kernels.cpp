#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dcs/kernels/kernels.hpp"

using namespace dcs::kernels;

namespace {

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> v{&scalar_kernels()};
  if (auto* a = avx2_kernels()) v.push_back(a);
  return v;
}

struct Input {
  std::vector<std::int64_t> ts;
  std::vector<double> values;
};

Input random_input(std::mt19937_64& rng, std::size_t n) {
  Input in;
  std::uniform_int_distribution<std::int64_t> t(-1000, 1000);
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    in.ts.push_back(t(rng));
    // Repeated values exercise the open/closed bound edges.
    in.values.push_back(i % 7 == 0 ? 0.25 : v(rng));
  }
  return in;
}

}  // namespace

TEST_CASE("scalar kernels against hand-computed results") {
  const auto& k = scalar_kernels();
  std::vector<std::int64_t> ts{5, 1, 9, 3, 7};
  std::vector<double> vs{0.1, 0.5, 0.46, 0.45, 0.2};
  std::vector<std::uint32_t> out(ts.size());
  REQUIRE(k.select_time(ts, 3, 8, out.data()) == 3);
  CHECK(out[0] == 0);
  CHECK(out[1] == 3);
  CHECK(out[2] == 4);
  ValueBounds gt{0.45, INFINITY, true, false};
  REQUIRE(k.select_time_value(ts, vs, 0, 10, gt, out.data()) == 2);
  CHECK(out[0] == 1);
  CHECK(out[1] == 2);
  auto e = k.extrema(vs);
  CHECK(e.min == 0.1);
  CHECK(e.max == 0.5);
  CHECK(e.sum == doctest::Approx(1.71));
  CHECK(k.count_above(vs, 0.45) == 2);
  CHECK(k.sum_sq_dev(std::vector<double>{1, 2, 3}, 2.0) == 2.0);
  auto empty = k.extrema(std::span<const double>{});
  CHECK(std::isinf(empty.min));
}

TEST_CASE("simd variants match the scalar reference") {
  auto vs = variants();
  if (vs.size() == 1) MESSAGE("no vectorised variant on this machine; only the reference is checked");
  std::mt19937_64 rng(11);
  const auto& ref = scalar_kernels();
  for (int iter = 0; iter < 300; ++iter) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(0, 300)(rng);
    auto in = random_input(rng, n);
    std::int64_t lo = std::uniform_int_distribution<std::int64_t>(-1100, 900)(rng);
    std::int64_t hi = lo + std::uniform_int_distribution<std::int64_t>(0, 1200)(rng);
    double a = std::uniform_real_distribution<double>(-1, 1)(rng);
    double b = a + std::uniform_real_distribution<double>(0, 1)(rng);
    ValueBounds bounds{iter % 3 ? 0.25 : a, b, iter % 2 == 0, iter % 4 == 0};
    if (iter % 5 == 0) bounds.hi = INFINITY;

    std::vector<std::uint32_t> r1(n), r2(n);
    auto n1 = ref.select_time(in.ts, lo, hi, r1.data());
    auto m1 = ref.select_time_value(in.ts, in.values, lo, hi, bounds, r2.data());
    auto e1 = ref.extrema(in.values);
    double mean = n ? e1.sum / static_cast<double>(n) : 0.0;
    for (const auto* k : vs) {
      CAPTURE(k->name);
      std::vector<std::uint32_t> o1(n), o2(n);
      auto n2 = k->select_time(in.ts, lo, hi, o1.data());
      REQUIRE(n2 == n1);
      CHECK(std::equal(o1.begin(), o1.begin() + n2, r1.begin()));
      auto m2 = k->select_time_value(in.ts, in.values, lo, hi, bounds, o2.data());
      REQUIRE(m2 == m1);
      CHECK(std::equal(o2.begin(), o2.begin() + m2, r2.begin()));
      auto e2 = k->extrema(in.values);
      CHECK(e2.min == e1.min);
      CHECK(e2.max == e1.max);
      CHECK(e2.sum == doctest::Approx(e1.sum).epsilon(1e-12));
      CHECK(k->count_above(in.values, bounds.lo) == ref.count_above(in.values, bounds.lo));
      CHECK(k->sum_sq_dev(in.values, mean) == doctest::Approx(ref.sum_sq_dev(in.values, mean)).epsilon(1e-12));
    }
  }
}

TEST_CASE("selection oracle: brute-force filter") {
  std::mt19937_64 rng(5);
  for (const auto* k : variants()) {
    auto in = random_input(rng, 1000);
    ValueBounds b{-0.2, 0.3, false, true};
    std::vector<std::uint32_t> out(in.ts.size());
    auto n = k->select_time_value(in.ts, in.values, -100, 500, b, out.data());
    std::vector<std::uint32_t> expect;
    for (std::uint32_t i = 0; i < in.ts.size(); ++i)
      if (in.ts[i] >= -100 && in.ts[i] < 500 && in.values[i] >= -0.2 && in.values[i] < 0.3) expect.push_back(i);
    REQUIRE(n == expect.size());
    CHECK(std::equal(expect.begin(), expect.end(), out.begin()));
  }
}

TEST_CASE("dispatch can be forced") {
  CHECK(force_variant("scalar"));
  CHECK(active().name == scalar_kernels().name);
  if (avx2_kernels()) {
    CHECK(force_variant("avx2"));
    CHECK(active().name == avx2_kernels()->name);
  } else {
    CHECK_FALSE(force_variant("avx2"));
  }
  CHECK_FALSE(force_variant("neon"));
}
