#include <doctest.h>

#include <cmath>
#include <vector>

#include "phonopulse/rng.hpp"

using namespace phonopulse;

TEST_CASE("streams are deterministic and index-separated") {
  Rng a = Rng::stream(42, 7);
  Rng b = Rng::stream(42, 7);
  Rng c = Rng::stream(42, 8);
  bool same = true, differs = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    same = same && (va == b.next_u64());
    differs = differs || (va != c.next_u64());
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("uniform moments") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 5.0 / std::sqrt(12.0 * n));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("gaussian moments") {
  Rng rng(999);
  const int n = 400000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s1 += g;
    s2 += g * g;
    s4 += g * g * g * g;
  }
  CHECK(std::abs(s1 / n) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));  // normal kurtosis
}
