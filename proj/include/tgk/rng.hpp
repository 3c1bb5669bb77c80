#pragma once
// Seeded standard-normal generator (Box-Muller over mt19937_64).  Implemented
// here rather than with std::normal_distribution because the latter's output
// sequence is not specified and differs across standard libraries; recorded
// seeds must reproduce identical right-hand sides everywhere.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tgk {

class NormalRng {
 public:
  explicit NormalRng(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    spare_ = mag * std::sin(two_pi * u2);
    have_spare_ = true;
    return mag * std::cos(two_pi * u2);
  }

  // uniform on [0,1)
  double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline std::vector<double> normal_vector(std::size_t n, std::uint64_t seed) {
  NormalRng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng();
  return v;
}

} // namespace tgk
