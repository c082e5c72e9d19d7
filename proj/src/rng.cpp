#include "dimcert/rng.hpp"

#include <cmath>

namespace dimcert {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // Two mixer rounds over master perturbed by the stream index. One round
  // already decorrelates, the second guards the low-entropy seeds (0, 1, ...)
  // that callers actually use.
  std::uint64_t s = master ^ ((index + 1) * 0x9e3779b97f4a7c15ULL);
  std::uint64_t a = splitmix64_next(s);
  std::uint64_t b = splitmix64_next(s);
  return a ^ (b >> 1);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - uniform() lies in (0, 1], so the log is finite.
  double u = 1.0 - uniform();
  double r = std::sqrt(-2.0 * std::log(u));
  double t = 2.0 * M_PI * uniform();
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

long long Rng::poisson(double lambda) {
  if (!(lambda > 0.0)) return 0;
  if (lambda < 64.0) {
    double threshold = std::exp(-lambda);
    double p = 1.0;
    long long k = 0;
    do {
      ++k;
      p *= uniform();
    } while (p > threshold);
    return k - 1;
  }
  double k = std::floor(lambda + std::sqrt(lambda) * normal() + 0.5);
  return k < 0.0 ? 0 : static_cast<long long>(k);
}

}  // namespace dimcert
