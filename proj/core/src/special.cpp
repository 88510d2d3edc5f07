#include "evacc/special.hpp"

#include <cmath>
#include <stdexcept>

namespace evacc::special {

namespace {

// Below this the recurrences shift x up; above it the asymptotic series are
// accurate to double precision.
constexpr double kAsymptotic = 10.0;

}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma requires x > 0");
  double acc = 0.0;
  while (x < kAsymptotic) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  // ln x - 1/2x - sum B_2k / (2k x^2k)
  const double series =
      r2 * (1.0 / 12 -
            r2 * (1.0 / 120 -
                  r2 * (1.0 / 252 - r2 * (1.0 / 240 - r2 * (1.0 / 132 - r2 * (691.0 / 32760 - r2 / 12))))));
  return acc + std::log(x) - 0.5 * r - series;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("trigamma requires x > 0");
  double acc = 0.0;
  while (x < kAsymptotic) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  const double series =
      r * (1.0 +
           r * (0.5 + r * (1.0 / 6 -
                           r2 * (1.0 / 30 -
                                 r2 * (1.0 / 42 -
                                       r2 * (1.0 / 30 - r2 * (5.0 / 66 - r2 * (691.0 / 2730 - r2 * 7.0 / 6))))))));
  return acc + series;
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace evacc::special
