#include "evacc/accumulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evacc {

ThresholdGrid::ThresholdGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("threshold grid is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0 && values_[i] < 1.0)) {
      throw std::invalid_argument("threshold outside [0, 1)");
    }
    if (i > 0 && !(values_[i] > values_[i - 1])) {
      throw std::invalid_argument("threshold grid must be strictly increasing");
    }
  }
}

ThresholdGrid ThresholdGrid::range(double first, double last, double step) {
  std::vector<double> v;
  const auto n = static_cast<int>(std::llround((last - first) / step));
  for (int i = 0; i <= n; ++i) {
    v.push_back(std::round((first + i * step) * 1e9) / 1e9);
  }
  return ThresholdGrid(std::move(v));
}

AccumulatorState reset_accumulator(std::size_t n_channels, double sensitivity) {
  if (n_channels < 2) throw std::invalid_argument("accumulator needs at least 2 channels");
  if (!(sensitivity > 0.0)) throw std::invalid_argument("sensitivity must be positive");
  return AccumulatorState{std::vector<double>(n_channels, 0.0), sensitivity};
}

void accumulate(AccumulatorState& state, std::span<const double> kappa) {
  if (kappa.size() != state.nu.size()) {
    throw std::invalid_argument("evidence vector size does not match channel count");
  }
  for (double k : kappa) {
    if (!(k >= 0.0 && k <= 1.0)) throw std::invalid_argument("evidence component outside [0, 1]");
  }
  for (std::size_t i = 0; i < kappa.size(); ++i) state.nu[i] += state.sensitivity * kappa[i];
}

Preference preference(const AccumulatorState& state) {
  Preference p;
  p.rho.resize(state.nu.size());
  const double top = *std::max_element(state.nu.begin(), state.nu.end());
  double z = 0.0;
  for (std::size_t i = 0; i < state.nu.size(); ++i) {
    p.rho[i] = std::exp(state.nu[i] - top);
    z += p.rho[i];
  }
  for (double& r : p.rho) r /= z;
  return p;
}

std::optional<int> decide(const Preference& pref, double tau) {
  std::optional<int> best;
  for (std::size_t i = 0; i < pref.rho.size(); ++i) {
    if (pref.rho[i] > tau && (!best || pref.rho[i] > pref.rho[static_cast<std::size_t>(*best)])) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace evacc
