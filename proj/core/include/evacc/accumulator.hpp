#pragma once

#include <optional>
#include <span>
#include <vector>

namespace evacc {

/// Additive evidence channels. `nu[i]` holds the scaled evidence for action i
/// gathered since the start of the episode.
struct AccumulatorState {
  std::vector<double> nu;
  double sensitivity = 1.0;

  std::size_t n_channels() const { return nu.size(); }
};

/// Softmax of the channels; a confidence distribution over actions.
struct Preference {
  std::vector<double> rho;
};

/// Candidate thresholds, strictly increasing in [0, 1).
class ThresholdGrid {
 public:
  explicit ThresholdGrid(std::vector<double> values);

  /// {first, first+step, ..., last}, rounded to avoid drift.
  static ThresholdGrid range(double first, double last, double step = 0.1);

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

AccumulatorState reset_accumulator(std::size_t n_channels, double sensitivity = 1.0);

/// nu[i] += sensitivity * kappa[i]. Throws std::invalid_argument on a size
/// mismatch or a component outside [0, 1].
void accumulate(AccumulatorState& state, std::span<const double> kappa);

Preference preference(const AccumulatorState& state);

/// Index of the largest rho strictly above tau (lowest index on ties), or
/// nothing when no channel clears the bar.
std::optional<int> decide(const Preference& pref, double tau);

}  // namespace evacc
