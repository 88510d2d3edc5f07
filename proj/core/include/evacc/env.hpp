#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "evacc/rng.hpp"

namespace evacc::env {

/// Parameters of the Mode Estimation task.
struct EnvConfig {
  double epsilon = 0.0;  ///< probability that a sample differs from the mode
  int n_symbols = 10;
  int t_max = 30;
  double r_correct = 30.0;
  double r_incorrect = -30.0;
  double r_timeout = -30.0;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

struct EpisodeState {
  int hidden_mode = 0;
  int t = 1;  ///< index of the sample the agent is currently looking at
  bool terminated = false;
};

enum class Encoding { OneHot10, Binary4 };

struct Observation {
  Encoding encoding = Encoding::OneHot10;
  std::vector<double> payload;
};

enum class OutcomeKind { NoGuess, CorrectGuess, IncorrectGuess, Timeout };

std::string_view to_string(OutcomeKind kind);

struct StepOutcome {
  std::optional<Observation> observation;  ///< next sample when the episode continues
  int next_symbol = -1;                    ///< raw symbol behind `observation`, -1 when terminal
  double reward = 0.0;
  bool terminated = false;
  OutcomeKind kind = OutcomeKind::NoGuess;
};

/// Start a fresh episode with a uniformly drawn hidden mode.
EpisodeState reset(const EnvConfig& config, Rng& rng);

/// Draw one sample: the hidden mode with probability 1 - epsilon, otherwise
/// one of the remaining symbols uniformly. Throws std::logic_error on a
/// terminated episode.
int draw_sample(const EpisodeState& state, const EnvConfig& config, Rng& rng);

/// binary4 is most-significant bit first. Throws std::out_of_range for
/// symbols outside 0..9.
Observation encode_observation(int symbol, Encoding encoding);

/// Reward for a guess made while looking at sample `t`.
double reward_for(const EnvConfig& config, OutcomeKind kind, int t);

/// Advance the episode after the agent has seen sample `state.t`.
/// An empty guess means "keep watching". When the episode continues, a
/// fresh sample for step t+1 is drawn and returned in the outcome.
StepOutcome step(EpisodeState& state, const EnvConfig& config, std::optional<int> agent_guess,
                 Rng& rng, Encoding encoding = Encoding::OneHot10);

}  // namespace evacc::env
