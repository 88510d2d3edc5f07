#include "evacc/env.hpp"

#include <stdexcept>
#include <string>

namespace evacc::env {

void EnvConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1], got " + std::to_string(epsilon));
  }
  if (n_symbols < 2) throw std::invalid_argument("n_symbols must be at least 2");
  if (t_max < 1) throw std::invalid_argument("t_max must be at least 1");
}

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::NoGuess:
      return "no_guess";
    case OutcomeKind::CorrectGuess:
      return "correct_guess";
    case OutcomeKind::IncorrectGuess:
      return "incorrect_guess";
    case OutcomeKind::Timeout:
      return "timeout";
  }
  return "unknown";
}

EpisodeState reset(const EnvConfig& config, Rng& rng) {
  config.validate();
  EpisodeState state;
  state.hidden_mode = rng.uniform_int(0, config.n_symbols - 1);
  state.t = 1;
  state.terminated = false;
  return state;
}

int draw_sample(const EpisodeState& state, const EnvConfig& config, Rng& rng) {
  if (state.terminated) throw std::logic_error("draw_sample on a terminated episode");
  if (rng.uniform() < 1.0 - config.epsilon) return state.hidden_mode;
  // Uniform over the other n-1 symbols.
  int other = rng.uniform_int(0, config.n_symbols - 2);
  return other >= state.hidden_mode ? other + 1 : other;
}

Observation encode_observation(int symbol, Encoding encoding) {
  if (symbol < 0 || symbol > 9) {
    throw std::out_of_range("symbol " + std::to_string(symbol) + " outside 0..9");
  }
  Observation obs;
  obs.encoding = encoding;
  if (encoding == Encoding::OneHot10) {
    obs.payload.assign(10, 0.0);
    obs.payload[static_cast<std::size_t>(symbol)] = 1.0;
  } else {
    obs.payload.resize(4);
    for (int bit = 0; bit < 4; ++bit) {
      obs.payload[static_cast<std::size_t>(bit)] = (symbol >> (3 - bit)) & 1 ? 1.0 : 0.0;
    }
  }
  return obs;
}

double reward_for(const EnvConfig& config, OutcomeKind kind, int t) {
  switch (kind) {
    case OutcomeKind::NoGuess:
      return 0.0;
    case OutcomeKind::CorrectGuess:
      return config.r_correct - static_cast<double>(t - 1);
    case OutcomeKind::IncorrectGuess:
      return config.r_incorrect;
    case OutcomeKind::Timeout:
      return config.r_timeout;
  }
  return 0.0;
}

StepOutcome step(EpisodeState& state, const EnvConfig& config, std::optional<int> agent_guess,
                 Rng& rng, Encoding encoding) {
  if (state.terminated) throw std::logic_error("step on a terminated episode");
  StepOutcome out;
  if (agent_guess) {
    out.kind = *agent_guess == state.hidden_mode ? OutcomeKind::CorrectGuess
                                                 : OutcomeKind::IncorrectGuess;
  } else if (state.t >= config.t_max) {
    out.kind = OutcomeKind::Timeout;
  } else {
    out.kind = OutcomeKind::NoGuess;
  }
  out.reward = reward_for(config, out.kind, state.t);
  if (out.kind == OutcomeKind::NoGuess) {
    ++state.t;
    out.next_symbol = draw_sample(state, config, rng);
    out.observation = encode_observation(out.next_symbol, encoding);
  } else {
    state.terminated = true;
    out.terminated = true;
  }
  return out;
}

}  // namespace evacc::env
