#include "evacc/env.hpp"

#include <array>
#include <stdexcept>

#include <gtest/gtest.h>

using namespace evacc;
using namespace evacc::env;

namespace {

EnvConfig noisy(double epsilon) {
  EnvConfig c;
  c.epsilon = epsilon;
  return c;
}

// Advance an episode with no guesses until it is looking at sample t.
void advance_to(EpisodeState& s, const EnvConfig& c, int t, Rng& rng) {
  while (s.t < t) ASSERT_FALSE(step(s, c, std::nullopt, rng).terminated);
}

}  // namespace

TEST(EnvConfig, RejectsBadParameters) {
  EXPECT_THROW(noisy(-0.1).validate(), std::invalid_argument);
  EXPECT_THROW(noisy(1.5).validate(), std::invalid_argument);
  EnvConfig c;
  c.t_max = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.n_symbols = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_NO_THROW(noisy(1.0).validate());
}

TEST(Reset, ModesAreUniform) {
  Rng rng(11);
  std::array<int, 10> counts{};
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const auto s = reset(EnvConfig{}, rng);
    ASSERT_GE(s.hidden_mode, 0);
    ASSERT_LE(s.hidden_mode, 9);
    EXPECT_EQ(s.t, 1);
    EXPECT_FALSE(s.terminated);
    ++counts[static_cast<std::size_t>(s.hidden_mode)];
  }
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / n, 0.1, 0.01);
}

TEST(Reset, SameSeedSameMode) {
  Rng a(5);
  Rng b(5);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(reset({}, a).hidden_mode, reset({}, b).hidden_mode);
}

TEST(DrawSample, NoiselessAlwaysReturnsMode) {
  Rng rng(1);
  EpisodeState s{3, 1, false};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(draw_sample(s, noisy(0.0), rng), 3);
}

TEST(DrawSample, NoiseSpreadsUniformlyOverOtherSymbols) {
  Rng rng(2);
  EpisodeState s{3, 1, false};
  std::array<int, 10> counts{};
  const int n = 100'000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(draw_sample(s, noisy(0.4), rng))];
  EXPECT_NEAR(counts[3] / double(n), 0.6, 0.01);
  EXPECT_NEAR(counts[7] / double(n), 0.4 / 9, 0.005);
  for (int k = 0; k < 10; ++k) {
    if (k != 3) EXPECT_NEAR(counts[static_cast<std::size_t>(k)] / double(n), 0.4 / 9, 0.005);
  }
}

TEST(DrawSample, HighNoiseModeFrequency) {
  Rng rng(3);
  EpisodeState s{8, 1, false};
  int hits = 0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) hits += draw_sample(s, noisy(0.8), rng) == 8;
  EXPECT_NEAR(hits / double(n), 0.2, 0.01);
}

TEST(DrawSample, FullNoiseNeverReturnsMode) {
  Rng rng(4);
  EpisodeState s{0, 1, false};
  for (int i = 0; i < 1000; ++i) EXPECT_NE(draw_sample(s, noisy(1.0), rng), 0);
}

TEST(DrawSample, TerminatedEpisodeIsAContractViolation) {
  Rng rng(1);
  EpisodeState s{2, 4, true};
  EXPECT_THROW(draw_sample(s, {}, rng), std::logic_error);
}

TEST(EncodeObservation, Binary4IsMostSignificantBitFirst) {
  EXPECT_EQ(encode_observation(6, Encoding::Binary4).payload, (std::vector<double>{0, 1, 1, 0}));
  EXPECT_EQ(encode_observation(0, Encoding::Binary4).payload, (std::vector<double>{0, 0, 0, 0}));
  EXPECT_EQ(encode_observation(9, Encoding::Binary4).payload, (std::vector<double>{1, 0, 0, 1}));
}

TEST(EncodeObservation, OneHot) {
  const auto obs = encode_observation(3, Encoding::OneHot10);
  ASSERT_EQ(obs.payload.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(obs.payload[i], i == 3 ? 1.0 : 0.0);
  EXPECT_EQ(obs.encoding, Encoding::OneHot10);
}

TEST(EncodeObservation, BinaryCodesAreDistinct) {
  for (int a = 0; a < 10; ++a) {
    for (int b = a + 1; b < 10; ++b) {
      EXPECT_NE(encode_observation(a, Encoding::Binary4).payload,
                encode_observation(b, Encoding::Binary4).payload);
    }
  }
}

TEST(EncodeObservation, OutOfRangeSymbols) {
  EXPECT_THROW(encode_observation(-1, Encoding::OneHot10), std::out_of_range);
  EXPECT_THROW(encode_observation(10, Encoding::Binary4), std::out_of_range);
}

TEST(RewardFor, AllFourCases) {
  const EnvConfig c;
  EXPECT_EQ(reward_for(c, OutcomeKind::CorrectGuess, 1), 30.0);
  EXPECT_EQ(reward_for(c, OutcomeKind::CorrectGuess, 7), 24.0);
  EXPECT_EQ(reward_for(c, OutcomeKind::CorrectGuess, 30), 1.0);
  EXPECT_EQ(reward_for(c, OutcomeKind::IncorrectGuess, 1), -30.0);
  EXPECT_EQ(reward_for(c, OutcomeKind::IncorrectGuess, 30), -30.0);
  EXPECT_EQ(reward_for(c, OutcomeKind::Timeout, 30), -30.0);
  EXPECT_EQ(reward_for(c, OutcomeKind::NoGuess, 12), 0.0);
}

TEST(Step, CorrectGuessAtFirstSample) {
  Rng rng(7);
  auto s = reset({}, rng);
  const auto out = step(s, {}, s.hidden_mode, rng);
  EXPECT_EQ(out.reward, 30.0);
  EXPECT_TRUE(out.terminated);
  EXPECT_TRUE(s.terminated);
  EXPECT_EQ(out.kind, OutcomeKind::CorrectGuess);
  EXPECT_FALSE(out.observation.has_value());
  EXPECT_EQ(out.next_symbol, -1);
}

TEST(Step, CorrectGuessAtSeventhSample) {
  Rng rng(8);
  auto s = reset({}, rng);
  advance_to(s, {}, 7, rng);
  const auto out = step(s, {}, s.hidden_mode, rng);
  EXPECT_EQ(out.reward, 24.0);
  EXPECT_EQ(out.kind, OutcomeKind::CorrectGuess);
}

TEST(Step, CorrectGuessAtLastSample) {
  Rng rng(8);
  auto s = reset({}, rng);
  advance_to(s, {}, 30, rng);
  const auto out = step(s, {}, s.hidden_mode, rng);
  EXPECT_EQ(out.reward, 1.0);
  EXPECT_TRUE(out.terminated);
}

TEST(Step, WrongGuessAnyTime) {
  Rng rng(9);
  for (int t : {1, 7, 30}) {
    auto s = reset({}, rng);
    advance_to(s, {}, t, rng);
    const auto out = step(s, {}, (s.hidden_mode + 1) % 10, rng);
    EXPECT_EQ(out.reward, -30.0);
    EXPECT_EQ(out.kind, OutcomeKind::IncorrectGuess);
    EXPECT_TRUE(out.terminated);
  }
}

TEST(Step, NoGuessContinuesWithFreshSample) {
  Rng rng(10);
  EnvConfig c = noisy(0.0);
  auto s = reset(c, rng);
  const auto out = step(s, c, std::nullopt, rng, Encoding::Binary4);
  EXPECT_EQ(out.reward, 0.0);
  EXPECT_FALSE(out.terminated);
  EXPECT_EQ(out.kind, OutcomeKind::NoGuess);
  EXPECT_EQ(s.t, 2);
  EXPECT_EQ(out.next_symbol, s.hidden_mode);
  ASSERT_TRUE(out.observation.has_value());
  EXPECT_EQ(out.observation->payload, encode_observation(s.hidden_mode, Encoding::Binary4).payload);
}

TEST(Step, NoGuessByLastSampleTimesOut) {
  Rng rng(12);
  auto s = reset({}, rng);
  advance_to(s, {}, 30, rng);
  const auto out = step(s, {}, std::nullopt, rng);
  EXPECT_EQ(out.reward, -30.0);
  EXPECT_TRUE(out.terminated);
  EXPECT_EQ(out.kind, OutcomeKind::Timeout);
}

TEST(Step, ShortHorizonTimesOutOnFirstPass) {
  Rng rng(13);
  EnvConfig c;
  c.t_max = 1;
  auto s = reset(c, rng);
  EXPECT_EQ(step(s, c, std::nullopt, rng).kind, OutcomeKind::Timeout);
}

TEST(Step, TerminatedEpisodeThrows) {
  Rng rng(14);
  auto s = reset({}, rng);
  step(s, {}, 0, rng);
  EXPECT_THROW(step(s, {}, std::nullopt, rng), std::logic_error);
}

TEST(Step, CustomRewardConstants) {
  Rng rng(15);
  EnvConfig c;
  c.r_correct = 10.0;
  c.r_incorrect = -5.0;
  auto s = reset(c, rng);
  advance_to(s, c, 3, rng);
  EXPECT_EQ(step(s, c, s.hidden_mode, rng).reward, 8.0);
}

TEST(OutcomeKind, Names) {
  EXPECT_EQ(to_string(OutcomeKind::Timeout), "timeout");
  EXPECT_EQ(to_string(OutcomeKind::CorrectGuess), "correct_guess");
}
