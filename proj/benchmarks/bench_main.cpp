#include <benchmark/benchmark.h>

#include <optional>
#include <vector>

#include "evacc/agents.hpp"
#include "evacc/autodiff.hpp"
#include "evacc/env.hpp"
#include "evacc/mc_oracle.hpp"
#include "evacc/rng.hpp"

namespace {

using namespace evacc;

void BM_TapeForwardBackward(benchmark::State& state) {
  Rng rng(1);
  ad::ParameterStore params;
  auto& w1 = params.add_matrix("w1", 25, 10, rng);
  auto& b1 = params.add_bias("b1", 25, 10, rng);
  auto& w2 = params.add_matrix("w2", 9, 25, rng);
  auto& b2 = params.add_bias("b2", 9, 25, rng);
  const std::vector<double> x = env::encode_observation(3, env::Encoding::OneHot10).payload;
  ad::Tape tape;
  for (auto _ : state) {
    tape.clear();
    const auto h = ad::relu(ad::linear(tape.constant(x), tape.param(w1), tape.param(b1)));
    const auto p = ad::softmax(ad::linear(h, tape.param(w2), tape.param(b2)));
    const auto terms = ad::categorical_logprob_entropy(p, 4);
    tape.backward(ad::add(terms.logprob, terms.entropy));
    params.zero_grad();
  }
}
BENCHMARK(BM_TapeForwardBackward);

void BM_EnvStep(benchmark::State& state) {
  env::EnvConfig config;
  config.epsilon = 0.4;
  Rng rng(2);
  auto s = env::reset(config, rng);
  for (auto _ : state) {
    auto out = env::step(s, config, std::nullopt, rng, env::Encoding::Binary4);
    if (out.terminated) s = env::reset(config, rng);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_EnvStep);

void BM_McRollout(benchmark::State& state) {
  env::EnvConfig config;
  config.epsilon = 0.4;
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc::rollout_fixed_threshold(config, 0.5, 1000, rng));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_McRollout);

void BM_AgentEpisode(benchmark::State& state) {
  const auto kind = static_cast<agents::AgentKind>(state.range(0));
  Rng init(4);
  auto agent = agents::make_agent(kind, {}, 0.4, init);
  env::EnvConfig config;
  config.epsilon = 0.4;
  Rng env_rng(5);
  Rng act_rng(6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent->run_episode(config, env_rng, act_rng, true));
  }
  state.SetLabel(std::string(agents::to_string(kind)));
}
BENCHMARK(BM_AgentEpisode)
    ->Arg(static_cast<int>(agents::AgentKind::A2cRnn))
    ->Arg(static_cast<int>(agents::AgentKind::Threshold))
    ->Arg(static_cast<int>(agents::AgentKind::Joint));

}  // namespace
BENCHMARK_MAIN();
