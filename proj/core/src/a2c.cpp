#include "evacc/a2c.hpp"

#include <stdexcept>

namespace evacc::a2c {

void A2CConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (eta < 0.0 || beta_entropy < 0.0) throw std::invalid_argument("loss weights must be >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

double one_step_return(const Transition& tr, double gamma) {
  return tr.reward + (tr.terminal ? 0.0 : gamma * tr.next_value);
}

ad::Var a2c_loss(const Transition& tr, double ret, const A2CConfig& cfg) {
  const double advantage = ret - tr.value.scalar();
  ad::Var policy = ad::scale(tr.logprob, -advantage);
  ad::Var value = ad::scale(ad::square(ad::add_scalar(tr.value, -ret)), cfg.eta);
  ad::Var bonus = ad::scale(tr.entropy, -cfg.beta_entropy);
  return ad::add(ad::add(policy, value), bonus);
}

UpdateStats update_episode(std::span<const Transition> transitions, ad::ParameterStore& params,
                           ad::AdamState& adam, const A2CConfig& cfg) {
  if (transitions.empty()) throw std::invalid_argument("update_episode: empty episode");
  UpdateStats stats;
  ad::Var total;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const Transition& tr = transitions[i];
    const double ret = one_step_return(tr, cfg.gamma);
    stats.mean_advantage += ret - tr.value.scalar();
    ad::Var loss = a2c_loss(tr, ret, cfg);
    total = i == 0 ? loss : ad::add(total, loss);
  }
  const auto n = static_cast<double>(transitions.size());
  stats.mean_loss = total.scalar() / n;
  stats.mean_advantage /= n;
  total.tape->backward(total);
  ad::adam_step(params, adam, cfg.lr);
  return stats;
}

}  // namespace evacc::a2c
