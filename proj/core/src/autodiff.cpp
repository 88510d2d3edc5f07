#include "evacc/autodiff.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "evacc/special.hpp"

namespace evacc::ad {

// ---- ParameterStore ---------------------------------------------------------

Parameter& ParameterStore::add(const std::string& name, std::size_t rows, std::size_t cols) {
  for (const auto& p : params_) {
    if (p.name == name) throw std::invalid_argument("duplicate parameter name: " + name);
  }
  Parameter& p = params_.emplace_back();
  p.name = name;
  p.rows = rows;
  p.cols = cols;
  p.value.assign(rows * cols, 0.0);
  p.grad.assign(rows * cols, 0.0);
  return p;
}

Parameter& ParameterStore::add_matrix(const std::string& name, std::size_t rows, std::size_t cols,
                                      Rng& rng) {
  Parameter& p = add(name, rows, cols);
  const double bound = std::sqrt(1.0 / static_cast<double>(cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : p.value) w = dist(rng.engine());
  return p;
}

Parameter& ParameterStore::add_vector(const std::string& name, std::size_t n) {
  return add(name, n, 1);
}

Parameter& ParameterStore::add_bias(const std::string& name, std::size_t n, std::size_t fan_in,
                                    Rng& rng) {
  Parameter& p = add(name, n, 1);
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& b : p.value) b = dist(rng.engine());
  return p;
}

Parameter& ParameterStore::at(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no parameter named " + name);
}

const Parameter& ParameterStore::at(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->at(name);
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

std::size_t ParameterStore::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

// ---- Tape -------------------------------------------------------------------

std::span<const double> Var::value() const { return tape->value(*this); }
double Var::scalar() const {
  auto v = value();
  if (v.size() != 1) throw std::logic_error("scalar() on a non-scalar node");
  return v[0];
}
std::size_t Var::size() const { return tape->node(*this).size; }

void Tape::check(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) {
    throw std::invalid_argument("variable does not belong to this tape");
  }
}

Var Tape::push(Node node) {
  node.offset = static_cast<std::uint32_t>(values_.size());
  values_.resize(values_.size() + node.size, 0.0);
  nodes_.push_back(node);
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

std::uint32_t Tape::push_aux(std::span<const double> aux) {
  const auto off = static_cast<std::uint32_t>(aux_.size());
  aux_.insert(aux_.end(), aux.begin(), aux.end());
  return off;
}

Var Tape::constant(std::span<const double> values) {
  Node n;
  n.op = Op::Leaf;
  n.size = static_cast<std::uint32_t>(values.size());
  n.rows = n.size;
  Var v = push(n);
  std::copy(values.begin(), values.end(), mutable_value(v));
  return v;
}

Var Tape::constant(double value) { return constant(std::span<const double>(&value, 1)); }

Var Tape::param(Parameter& p) {
  Node n;
  n.op = Op::Param;
  n.size = static_cast<std::uint32_t>(p.size());
  n.rows = static_cast<std::uint32_t>(p.rows);
  n.cols = static_cast<std::uint32_t>(p.cols);
  n.param = &p;
  Var v = push(n);
  std::copy(p.value.begin(), p.value.end(), mutable_value(v));
  return v;
}

std::span<const double> Tape::value(Var v) const {
  check(v);
  const Node& n = nodes_[v.id];
  return {values_.data() + n.offset, n.size};
}

std::span<const double> Tape::grad(Var v) const {
  check(v);
  const Node& n = nodes_[v.id];
  if (grads_.size() < values_.size()) throw std::logic_error("backward() has not been run");
  return {grads_.data() + n.offset, n.size};
}

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  grads_.clear();
  aux_.clear();
}

void Tape::backward(Var loss) {
  check(loss);
  if (nodes_[loss.id].size != 1) throw std::invalid_argument("loss must be a scalar");
  grads_.assign(values_.size(), 0.0);
  grads_[nodes_[loss.id].offset] = 1.0;

  const double* val = values_.data();
  double* grd = grads_.data();
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    const double* g = grd + n.offset;
    const double* y = val + n.offset;
    const std::uint32_t size = n.size;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Param: {
        double* pg = n.param->grad.data();
        for (std::uint32_t i = 0; i < size; ++i) pg[i] += g[i];
        break;
      }
      case Op::Linear: {
        // a = x, b = W; the bias node id is stored in aux_offset.
        const Node& xn = nodes_[n.a];
        const Node& wn = nodes_[n.b];
        const Node& bn = nodes_[n.aux_offset];
        const double* x = val + xn.offset;
        const double* w = val + wn.offset;
        double* gx = grd + xn.offset;
        double* gw = grd + wn.offset;
        double* gb = grd + bn.offset;
        const std::uint32_t cols = wn.cols;
        for (std::uint32_t r = 0; r < size; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          gb[r] += gr;
          const double* wrow = w + static_cast<std::size_t>(r) * cols;
          double* gwrow = gw + static_cast<std::size_t>(r) * cols;
          for (std::uint32_t c = 0; c < cols; ++c) {
            gwrow[c] += gr * x[c];
            gx[c] += gr * wrow[c];
          }
        }
        break;
      }
      case Op::Add: {
        double* ga = grd + nodes_[n.a].offset;
        double* gb = grd + nodes_[n.b].offset;
        for (std::uint32_t i = 0; i < size; ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::Sub: {
        double* ga = grd + nodes_[n.a].offset;
        double* gb = grd + nodes_[n.b].offset;
        for (std::uint32_t i = 0; i < size; ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::Mul: {
        const double* a = val + nodes_[n.a].offset;
        const double* b = val + nodes_[n.b].offset;
        double* ga = grd + nodes_[n.a].offset;
        double* gb = grd + nodes_[n.b].offset;
        for (std::uint32_t i = 0; i < size; ++i) {
          ga[i] += g[i] * b[i];
          gb[i] += g[i] * a[i];
        }
        break;
      }
      case Op::Scale: {
        double* ga = grd + nodes_[n.a].offset;
        for (std::uint32_t i = 0; i < size; ++i) ga[i] += n.scalar * g[i];
        break;
      }
      case Op::AddScalar: {
        double* ga = grd + nodes_[n.a].offset;
        for (std::uint32_t i = 0; i < size; ++i) ga[i] += g[i];
        break;
      }
      case Op::Relu: {
        const double* a = val + nodes_[n.a].offset;
        double* ga = grd + nodes_[n.a].offset;
        for (std::uint32_t i = 0; i < size; ++i) {
          if (a[i] > 0.0) ga[i] += g[i];
        }
        break;
      }
      case Op::Softmax: {
        double* ga = grd + nodes_[n.a].offset;
        double gy = 0.0;
        for (std::uint32_t i = 0; i < size; ++i) gy += g[i] * y[i];
        for (std::uint32_t i = 0; i < size; ++i) ga[i] += y[i] * (g[i] - gy);
        break;
      }
      case Op::Softplus: {
        const double* a = val + nodes_[n.a].offset;
        double* ga = grd + nodes_[n.a].offset;
        for (std::uint32_t i = 0; i < size; ++i) {
          const double s = a[i] >= 0 ? 1.0 / (1.0 + std::exp(-a[i]))
                                     : std::exp(a[i]) / (1.0 + std::exp(a[i]));
          ga[i] += g[i] * s;
        }
        break;
      }
      case Op::Square: {
        const double* a = val + nodes_[n.a].offset;
        double* ga = grd + nodes_[n.a].offset;
        for (std::uint32_t i = 0; i < size; ++i) ga[i] += 2.0 * a[i] * g[i];
        break;
      }
      case Op::Sum: {
        const Node& an = nodes_[n.a];
        double* ga = grd + an.offset;
        for (std::uint32_t i = 0; i < an.size; ++i) ga[i] += g[0];
        break;
      }
      case Op::Dot: {
        const Node& an = nodes_[n.a];
        const Node& bn = nodes_[n.b];
        const double* a = val + an.offset;
        const double* b = val + bn.offset;
        double* ga = grd + an.offset;
        double* gb = grd + bn.offset;
        for (std::uint32_t i = 0; i < an.size; ++i) {
          ga[i] += g[0] * b[i];
          gb[i] += g[0] * a[i];
        }
        break;
      }
      case Op::CatLogProb: {
        // aux_offset holds the selected index.
        const double* p = val + nodes_[n.a].offset;
        double* gp = grd + nodes_[n.a].offset;
        gp[n.aux_offset] += g[0] / std::max(p[n.aux_offset], 1e-300);
        break;
      }
      case Op::CatEntropy: {
        const Node& pn = nodes_[n.a];
        const double* p = val + pn.offset;
        double* gp = grd + pn.offset;
        for (std::uint32_t i = 0; i < pn.size; ++i) {
          gp[i] -= g[0] * (std::log(std::max(p[i], 1e-300)) + 1.0);
        }
        break;
      }
      case Op::BetaLogProb: {
        const double* al = val + nodes_[n.a].offset;
        const double* be = val + nodes_[n.b].offset;
        double* gal = grd + nodes_[n.a].offset;
        double* gbe = grd + nodes_[n.b].offset;
        const double* x = aux_.data() + n.aux_offset;
        for (std::uint32_t i = 0; i < size; ++i) {
          const double psi_ab = special::digamma(al[i] + be[i]);
          gal[i] += g[i] * (std::log(x[i]) - special::digamma(al[i]) + psi_ab);
          gbe[i] += g[i] * (std::log1p(-x[i]) - special::digamma(be[i]) + psi_ab);
        }
        break;
      }
      case Op::BetaEntropy: {
        const double* al = val + nodes_[n.a].offset;
        const double* be = val + nodes_[n.b].offset;
        double* gal = grd + nodes_[n.a].offset;
        double* gbe = grd + nodes_[n.b].offset;
        for (std::uint32_t i = 0; i < size; ++i) {
          const double tri_ab = (al[i] + be[i] - 2.0) * special::trigamma(al[i] + be[i]);
          gal[i] += g[i] * (tri_ab - (al[i] - 1.0) * special::trigamma(al[i]));
          gbe[i] += g[i] * (tri_ab - (be[i] - 1.0) * special::trigamma(be[i]));
        }
        break;
      }
    }
  }
}

// ---- ops --------------------------------------------------------------------

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw std::invalid_argument("operands live on different tapes");
  }
  return *a.tape;
}

void require_same_size(Var a, Var b, const char* what) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

Var unary(Var a, Tape::Op op, std::uint32_t size) {
  Tape::Node n;
  n.op = op;
  n.a = a.id;
  n.size = size;
  n.rows = size;
  return a.tape->push(n);
}

Var binary(Var a, Var b, Tape::Op op, std::uint32_t size) {
  Tape& tape = same_tape(a, b);
  Tape::Node n;
  n.op = op;
  n.a = a.id;
  n.b = b.id;
  n.size = size;
  n.rows = size;
  return tape.push(n);
}

}  // namespace

Var linear(Var x, Var weight, Var bias) {
  Tape& tape = same_tape(x, weight);
  same_tape(x, bias);
  const auto& wn = tape.node(weight);
  if (wn.cols != x.size() || wn.rows != bias.size()) {
    throw std::invalid_argument("linear: shape mismatch (W is " + std::to_string(wn.rows) + "x" +
                                std::to_string(wn.cols) + ", x has " + std::to_string(x.size()) +
                                ", b has " + std::to_string(bias.size()) + ")");
  }
  Tape::Node n;
  n.op = Tape::Op::Linear;
  n.a = x.id;
  n.b = weight.id;
  n.aux_offset = bias.id;
  n.size = wn.rows;
  n.rows = wn.rows;
  const std::uint32_t rows = wn.rows;
  const std::uint32_t cols = wn.cols;
  Var out = tape.push(n);
  const double* xv = tape.value(x).data();
  const double* wv = tape.value(weight).data();
  const double* bv = tape.value(bias).data();
  double* y = tape.mutable_value(out);
  for (std::uint32_t r = 0; r < rows; ++r) {
    double acc = bv[r];
    const double* wrow = wv + static_cast<std::size_t>(r) * cols;
    for (std::uint32_t c = 0; c < cols; ++c) acc += wrow[c] * xv[c];
    y[r] = acc;
  }
  return out;
}

Var add(Var a, Var b) {
  require_same_size(a, b, "add");
  Var out = binary(a, b, Tape::Op::Add, static_cast<std::uint32_t>(a.size()));
  auto av = a.value(), bv = b.value();
  double* y = out.tape->mutable_value(out);
  for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] + bv[i];
  return out;
}

Var sub(Var a, Var b) {
  require_same_size(a, b, "sub");
  Var out = binary(a, b, Tape::Op::Sub, static_cast<std::uint32_t>(a.size()));
  auto av = a.value(), bv = b.value();
  double* y = out.tape->mutable_value(out);
  for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] - bv[i];
  return out;
}

Var mul(Var a, Var b) {
  require_same_size(a, b, "mul");
  Var out = binary(a, b, Tape::Op::Mul, static_cast<std::uint32_t>(a.size()));
  auto av = a.value(), bv = b.value();
  double* y = out.tape->mutable_value(out);
  for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] * bv[i];
  return out;
}

Var scale(Var a, double c) {
  Tape::Node n;
  n.op = Tape::Op::Scale;
  n.a = a.id;
  n.size = static_cast<std::uint32_t>(a.size());
  n.rows = n.size;
  n.scalar = c;
  Var out = a.tape->push(n);
  auto av = a.value();
  double* y = out.tape->mutable_value(out);
  for (std::size_t i = 0; i < av.size(); ++i) y[i] = c * av[i];
  return out;
}

Var add_scalar(Var a, double c) {
  Var out = unary(a, Tape::Op::AddScalar, static_cast<std::uint32_t>(a.size()));
  auto av = a.value();
  double* y = out.tape->mutable_value(out);
  for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] + c;
  return out;
}

Var relu(Var x) {
  Var out = unary(x, Tape::Op::Relu, static_cast<std::uint32_t>(x.size()));
  auto xv = x.value();
  double* y = out.tape->mutable_value(out);
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return out;
}

Var softmax(Var x) {
  Var out = unary(x, Tape::Op::Softmax, static_cast<std::uint32_t>(x.size()));
  auto xv = x.value();
  double* y = out.tape->mutable_value(out);
  const double top = *std::max_element(xv.begin(), xv.end());
  double z = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    y[i] = std::exp(xv[i] - top);
    z += y[i];
  }
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] /= z;
  return out;
}

Var softplus(Var x) {
  Var out = unary(x, Tape::Op::Softplus, static_cast<std::uint32_t>(x.size()));
  auto xv = x.value();
  double* y = out.tape->mutable_value(out);
  for (std::size_t i = 0; i < xv.size(); ++i) {
    y[i] = std::max(xv[i], 0.0) + std::log1p(std::exp(-std::abs(xv[i])));
  }
  return out;
}

Var square(Var x) {
  Var out = unary(x, Tape::Op::Square, static_cast<std::uint32_t>(x.size()));
  auto xv = x.value();
  double* y = out.tape->mutable_value(out);
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] * xv[i];
  return out;
}

Var sum(Var x) {
  Var out = unary(x, Tape::Op::Sum, 1);
  double acc = 0.0;
  for (double v : x.value()) acc += v;
  *out.tape->mutable_value(out) = acc;
  return out;
}

Var dot(Var a, Var b) {
  require_same_size(a, b, "dot");
  Var out = binary(a, b, Tape::Op::Dot, 1);
  auto av = a.value(), bv = b.value();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  *out.tape->mutable_value(out) = acc;
  return out;
}

Var elman_cell(Var x, Var h, Var w_ih, Var b_ih, Var w_hh, Var b_hh) {
  return relu(add(linear(x, w_ih, b_ih), linear(h, w_hh, b_hh)));
}

CategoricalTerms categorical_logprob_entropy(Var probs, int index) {
  const auto n = probs.size();
  if (index < 0 || static_cast<std::size_t>(index) >= n) {
    throw std::out_of_range("categorical index " + std::to_string(index) + " outside [0, " +
                            std::to_string(n) + ")");
  }
  Tape& tape = *probs.tape;
  Tape::Node lp;
  lp.op = Tape::Op::CatLogProb;
  lp.a = probs.id;
  lp.size = 1;
  lp.aux_offset = static_cast<std::uint32_t>(index);
  Var logprob = tape.push(lp);
  auto p = probs.value();
  *tape.mutable_value(logprob) = std::log(std::max(p[static_cast<std::size_t>(index)], 1e-300));

  Var entropy = unary(probs, Tape::Op::CatEntropy, 1);
  p = probs.value();
  double h = 0.0;
  for (double pi : p) {
    if (pi > 0.0) h -= pi * std::log(pi);
  }
  *tape.mutable_value(entropy) = h;
  return {logprob, entropy};
}

Var beta_logprob(Var alpha, Var beta, std::span<const double> x) {
  require_same_size(alpha, beta, "beta_logprob");
  if (x.size() != alpha.size()) throw std::invalid_argument("beta_logprob: sample size mismatch");
  std::vector<double> clamped(x.begin(), x.end());
  for (double& v : clamped) {
    // Clamping only absorbs samples that rounded onto the boundary.
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("beta_logprob: sample outside [0, 1]");
    v = std::clamp(v, kBetaClamp, 1.0 - kBetaClamp);
  }
  Tape& tape = same_tape(alpha, beta);
  Tape::Node n;
  n.op = Tape::Op::BetaLogProb;
  n.a = alpha.id;
  n.b = beta.id;
  n.size = static_cast<std::uint32_t>(x.size());
  n.rows = n.size;
  n.aux_offset = tape.push_aux(clamped);
  Var out = tape.push(n);
  auto a = alpha.value(), b = beta.value();
  double* y = tape.mutable_value(out);
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    if (!(a[i] > 0.0 && b[i] > 0.0)) {
      throw std::invalid_argument("beta_logprob: concentrations must be positive");
    }
    y[i] = (a[i] - 1.0) * std::log(clamped[i]) + (b[i] - 1.0) * std::log1p(-clamped[i]) -
           special::log_beta(a[i], b[i]);
  }
  return out;
}

Var beta_entropy(Var alpha, Var beta) {
  require_same_size(alpha, beta, "beta_entropy");
  Var out = binary(alpha, beta, Tape::Op::BetaEntropy, static_cast<std::uint32_t>(alpha.size()));
  auto a = alpha.value(), b = beta.value();
  double* y = out.tape->mutable_value(out);
  for (std::size_t i = 0; i < a.size(); ++i) {
    y[i] = special::log_beta(a[i], b[i]) - (a[i] - 1.0) * special::digamma(a[i]) -
           (b[i] - 1.0) * special::digamma(b[i]) +
           (a[i] + b[i] - 2.0) * special::digamma(a[i] + b[i]);
  }
  return out;
}

double beta_sample(double alpha, double beta, Rng& rng) {
  if (!(alpha > 0.0 && beta > 0.0)) throw std::invalid_argument("beta_sample: bad concentration");
  const double ga = std::gamma_distribution<double>(alpha, 1.0)(rng.engine());
  const double gb = std::gamma_distribution<double>(beta, 1.0)(rng.engine());
  double x = ga + gb > 0.0 ? ga / (ga + gb) : 0.5;
  return std::clamp(x, kBetaClamp, 1.0 - kBetaClamp);
}

// ---- Adam -------------------------------------------------------------------

AdamState::AdamState(const ParameterStore& params, AdamConfig config) : config_(config) {
  for (const auto& p : params) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void adam_step(ParameterStore& params, AdamState& adam, double lr) {
  if (adam.m_.size() != params.size()) {
    throw std::invalid_argument("Adam state does not match the parameter store");
  }
  const AdamConfig& c = adam.config_;
  double clip = 1.0;
  if (c.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& p : params) {
      for (double g : p.grad) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > c.clip_norm) clip = c.clip_norm / norm;
  }
  ++adam.step_;
  const double t = static_cast<double>(adam.step_);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  std::size_t k = 0;
  for (auto& p : params) {
    auto& m = adam.m_[k];
    auto& v = adam.v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i] * clip;
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      p.value[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + c.eps);
    }
    ++k;
  }
  params.zero_grad();
}

// ---- checkpoints ------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'E', 'V', 'A', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& os, T v) {
  unsigned char bytes[sizeof(T)];
  std::uint64_t bits;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw std::runtime_error("checkpoint truncated");
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void save_checkpoint(std::span<const ParameterStore* const> stores, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::uint64_t count = 0;
  for (const auto* store : stores) count += store->size();
  os.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint64_t>(os, count);
  for (const auto* store : stores) {
    for (const auto& p : *store) {
      put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.name.size()));
      os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
      put_le<std::uint64_t>(os, p.rows);
      put_le<std::uint64_t>(os, p.cols);
      for (double v : p.value) put_le<double>(os, v);
    }
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

void save_checkpoint(const ParameterStore& params, const std::filesystem::path& path) {
  const ParameterStore* stores[] = {&params};
  save_checkpoint(stores, path);
}

void load_checkpoint(std::span<ParameterStore* const> stores, const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path.string() + " is not a parameter checkpoint");
  }
  if (get_le<std::uint32_t>(is) != kVersion) throw std::runtime_error("unsupported checkpoint version");
  std::uint64_t expected = 0;
  for (const auto* store : stores) expected += store->size();
  const auto count = get_le<std::uint64_t>(is);
  if (count != expected) throw std::runtime_error("checkpoint tensor count mismatch");
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto len = get_le<std::uint32_t>(is);
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw std::runtime_error("checkpoint truncated");
    Parameter* target = nullptr;
    for (auto* store : stores) {
      for (auto& p : *store) {
        if (p.name == name) target = &p;
      }
    }
    if (target == nullptr) throw std::runtime_error("checkpoint tensor " + name + " has no match");
    const auto rows = get_le<std::uint64_t>(is);
    const auto cols = get_le<std::uint64_t>(is);
    if (rows != target->rows || cols != target->cols) {
      throw std::runtime_error("shape mismatch for " + name);
    }
    for (double& v : target->value) v = get_le<double>(is);
  }
}

void load_checkpoint(ParameterStore& params, const std::filesystem::path& path) {
  ParameterStore* stores[] = {&params};
  load_checkpoint(stores, path);
}

}  // namespace evacc::ad
