#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "evacc/rng.hpp"

namespace evacc::ad {

/// A trainable tensor (row-major matrix or vector) with its gradient buffer.
struct Parameter {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 1;
  std::vector<double> value;
  std::vector<double> grad;

  std::size_t size() const { return value.size(); }
};

/// Named parameters with stable addresses; tape nodes keep raw pointers into it.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  /// Weight matrix initialised uniformly in +-sqrt(1/cols).
  Parameter& add_matrix(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng);
  /// Zero-initialised vector.
  Parameter& add_vector(const std::string& name, std::size_t n);
  /// Bias vector initialised uniformly in +-sqrt(1/fan_in), like its weights.
  Parameter& add_bias(const std::string& name, std::size_t n, std::size_t fan_in, Rng& rng);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;

  void zero_grad();
  std::size_t total_size() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  std::size_t size() const { return params_.size(); }

 private:
  Parameter& add(const std::string& name, std::size_t rows, std::size_t cols);
  std::deque<Parameter> params_;
};

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  std::span<const double> value() const;
  double scalar() const;
  std::size_t size() const;
};

/// Append-only record of a forward computation. Nodes are stored in
/// insertion order, which is also a valid topological order.
class Tape {
 public:
  enum class Op : std::uint8_t {
    Leaf,
    Param,
    Linear,
    Add,
    Sub,
    Mul,
    Scale,
    AddScalar,
    Relu,
    Softmax,
    Softplus,
    Square,
    Sum,
    Dot,
    CatLogProb,
    CatEntropy,
    BetaLogProb,
    BetaEntropy,
  };

  Var constant(std::span<const double> values);
  Var constant(double value);
  Var param(Parameter& p);

  std::span<const double> value(Var v) const;
  /// Gradient of the last backward() loss with respect to `v`.
  std::span<const double> grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  void clear();

  /// Propagate d(loss)/d(node) through every node in reverse insertion order,
  /// adding parameter gradients into their Parameter::grad buffers.
  /// Throws std::invalid_argument if `loss` is not a scalar on this tape.
  void backward(Var loss);

  // Low-level node construction used by the op functions below.
  struct Node {
    Op op = Op::Leaf;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint32_t offset = 0;
    std::uint32_t size = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 1;
    std::uint32_t aux_offset = 0;
    double scalar = 0.0;
    Parameter* param = nullptr;
  };
  Var push(Node node);
  const Node& node(Var v) const { return nodes_[v.id]; }
  double* mutable_value(Var v) { return values_.data() + nodes_[v.id].offset; }
  std::uint32_t push_aux(std::span<const double> aux);
  const double* aux(std::uint32_t offset) const { return aux_.data() + offset; }

 private:
  void check(Var v) const;

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<double> aux_;
};

/// y = W x + b.
Var linear(Var x, Var weight, Var bias);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var relu(Var x);
Var softmax(Var x);
/// log(1 + exp(x)), elementwise.
Var softplus(Var x);
Var square(Var x);
Var sum(Var x);
Var dot(Var a, Var b);

/// h' = relu(W_ih x + b_ih + W_hh h + b_hh).
Var elman_cell(Var x, Var h, Var w_ih, Var b_ih, Var w_hh, Var b_hh);

struct CategoricalTerms {
  Var logprob;
  Var entropy;
};
/// log(probs[index]) and -sum p log p. Throws std::out_of_range on a bad index.
CategoricalTerms categorical_logprob_entropy(Var probs, int index);

/// Elementwise Beta log-density of fixed samples `x` under concentrations
/// (alpha, beta). Samples in [0, 1] are clamped to [1e-6, 1 - 1e-6]; anything
/// else throws std::invalid_argument.
Var beta_logprob(Var alpha, Var beta, std::span<const double> x);
/// Elementwise differential entropy of Beta(alpha, beta).
Var beta_entropy(Var alpha, Var beta);

/// Gamma-ratio draw from Beta(alpha, beta); not differentiable.
double beta_sample(double alpha, double beta, Rng& rng);

inline constexpr double kBetaClamp = 1e-6;

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  ///< global gradient-norm clip; 0 disables
};

class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const ParameterStore& params, AdamConfig config = {});

  const AdamConfig& config() const { return config_; }
  std::uint64_t step() const { return step_; }

 private:
  friend void adam_step(ParameterStore&, AdamState&, double);
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t step_ = 0;
};

/// Bias-corrected Adam update over every parameter, then zero the gradients.
void adam_step(ParameterStore& params, AdamState& adam, double lr);

/// Checkpoint layout (little-endian):
///   magic "EVACCKPT", u32 version, u64 count, then per tensor
///   u32 name length, name bytes, u64 rows, u64 cols, rows*cols f64 values.
void save_checkpoint(std::span<const ParameterStore* const> stores, const std::filesystem::path& path);
void save_checkpoint(const ParameterStore& params, const std::filesystem::path& path);
/// Loads values into existing parameters; names and shapes must match and
/// every tensor in the file must exist in one of the stores.
void load_checkpoint(std::span<ParameterStore* const> stores, const std::filesystem::path& path);
void load_checkpoint(ParameterStore& params, const std::filesystem::path& path);

}  // namespace evacc::ad
