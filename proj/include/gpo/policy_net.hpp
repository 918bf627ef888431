#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Core>

#include "gpo/error.hpp"
#include "gpo/features.hpp"
#include "gpo/symbolic.hpp"

namespace gpo {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Graph convolution used inside each tower.
///   MixHop:    concat_j (Ahat^j H W_j + b_j) over the hop set, with
///              Ahat = D^-1/2 (A + I) D^-1/2.
///   SingleHop: M H W + b with M = D^-1 (A + I), a mean over the closed
///              neighborhood (GraphSAGE-style ablation).
enum class Backbone { mixhop, singlehop };

inline std::string to_string(Backbone b)
{
  return b == Backbone::mixhop ? "mixhop" : "singlehop";
}

inline Backbone backbone_from_string(std::string const& s)
{
  if (s == "mixhop") {
    return Backbone::mixhop;
  }
  if (s == "singlehop") {
    return Backbone::singlehop;
  }
  throw validation_error("unknown backbone '" + s + "'");
}

struct NetConfig {
  Backbone backbone = Backbone::mixhop;
  int layers = 2;
  int hidden = 16;
  std::vector<int> hops = {0, 1, 2};

  static NetConfig for_backbone(Backbone b)
  {
    NetConfig cfg;
    cfg.backbone = b;
    if (b == Backbone::singlehop) {
      cfg.hops = {1};
    }
    return cfg;
  }

  int layer_width() const { return hidden * static_cast<int>(hops.size()); }
  int input_width(int layer) const { return layer == 0 ? 2 : layer_width(); }

  void validate() const
  {
    if (layers < 1 || hidden < 1 || hops.empty()) {
      throw validation_error("network needs at least one layer, hidden unit and hop");
    }
    for (auto j : hops) {
      if (j < 0) {
        throw validation_error("hop powers must be non-negative");
      }
      if (backbone == Backbone::singlehop && j != 1) {
        throw validation_error("singlehop backbone only supports hop set {1}");
      }
    }
  }

  friend bool operator==(NetConfig const&, NetConfig const&) = default;
};

/// Normalized propagation operator over the live subgraph, applied
/// implicitly from neighbor lists in local (row) indices.
class Propagation {
public:
  Propagation() = default;

  Propagation(std::vector<std::vector<Eigen::Index>> nbrs, Backbone kind)
    : nbrs_(std::move(nbrs)), kind_(kind)
  {
    auto const n = static_cast<Eigen::Index>(nbrs_.size());
    scale_.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      auto const d = static_cast<double>(nbrs_[static_cast<std::size_t>(r)].size() + 1);
      scale_(r) = kind_ == Backbone::mixhop ? 1.0 / std::sqrt(d) : 1.0 / d;
    }
  }

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(nbrs_.size()); }
  Backbone kind() const noexcept { return kind_; }
  std::vector<std::vector<Eigen::Index>> const& neighbors() const noexcept { return nbrs_; }

  /// S^power H, where S is the one-hop operator of this backbone.
  RowMatrix apply(int power, RowMatrix const& h) const
  {
    RowMatrix out = h;
    for (int k = 0; k < power; ++k) {
      out = apply_once(out, false);
    }
    return out;
  }

  /// (S^power)^T G.
  RowMatrix apply_transpose(int power, RowMatrix const& g) const
  {
    RowMatrix out = g;
    for (int k = 0; k < power; ++k) {
      out = apply_once(out, true);
    }
    return out;
  }

  /// Materialized S^power, for inspection and tests.
  Eigen::MatrixXd dense(int power) const
  {
    RowMatrix eye = RowMatrix::Identity(size(), size());
    return apply(power, eye);
  }

private:
  RowMatrix apply_once(RowMatrix const& h, bool transpose) const
  {
    RowMatrix out(h.rows(), h.cols());
    auto const n = size();
    if (kind_ == Backbone::mixhop) {
      // Symmetric, so the transpose is the operator itself.
      for (Eigen::Index r = 0; r < n; ++r) {
        Eigen::RowVectorXd acc = scale_(r) * h.row(r);
        for (auto s : nbrs_[static_cast<std::size_t>(r)]) {
          acc += scale_(s) * h.row(s);
        }
        out.row(r) = scale_(r) * acc;
      }
    } else if (!transpose) {
      for (Eigen::Index r = 0; r < n; ++r) {
        Eigen::RowVectorXd acc = h.row(r);
        for (auto s : nbrs_[static_cast<std::size_t>(r)]) {
          acc += h.row(s);
        }
        out.row(r) = scale_(r) * acc;
      }
    } else {
      for (Eigen::Index s = 0; s < n; ++s) {
        Eigen::RowVectorXd acc = scale_(s) * h.row(s);
        for (auto r : nbrs_[static_cast<std::size_t>(s)]) {
          acc += scale_(r) * h.row(r);
        }
        out.row(s) = acc;
      }
    }
    return out;
  }

  std::vector<std::vector<Eigen::Index>> nbrs_;
  Eigen::VectorXd scale_;
  Backbone kind_ = Backbone::mixhop;
};

/// Propagation over the live nodes of g; row r corresponds to the r-th live
/// node in ascending id order.
inline Propagation build_propagation(EliminationGraph const& g, Backbone kind = Backbone::mixhop)
{
  auto const live = g.live_nodes();
  std::vector<Eigen::Index> local(static_cast<std::size_t>(g.n_original()), -1);
  for (std::size_t r = 0; r < live.size(); ++r) {
    local[static_cast<std::size_t>(live[r])] = static_cast<Eigen::Index>(r);
  }
  std::vector<std::vector<Eigen::Index>> nbrs(live.size());
  for (std::size_t r = 0; r < live.size(); ++r) {
    auto& row = nbrs[r];
    for (auto u : g.neighbors(live[r])) {
      row.push_back(local[static_cast<std::size_t>(u)]);
    }
  }
  return Propagation(std::move(nbrs), kind);
}

enum class Tower : int { actor = 0, critic = 1 };

/// Actor-critic network with two independent graph-convolution towers of
/// identical shape. All parameters live in one flat vector; `Block`s give
/// the row-major views.
class PolicyValueNet {
public:
  struct Block {
    Eigen::Index offset = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
  };

  PolicyValueNet() : PolicyValueNet(NetConfig{}) {}

  explicit PolicyValueNet(NetConfig cfg) : cfg_(std::move(cfg))
  {
    cfg_.validate();
    Eigen::Index offset = 0;
    auto add = [&](Eigen::Index rows, Eigen::Index cols) {
      blocks_.push_back(Block{offset, rows, cols});
      offset += rows * cols;
      return blocks_.size() - 1;
    };
    auto const hops = cfg_.hops.size();
    for (int tower = 0; tower < 2; ++tower) {
      for (int l = 0; l < cfg_.layers; ++l) {
        for (std::size_t k = 0; k < hops; ++k) {
          add(cfg_.input_width(l), cfg_.hidden);
          add(1, cfg_.hidden);
        }
      }
    }
    actor_head_ = add(cfg_.layer_width(), 1);
    critic_head_ = add(cfg_.layer_width(), 1);
    critic_bias_ = add(1, 1);
    params_ = Eigen::VectorXd::Zero(offset);
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every block.
  PolicyValueNet(NetConfig cfg, std::uint64_t seed) : PolicyValueNet(std::move(cfg))
  {
    std::mt19937_64 rng(seed);
    auto fill = [&](std::size_t block, Eigen::Index fan_in) {
      double const bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      auto const& b = blocks_[block];
      for (Eigen::Index i = 0; i < b.rows * b.cols; ++i) {
        params_(b.offset + i) = dist(rng);
      }
    };
    for (int tower = 0; tower < 2; ++tower) {
      for (int l = 0; l < cfg_.layers; ++l) {
        for (std::size_t k = 0; k < cfg_.hops.size(); ++k) {
          fill(weight_index(static_cast<Tower>(tower), l, k), cfg_.input_width(l));
          fill(bias_index(static_cast<Tower>(tower), l, k), cfg_.input_width(l));
        }
      }
    }
    fill(actor_head_, cfg_.layer_width());
    fill(critic_head_, cfg_.layer_width());
    fill(critic_bias_, cfg_.layer_width());
  }

  NetConfig const& config() const noexcept { return cfg_; }
  Eigen::Index parameter_count() const noexcept { return params_.size(); }
  Eigen::VectorXd const& parameters() const noexcept { return params_; }
  Eigen::VectorXd& parameters() noexcept { return params_; }
  std::vector<Block> const& blocks() const noexcept { return blocks_; }

  std::size_t weight_index(Tower t, int layer, std::size_t hop) const
  {
    auto const per_layer = 2 * cfg_.hops.size();
    auto const per_tower = per_layer * static_cast<std::size_t>(cfg_.layers);
    return static_cast<std::size_t>(t) * per_tower +
           static_cast<std::size_t>(layer) * per_layer + 2 * hop;
  }
  std::size_t bias_index(Tower t, int layer, std::size_t hop) const
  {
    return weight_index(t, layer, hop) + 1;
  }
  std::size_t actor_head_index() const noexcept { return actor_head_; }
  std::size_t critic_head_index() const noexcept { return critic_head_; }
  std::size_t critic_bias_index() const noexcept { return critic_bias_; }

  Eigen::Map<RowMatrix const> view(std::size_t block) const
  {
    auto const& b = blocks_[block];
    return {params_.data() + b.offset, b.rows, b.cols};
  }

  /// Same block view over any vector laid out like the parameters
  /// (gradients, optimizer moments).
  Eigen::Map<RowMatrix> view(std::size_t block, Eigen::VectorXd& flat) const
  {
    auto const& b = blocks_[block];
    return {flat.data() + b.offset, b.rows, b.cols};
  }

  /// Tower whose parameters a block belongs to; heads map to their tower.
  Tower tower_of(std::size_t block) const
  {
    if (block == actor_head_) {
      return Tower::actor;
    }
    if (block == critic_head_ || block == critic_bias_) {
      return Tower::critic;
    }
    auto const per_tower = 2 * cfg_.hops.size() * static_cast<std::size_t>(cfg_.layers);
    return block < per_tower ? Tower::actor : Tower::critic;
  }

private:
  NetConfig cfg_;
  Eigen::VectorXd params_;
  std::vector<Block> blocks_;
  std::size_t actor_head_ = 0;
  std::size_t critic_head_ = 0;
  std::size_t critic_bias_ = 0;
};

struct LayerCache {
  std::vector<RowMatrix> propagated;  // S^j H_in per hop
  RowMatrix output;                   // tanh of the concatenated hop outputs
};

struct TowerCache {
  std::vector<LayerCache> layers;
};

/// Everything backward needs: the operator, inputs and per-layer
/// activations of both towers.
struct ForwardTape {
  NetConfig config;
  Eigen::Index parameter_count = 0;
  Propagation propagation;
  RowMatrix input;
  TowerCache actor;
  TowerCache critic;
  Eigen::VectorXd log_probs;
  Eigen::VectorXd critic_node;  // tanh(H w + b) per node, before pooling
  double value = 0.0;
};

struct ForwardResult {
  Eigen::VectorXd log_probs;
  double value = 0.0;
  ForwardTape tape;
};

namespace detail {

inline TowerCache run_tower(PolicyValueNet const& net, Tower tower, Propagation const& prop,
                            RowMatrix const& input)
{
  auto const& cfg = net.config();
  TowerCache cache;
  cache.layers.resize(static_cast<std::size_t>(cfg.layers));
  RowMatrix const* h = &input;
  for (int l = 0; l < cfg.layers; ++l) {
    auto& layer = cache.layers[static_cast<std::size_t>(l)];
    layer.output.resize(input.rows(), cfg.layer_width());
    for (std::size_t k = 0; k < cfg.hops.size(); ++k) {
      layer.propagated.push_back(prop.apply(cfg.hops[k], *h));
      auto const w = net.view(net.weight_index(tower, l, k));
      auto const b = net.view(net.bias_index(tower, l, k));
      auto block = layer.output.middleCols(static_cast<Eigen::Index>(k) * cfg.hidden, cfg.hidden);
      block.noalias() = layer.propagated.back() * w;
      block.rowwise() += b.row(0);
    }
    layer.output = layer.output.array().tanh().matrix();
    h = &layer.output;
  }
  return cache;
}

inline void backprop_tower(PolicyValueNet const& net, Tower tower, Propagation const& prop,
                           TowerCache const& cache, RowMatrix d_out, Eigen::VectorXd& grad)
{
  auto const& cfg = net.config();
  for (int l = cfg.layers - 1; l >= 0; --l) {
    auto const& layer = cache.layers[static_cast<std::size_t>(l)];
    RowMatrix const dz =
        (d_out.array() * (1.0 - layer.output.array().square())).matrix();
    RowMatrix d_in;
    if (l > 0) {
      d_in = RowMatrix::Zero(dz.rows(), cfg.input_width(l));
    }
    for (std::size_t k = 0; k < cfg.hops.size(); ++k) {
      auto const dz_k = dz.middleCols(static_cast<Eigen::Index>(k) * cfg.hidden, cfg.hidden);
      auto const& p_k = layer.propagated[k];
      net.view(net.weight_index(tower, l, k), grad).noalias() += p_k.transpose() * dz_k;
      net.view(net.bias_index(tower, l, k), grad).row(0) += dz_k.colwise().sum();
      if (l > 0) {
        RowMatrix const dp = dz_k * net.view(net.weight_index(tower, l, k)).transpose();
        d_in += prop.apply_transpose(cfg.hops[k], dp);
      }
    }
    d_out = std::move(d_in);
  }
}

} // namespace detail

/// Forward pass on explicit inputs. `input` rows must follow the
/// propagation's row order.
inline ForwardResult forward(PolicyValueNet const& net, Propagation prop, RowMatrix input)
{
  if (prop.size() == 0) {
    throw invalid_state("forward on an empty graph");
  }
  if (input.rows() != prop.size() || input.cols() != 2) {
    throw validation_error("feature matrix must be |live| x 2");
  }
  if (prop.kind() != net.config().backbone) {
    throw validation_error("propagation kind does not match network backbone");
  }
  ForwardResult out;
  auto& tape = out.tape;
  tape.config = net.config();
  tape.parameter_count = net.parameter_count();
  tape.propagation = std::move(prop);
  tape.input = std::move(input);
  tape.actor = detail::run_tower(net, Tower::actor, tape.propagation, tape.input);
  tape.critic = detail::run_tower(net, Tower::critic, tape.propagation, tape.input);

  auto const& h_actor = tape.actor.layers.back().output;
  Eigen::VectorXd const logits = h_actor * net.view(net.actor_head_index());
  double const peak = logits.maxCoeff();
  double const lse = peak + std::log((logits.array() - peak).exp().sum());
  tape.log_probs = logits.array() - lse;

  auto const& h_critic = tape.critic.layers.back().output;
  Eigen::VectorXd const pre =
      (h_critic * net.view(net.critic_head_index())).array() + net.view(net.critic_bias_index())(0, 0);
  tape.critic_node = pre.array().tanh();
  tape.value = tape.critic_node.mean();

  out.log_probs = tape.log_probs;
  out.value = tape.value;
  return out;
}

inline ForwardResult forward(PolicyValueNet const& net, EliminationGraph const& g,
                             NodeFeatures const& x)
{
  if (g.empty()) {
    throw invalid_state("forward on an empty graph");
  }
  if (x.rows() != g.live_count()) {
    throw validation_error("feature rows do not match live node count");
  }
  return forward(net, build_propagation(g, net.config().backbone), RowMatrix(x.values));
}

/// Re-runs the forward pass from the inputs stored in a tape.
inline ForwardResult replay(PolicyValueNet const& net, ForwardTape const& tape)
{
  return forward(net, tape.propagation, tape.input);
}

/// Gradient of  sum_v d_log_probs[v] * log_probs[v] + d_value * value  with
/// respect to every parameter, laid out like net.parameters().
inline Eigen::VectorXd backward(PolicyValueNet const& net, ForwardTape const& tape,
                                Eigen::VectorXd const& d_log_probs, double d_value)
{
  if (!(tape.config == net.config()) || tape.parameter_count != net.parameter_count()) {
    throw validation_error("tape was recorded with a different network shape");
  }
  if (d_log_probs.size() != tape.log_probs.size()) {
    throw validation_error("upstream gradient does not match log_probs size");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.parameter_count());
  auto const n = static_cast<double>(tape.log_probs.size());

  if (!d_log_probs.isZero(0.0)) {
    // d logsoftmax: ds = g - softmax * sum(g)
    Eigen::VectorXd const probs = tape.log_probs.array().exp();
    Eigen::VectorXd const d_logits = d_log_probs - probs * d_log_probs.sum();
    auto const& h = tape.actor.layers.back().output;
    net.view(net.actor_head_index(), grad).noalias() += h.transpose() * d_logits;
    RowMatrix d_h = d_logits * net.view(net.actor_head_index()).transpose();
    detail::backprop_tower(net, Tower::actor, tape.propagation, tape.actor, std::move(d_h), grad);
  }

  if (d_value != 0.0) {
    Eigen::VectorXd const d_pre =
        (d_value / n) * (1.0 - tape.critic_node.array().square()).matrix();
    auto const& h = tape.critic.layers.back().output;
    net.view(net.critic_head_index(), grad).noalias() += h.transpose() * d_pre;
    net.view(net.critic_bias_index(), grad)(0, 0) += d_pre.sum();
    RowMatrix d_h = d_pre * net.view(net.critic_head_index()).transpose();
    detail::backprop_tower(net, Tower::critic, tape.propagation, tape.critic, std::move(d_h), grad);
  }
  return grad;
}

// Checkpoint format (text, version 1):
//   gpo-checkpoint 1
//   backbone <mixhop|singlehop>
//   layers <L>
//   hidden <H>
//   hops <count> <j...>
//   params <N>
//   <N lines, one shortest round-trip double each>

inline void save_checkpoint(std::ostream& out, PolicyValueNet const& net)
{
  auto const& cfg = net.config();
  out << "gpo-checkpoint 1\n";
  out << "backbone " << to_string(cfg.backbone) << '\n';
  out << "layers " << cfg.layers << '\n';
  out << "hidden " << cfg.hidden << '\n';
  out << "hops " << cfg.hops.size();
  for (auto j : cfg.hops) {
    out << ' ' << j;
  }
  out << '\n';
  out << "params " << net.parameter_count() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < net.parameter_count(); ++i) {
    auto const res = std::to_chars(buf, buf + sizeof(buf), net.parameters()(i));
    out.write(buf, res.ptr - buf);
    out.put('\n');
  }
}

inline PolicyValueNet load_checkpoint(std::istream& in)
{
  auto expect_key = [&](char const* key) {
    std::string word;
    if (!(in >> word) || word != key) {
      throw parse_error(std::string("checkpoint: expected '") + key + "'");
    }
  };
  expect_key("gpo-checkpoint");
  int version = 0;
  if (!(in >> version) || version != 1) {
    throw parse_error("checkpoint: unsupported version");
  }
  NetConfig cfg;
  std::string backbone;
  expect_key("backbone");
  in >> backbone;
  try {
    cfg.backbone = backbone_from_string(backbone);
  } catch (validation_error const& e) {
    throw parse_error(std::string("checkpoint: ") + e.what());
  }
  expect_key("layers");
  in >> cfg.layers;
  expect_key("hidden");
  in >> cfg.hidden;
  expect_key("hops");
  std::size_t hop_count = 0;
  in >> hop_count;
  if (!in || hop_count > 64) {
    throw parse_error("checkpoint: bad hop count");
  }
  cfg.hops.assign(hop_count, 0);
  for (auto& j : cfg.hops) {
    in >> j;
  }
  expect_key("params");
  long long declared = -1;
  in >> declared;
  if (!in) {
    throw parse_error("checkpoint: truncated header");
  }
  PolicyValueNet net = [&] {
    try {
      return PolicyValueNet(cfg);
    } catch (validation_error const& e) {
      throw parse_error(std::string("checkpoint: ") + e.what());
    }
  }();
  if (declared != net.parameter_count()) {
    throw parse_error("checkpoint: shape mismatch, header implies " +
                      std::to_string(net.parameter_count()) + " parameters but file declares " +
                      std::to_string(declared));
  }
  std::string token;
  for (Eigen::Index i = 0; i < net.parameter_count(); ++i) {
    if (!(in >> token)) {
      throw parse_error("checkpoint: truncated parameter list");
    }
    double value = 0.0;
    auto const res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
      throw parse_error("checkpoint: bad parameter value '" + token + "'");
    }
    net.parameters()(i) = value;
  }
  if (in >> token) {
    throw parse_error("checkpoint: trailing data after parameters");
  }
  return net;
}

/// Loads a checkpoint and rejects it unless its shape equals `expected`.
inline PolicyValueNet load_checkpoint(std::istream& in, NetConfig const& expected)
{
  auto net = load_checkpoint(in);
  if (!(net.config() == expected)) {
    throw parse_error("checkpoint: network shape does not match the expected configuration");
  }
  return net;
}

} // namespace gpo
