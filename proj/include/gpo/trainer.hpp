#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gpo/features.hpp"
#include "gpo/policy_net.hpp"
#include "gpo/symbolic.hpp"

namespace gpo {

enum class RewardVariant { asr, raw };

inline std::string to_string(RewardVariant r) { return r == RewardVariant::asr ? "asr" : "raw"; }

inline RewardVariant reward_from_string(std::string const& s)
{
  if (s == "asr") {
    return RewardVariant::asr;
  }
  if (s == "raw") {
    return RewardVariant::raw;
  }
  throw validation_error("unknown reward variant '" + s + "'");
}

enum class ActionMode { sample, greedy };

/// One episode of the elimination game. All per-step vectors have length n.
/// `actor_grads[t]` is d log pi(v_t | G_t) / d theta and `critic_grads[t]`
/// is d Value(G_t) / d theta; they stand in for the forward tapes, since the
/// episode gradient is linear in them once the advantages are known.
struct EpisodeRecord {
  std::vector<node_t> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<std::int64_t> rewards;
  std::vector<std::size_t> edge_counts;
  std::vector<Eigen::VectorXd> actor_grads;
  std::vector<Eigen::VectorXd> critic_grads;

  std::size_t size() const noexcept { return actions.size(); }

  std::int64_t total_fill() const
  {
    std::int64_t sum = 0;
    for (auto r : rewards) {
      sum -= r;
    }
    return sum;
  }
};

struct Rollout {
  EpisodeRecord record;
  Ordering ordering;
};

namespace detail {

inline std::size_t argmax_lowest(Eigen::VectorXd const& v)
{
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(static_cast<Eigen::Index>(best))) {
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

template <class Rng>
std::size_t sample_index(Eigen::VectorXd const& log_probs, Rng& rng)
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double const u = unit(rng);
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < log_probs.size(); ++i) {
    cumulative += std::exp(log_probs(i));
    if (u < cumulative) {
      return static_cast<std::size_t>(i);
    }
  }
  return static_cast<std::size_t>(log_probs.size() - 1);
}

} // namespace detail

/// Plays one full elimination episode. In greedy mode the action is the
/// argmax (lowest live id on ties) and no gradients are recorded.
template <class Rng>
Rollout rollout(PolicyValueNet const& net, SparsityPattern const& p, Rng& rng,
                ActionMode mode = ActionMode::sample, bool record_gradients = true)
{
  if (p.size() < 1) {
    throw validation_error("rollout needs at least one node");
  }
  bool const grads = record_gradients && mode == ActionMode::sample;
  EliminationGraph g(p);
  Rollout out;
  auto& rec = out.record;
  auto const n = static_cast<std::size_t>(p.size());
  rec.actions.reserve(n);
  std::vector<node_t> perm;
  perm.reserve(n);

  while (!g.empty()) {
    auto const x = normalize_features(compute_features(g));
    auto fwd = forward(net, g, x);
    auto const pick = mode == ActionMode::greedy ? detail::argmax_lowest(fwd.log_probs)
                                                 : detail::sample_index(fwd.log_probs, rng);
    auto const v = x.nodes[pick];
    auto const row = static_cast<Eigen::Index>(pick);

    rec.actions.push_back(v);
    rec.log_probs.push_back(fwd.log_probs(row));
    rec.values.push_back(fwd.value);
    rec.edge_counts.push_back(g.edge_count());
    if (grads) {
      Eigen::VectorXd onehot = Eigen::VectorXd::Zero(fwd.log_probs.size());
      onehot(row) = 1.0;
      rec.actor_grads.push_back(backward(net, fwd.tape, onehot, 0.0));
      rec.critic_grads.push_back(
          backward(net, fwd.tape, Eigen::VectorXd::Zero(fwd.log_probs.size()), 1.0));
    }
    auto const fill = g.eliminate(v);
    rec.rewards.push_back(-static_cast<std::int64_t>(fill.size()));
    perm.push_back(v);
  }
  out.ordering = Ordering(std::move(perm));
  return out;
}

/// Undiscounted suffix sums R_t = sum_{k >= t} r_k.
inline std::vector<double> returns_to_go(std::vector<std::int64_t> const& rewards)
{
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc += static_cast<double>(rewards[t]);
    out[t] = acc;
  }
  return out;
}

/// ASR_t = (|E_t| + R_t) / (|E_t| - R_t), with 0/0 defined as 1.
inline double adaptive_saturation(double edges, double ret)
{
  double const den = edges - ret;
  if (den == 0.0) {
    return 1.0;
  }
  return (edges + ret) / den;
}

inline std::vector<double> adaptive_saturation_return(std::vector<std::size_t> const& edge_counts,
                                                      std::vector<std::int64_t> const& rewards)
{
  if (edge_counts.size() != rewards.size()) {
    throw validation_error("edge counts and rewards differ in length");
  }
  auto const ret = returns_to_go(rewards);
  std::vector<double> out(ret.size());
  for (std::size_t t = 0; t < ret.size(); ++t) {
    out[t] = adaptive_saturation(static_cast<double>(edge_counts[t]), ret[t]);
  }
  return out;
}

/// Ablation target: R_t / max(1, |E_0|).
inline std::vector<double> scaled_raw_return(std::vector<std::size_t> const& edge_counts,
                                             std::vector<std::int64_t> const& rewards)
{
  if (edge_counts.size() != rewards.size()) {
    throw validation_error("edge counts and rewards differ in length");
  }
  auto out = returns_to_go(rewards);
  double const scale =
      std::max(1.0, edge_counts.empty() ? 1.0 : static_cast<double>(edge_counts.front()));
  for (auto& r : out) {
    r /= scale;
  }
  return out;
}

struct Losses {
  double actor = 0.0;
  double critic = 0.0;
  std::vector<double> advantages;
};

/// A_t = target_t - Value(G_t); L_a = -mean(log pi_t * A_t); L_c = mean(A_t^2).
inline Losses losses(std::vector<double> const& log_probs, std::vector<double> const& values,
                     std::vector<double> const& targets)
{
  if (log_probs.size() != values.size() || values.size() != targets.size()) {
    throw validation_error("loss inputs differ in length");
  }
  Losses out;
  auto const n = static_cast<double>(targets.size());
  out.advantages.resize(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    double const a = targets[t] - values[t];
    out.advantages[t] = a;
    out.actor -= log_probs[t] * a;
    out.critic += a * a;
  }
  if (n > 0) {
    out.actor /= n;
    out.critic /= n;
  }
  return out;
}

inline Losses losses(EpisodeRecord const& rec, std::vector<double> const& targets)
{
  return losses(rec.log_probs, rec.values, targets);
}

/// Gradient of L_a + L_c. Advantages are constants for the actor term; the
/// critic term differentiates through Value only.
inline Eigen::VectorXd episode_gradient(EpisodeRecord const& rec,
                                        std::vector<double> const& advantages,
                                        Eigen::Index parameter_count)
{
  if (rec.actor_grads.size() != rec.size() || rec.critic_grads.size() != rec.size()) {
    throw validation_error("episode was recorded without gradients");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(parameter_count);
  auto const n = static_cast<double>(rec.size());
  for (std::size_t t = 0; t < rec.size(); ++t) {
    grad += (-advantages[t] / n) * rec.actor_grads[t];
    grad += (-2.0 * advantages[t] / n) * rec.critic_grads[t];
  }
  return grad;
}

/// Adaptive moment estimation with bias correction.
class Adam {
public:
  Adam(Eigen::Index size, double beta1, double beta2, double epsilon)
    : m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon)
  {}

  void step(Eigen::VectorXd& params, Eigen::VectorXd const& grad, double lr)
  {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
    double const c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double const c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + epsilon_);
  }

  long steps() const noexcept { return t_; }

private:
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  double beta1_;
  double beta2_;
  double epsilon_;
  long t_ = 0;
};

struct TrainerConfig {
  int epochs = 3;
  int episodes_per_graph = 1;
  double lr_first_epoch = 0.01;
  double lr_later_epochs = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  NetConfig net;
  RewardVariant reward = RewardVariant::asr;
  int checkpoint_every = 0;  // episodes; 0 disables
  std::string checkpoint_path;

  double learning_rate(int epoch) const { return epoch == 0 ? lr_first_epoch : lr_later_epochs; }

  void validate() const
  {
    if (epochs < 0 || episodes_per_graph < 1) {
      throw validation_error("epochs must be >= 0 and episodes per graph >= 1");
    }
    if (!(lr_first_epoch >= 0.0) || !(lr_later_epochs >= 0.0)) {
      throw validation_error("learning rates must be non-negative");
    }
    if (checkpoint_every > 0 && checkpoint_path.empty()) {
      throw validation_error("checkpointing requested without a path");
    }
    net.validate();
  }
};

struct TrainLogEntry {
  int epoch = 0;
  std::size_t graph_id = 0;
  std::int64_t total_fill = 0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
};

struct TrainResult {
  PolicyValueNet net;
  std::vector<TrainLogEntry> log;
};

inline std::vector<double> training_targets(EpisodeRecord const& rec, RewardVariant variant)
{
  return variant == RewardVariant::asr ? adaptive_saturation_return(rec.edge_counts, rec.rewards)
                                       : scaled_raw_return(rec.edge_counts, rec.rewards);
}

/// Initial network for a config; parameters derive from cfg.seed.
inline PolicyValueNet initial_network(TrainerConfig const& cfg)
{
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    0x6e6574u};
  std::mt19937_64 init_rng(seq);
  return PolicyValueNet(cfg.net, init_rng());
}

/// One sampled rollout and one optimizer step on L_a + L_c per graph visit.
/// `on_entry`, if set, sees every log entry as it is produced.
inline TrainResult train(std::vector<SparsityPattern> const& graphs, TrainerConfig const& cfg,
                         std::function<void(TrainLogEntry const&)> const& on_entry = {})
{
  if (graphs.empty()) {
    throw validation_error("training set is empty");
  }
  cfg.validate();
  TrainResult result{initial_network(cfg), {}};
  auto& net = result.net;
  Adam adam(net.parameter_count(), cfg.beta1, cfg.beta2, cfg.epsilon);
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    0x726f6cu};
  std::mt19937_64 rng(seq);

  long episode = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double const lr = cfg.learning_rate(epoch);
    for (std::size_t gid = 0; gid < graphs.size(); ++gid) {
      for (int rep = 0; rep < cfg.episodes_per_graph; ++rep) {
        auto ro = rollout(net, graphs[gid], rng);
        auto const targets = training_targets(ro.record, cfg.reward);
        auto const loss = losses(ro.record, targets);
        auto const grad = episode_gradient(ro.record, loss.advantages, net.parameter_count());
        adam.step(net.parameters(), grad, lr);

        TrainLogEntry entry{epoch, gid, ro.record.total_fill(), loss.actor, loss.critic};
        result.log.push_back(entry);
        if (on_entry) {
          on_entry(entry);
        }
        ++episode;
        if (cfg.checkpoint_every > 0 && episode % cfg.checkpoint_every == 0) {
          std::ofstream ckpt(cfg.checkpoint_path);
          save_checkpoint(ckpt, net);
        }
      }
    }
  }
  return result;
}

/// `epoch,graph_id,total_fill,L_a,L_c`
inline void write_log_entry(std::ostream& out, TrainLogEntry const& e)
{
  char a[64];
  char c[64];
  auto const ra = std::to_chars(a, a + sizeof(a), e.actor_loss);
  auto const rc = std::to_chars(c, c + sizeof(c), e.critic_loss);
  out << e.epoch << ',' << e.graph_id << ',' << e.total_fill << ','
      << std::string_view(a, static_cast<std::size_t>(ra.ptr - a)) << ','
      << std::string_view(c, static_cast<std::size_t>(rc.ptr - c)) << '\n';
}

/// Mean episode fill per epoch, from a training log.
inline std::vector<double> mean_fill_per_epoch(std::vector<TrainLogEntry> const& log)
{
  std::vector<double> sum;
  std::vector<double> count;
  for (auto const& e : log) {
    auto const ep = static_cast<std::size_t>(e.epoch);
    if (sum.size() <= ep) {
      sum.resize(ep + 1, 0.0);
      count.resize(ep + 1, 0.0);
    }
    sum[ep] += static_cast<double>(e.total_fill);
    count[ep] += 1.0;
  }
  for (std::size_t i = 0; i < sum.size(); ++i) {
    sum[i] = count[i] > 0 ? sum[i] / count[i] : 0.0;
  }
  return sum;
}

} // namespace gpo
