#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "goalrec/error.hpp"
#include "goalrec/quintic.hpp"

namespace goalrec::recognizer {

using quintic::TimedState;

/// Sorted, duplicate-free fact ids. The canonical form of a discrete state.
using GroundState = std::vector<int>;

/// Position-only Euclidean distance between two continuous states.
double euclid_continuous(const TimedState& a, const TimedState& b);

/// sqrt(|a symmetric-difference b|); both inputs must be sorted.
double euclid_discrete(const GroundState& a, const GroundState& b);

/// 1 - exp(-1 / mean_distance), with the zero-distance limit defined as 1.
/// Strictly positive for finite distances.
double likelihood_from_mean(double mean_distance);

template <typename State>
struct Observation {
  State state;
  long t = 0;  // discrete timestamp index
};

/// Distance traits. Continuous states compare positions; discrete states
/// compare fact sets.
template <typename State>
struct Metric;

template <>
struct Metric<TimedState> {
  static double distance(const TimedState& a, const TimedState& b) {
    return euclid_continuous(a, b);
  }
};

template <>
struct Metric<GroundState> {
  static double distance(const GroundState& a, const GroundState& b) {
    return euclid_discrete(a, b);
  }
};

/// State of `traj` matched to timestamp t; timestamps past the end map to
/// the final (goal) state.
template <typename State>
const State& state_at(const std::vector<State>& traj, long t) {
  const std::size_t idx = t < 0 ? 0 : static_cast<std::size_t>(t);
  return traj[std::min(idx, traj.size() - 1)];
}

/// Precomputed trajectories per goal hypothesis. Immutable once built and
/// safe to share between sessions.
template <typename State>
class HypothesisBank {
 public:
  using Sequence = std::vector<State>;

  HypothesisBank() = default;

  /// Uniform priors.
  HypothesisBank(std::vector<std::string> goals, std::vector<std::vector<Sequence>> trajectories)
      : HypothesisBank(goals, std::move(trajectories),
                       std::vector<double>(goals.size(), goals.empty() ? 0.0 : 1.0 / goals.size())) {}

  HypothesisBank(std::vector<std::string> goals, std::vector<std::vector<Sequence>> trajectories,
                 std::vector<double> priors)
      : goals_(std::move(goals)), trajectories_(std::move(trajectories)), priors_(std::move(priors)) {
    if (goals_.empty()) throw Error("hypothesis bank needs at least one goal");
    if (trajectories_.size() != goals_.size() || priors_.size() != goals_.size()) {
      throw Error("hypothesis bank: goals, trajectories and priors differ in length");
    }
    for (std::size_t n = 0; n < goals_.size(); ++n) {
      if (trajectories_[n].empty()) throw Error("goal " + goals_[n] + " has no trajectory");
      for (const auto& tr : trajectories_[n]) {
        if (tr.empty()) throw Error("goal " + goals_[n] + " has an empty trajectory");
      }
      if (!(priors_[n] > 0.0)) throw Error("priors must be positive");
    }
    const double sum = std::accumulate(priors_.begin(), priors_.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12) {
      for (double& p : priors_) p /= sum;
    }
  }

  std::size_t size() const { return goals_.size(); }
  const std::vector<std::string>& goals() const { return goals_; }
  const std::vector<Sequence>& trajectories(std::size_t goal) const { return trajectories_[goal]; }
  const std::vector<double>& priors() const { return priors_; }

 private:
  std::vector<std::string> goals_;
  std::vector<std::vector<Sequence>> trajectories_;
  std::vector<double> priors_;
};

inline constexpr double kTieTolerance = 1e-9;

struct Posterior {
  std::vector<double> probabilities;
  std::vector<double> likelihoods;
  std::size_t argmax = 0;
  std::size_t spread = 0;  // goals within kTieTolerance of the maximum

  /// Indices of the goals in the tie set, ascending.
  std::vector<std::size_t> tie_set() const {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < probabilities.size(); ++n) {
      if (probabilities[n] >= probabilities[argmax] - kTieTolerance) out.push_back(n);
    }
    return out;
  }
};

/// Normalizes likelihood * prior. Ties in the argmax go to the lowest index.
Posterior make_posterior(std::vector<double> likelihoods, std::span<const double> priors);

template <typename State>
double likelihood_single(std::span<const Observation<State>> stream,
                         const std::vector<State>& traj) {
  if (stream.empty()) throw EmptyObservation("observation stream is empty");
  double sum = 0.0;
  for (const auto& o : stream) sum += Metric<State>::distance(o.state, state_at(traj, o.t));
  return likelihood_from_mean(sum / static_cast<double>(stream.size()));
}

template <typename State>
double likelihood_multi(std::span<const Observation<State>> stream,
                        const std::vector<std::vector<State>>& bank_entry) {
  if (bank_entry.empty()) throw Error("bank entry has no trajectories");
  double sum = 0.0;
  for (const auto& tr : bank_entry) sum += likelihood_single<State>(stream, tr);
  return sum / static_cast<double>(bank_entry.size());
}

/// Posterior recomputed from scratch over the whole stream.
template <typename State>
Posterior batch_posterior(const HypothesisBank<State>& bank,
                          std::span<const Observation<State>> stream) {
  std::vector<double> lik(bank.size());
  for (std::size_t n = 0; n < bank.size(); ++n) {
    lik[n] = likelihood_multi<State>(stream, bank.trajectories(n));
  }
  return make_posterior(std::move(lik), bank.priors());
}

/// Online recognition over one observation stream. Each update costs
/// O(k * goals) distance evaluations: running distance sums are kept per
/// trajectory, so past observations are never rescanned.
template <typename State>
class Session {
 public:
  explicit Session(const HypothesisBank<State>& bank) : bank_(&bank) {
    sums_.resize(bank.size());
    for (std::size_t n = 0; n < bank.size(); ++n) sums_[n].assign(bank.trajectories(n).size(), 0.0);
  }

  /// Throws OrderingError unless obs.t exceeds every earlier timestamp.
  Posterior update(const Observation<State>& obs) {
    if (count_ > 0 && obs.t <= last_t_) {
      throw OrderingError("timestamp " + std::to_string(obs.t) + " does not follow " +
                          std::to_string(last_t_));
    }
    last_t_ = obs.t;
    ++count_;
    std::vector<double> lik(bank_->size());
    for (std::size_t n = 0; n < bank_->size(); ++n) {
      const auto& trajs = bank_->trajectories(n);
      double acc = 0.0;
      for (std::size_t j = 0; j < trajs.size(); ++j) {
        sums_[n][j] += Metric<State>::distance(obs.state, state_at(trajs[j], obs.t));
        acc += likelihood_from_mean(sums_[n][j] / static_cast<double>(count_));
      }
      lik[n] = acc / static_cast<double>(trajs.size());
    }
    return make_posterior(std::move(lik), bank_->priors());
  }

  std::size_t observations() const { return count_; }
  const HypothesisBank<State>& bank() const { return *bank_; }

 private:
  const HypothesisBank<State>* bank_;
  std::vector<std::vector<double>> sums_;
  std::size_t count_ = 0;
  long last_t_ = 0;
};

/// Folds update over the stream and returns the final argmax label.
template <typename State>
const std::string& recognize(const HypothesisBank<State>& bank,
                             std::span<const Observation<State>> stream) {
  if (stream.empty()) throw EmptyObservation("observation stream is empty");
  Session<State> session(bank);
  Posterior post;
  for (const auto& o : stream) post = session.update(o);
  return bank.goals()[post.argmax];
}

/// Long-format CSV `t,goal,probability`, one row per goal per update.
void write_history_csv(std::ostream& os, const std::vector<std::string>& goals,
                       const std::vector<long>& timestamps,
                       const std::vector<Posterior>& history);

using ContinuousBank = HypothesisBank<TimedState>;
using DiscreteBank = HypothesisBank<GroundState>;

/// Continuous bank entries from synthesized trajectories.
std::vector<TimedState> as_sequence(const quintic::Trajectory& traj);

}  // namespace goalrec::recognizer
