#include "goalrec/recognizer.hpp"

#include <cstdio>
#include <ostream>

namespace goalrec::recognizer {

double euclid_continuous(const TimedState& a, const TimedState& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double euclid_discrete(const GroundState& a, const GroundState& b) {
  std::size_t diff = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++diff;
      ++i;
    } else if (*j < *i) {
      ++diff;
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  diff += static_cast<std::size_t>(a.end() - i) + static_cast<std::size_t>(b.end() - j);
  return std::sqrt(static_cast<double>(diff));
}

double likelihood_from_mean(double mean_distance) {
  if (mean_distance <= 0.0) return 1.0;
  return -std::expm1(-1.0 / mean_distance);
}

Posterior make_posterior(std::vector<double> likelihoods, std::span<const double> priors) {
  Posterior post;
  post.probabilities.resize(likelihoods.size());
  double z = 0.0;
  for (std::size_t n = 0; n < likelihoods.size(); ++n) {
    post.probabilities[n] = likelihoods[n] * priors[n];
    z += post.probabilities[n];
  }
  if (z > 0.0) {
    for (double& p : post.probabilities) p /= z;
  } else {
    // Only reachable with infinite distances everywhere.
    for (double& p : post.probabilities) p = 1.0 / static_cast<double>(likelihoods.size());
  }
  post.likelihoods = std::move(likelihoods);
  for (std::size_t n = 1; n < post.probabilities.size(); ++n) {
    if (post.probabilities[n] > post.probabilities[post.argmax]) post.argmax = n;
  }
  post.spread = post.tie_set().size();
  return post;
}

void write_history_csv(std::ostream& os, const std::vector<std::string>& goals,
                       const std::vector<long>& timestamps,
                       const std::vector<Posterior>& history) {
  os << "t,goal,probability\n";
  char buf[64];
  for (std::size_t i = 0; i < history.size(); ++i) {
    for (std::size_t n = 0; n < goals.size(); ++n) {
      std::snprintf(buf, sizeof buf, "%.17g", history[i].probabilities[n]);
      os << timestamps[i] << ',' << goals[n] << ',' << buf << '\n';
    }
  }
}

std::vector<TimedState> as_sequence(const quintic::Trajectory& traj) { return traj.samples; }

}  // namespace goalrec::recognizer
