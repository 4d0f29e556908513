// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sake/rollout.hpp"

namespace sake {

struct GroupMember {
  Trajectory trajectory;
  double reward = 0.0;
  // Per-token log-probabilities aligned with the trajectory's tokens. Values
  // at mask-0 positions are never read.
  std::vector<double> logprobs_current;
  std::vector<double> logprobs_old;
  std::vector<double> logprobs_ref;
};

// Rollouts of one query; advantages are normalized within the group.
struct RolloutGroup {
  std::string query;
  std::vector<GroupMember> members;

  // Throws GrpoError when members disagree on the query or a log-prob array
  // is not aligned with its trajectory.
  void validate() const;
};

enum class LossAggregation {
  token_mean,     // mean over every mask-1 token in the group
  sequence_mean,  // mean over members of each member's token mean
};

enum class KlMode {
  per_token,     // k3 on each token's log-ratio, aggregated like the loss
  per_sequence,  // k3 on each member's summed log-ratio, averaged over members
};

struct GrpoConfig {
  double clip_epsilon = 0.2;
  double kl_beta = 0.001;
  double advantage_std_floor = 1e-6;
  LossAggregation aggregation = LossAggregation::token_mean;
  KlMode kl_mode = KlMode::per_token;

  void validate() const;
};

class GrpoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// (r_k - mean) / max(std, floor), population standard deviation. Throws
// GrpoError for fewer than two rewards.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double floor);

// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A); exactly 0 when A == 0.
double clipped_term(double ratio, double advantage, double clip_epsilon);

// k3 estimator exp(d) - d - 1 with d = logprob_ref - logprob_current.
double k3_kl(double logprob_current, double logprob_ref);

struct ObjectiveResult {
  double loss = 0.0;         // policy_loss + beta * kl_value
  double policy_loss = 0.0;  // -aggregate(term)
  double kl_value = 0.0;
  std::vector<double> advantages;
  // Per member, one term per mask-1 token in token order.
  std::vector<std::vector<double>> per_token_terms;
  std::size_t token_count = 0;  // mask-1 tokens across the group
};

// Advantages from the members' rewards.
ObjectiveResult clipped_objective(const RolloutGroup& group,
                                  const GrpoConfig& config);

// Caller-supplied advantages, one per member.
ObjectiveResult clipped_objective(const RolloutGroup& group,
                                  std::span<const double> advantages,
                                  const GrpoConfig& config);

}  // namespace sake
