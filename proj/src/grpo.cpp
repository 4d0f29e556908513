// SPDX-License-Identifier: Apache-2.0
#include "sake/grpo.hpp"

#include <algorithm>
#include <cmath>

namespace sake {

void RolloutGroup::validate() const {
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& m = members[k];
    if (m.trajectory.query != query) {
      throw GrpoError("member " + std::to_string(k) +
                      " belongs to a different query");
    }
    if (auto problem = check_mask(m.trajectory)) {
      throw GrpoError("member " + std::to_string(k) + ": " + *problem);
    }
    const auto n = m.trajectory.token_count();
    for (const auto* lp :
         {&m.logprobs_current, &m.logprobs_old, &m.logprobs_ref}) {
      if (lp->size() != n) {
        throw GrpoError("member " + std::to_string(k) + ": " +
                        std::to_string(lp->size()) + " log-probs for " +
                        std::to_string(n) + " tokens");
      }
    }
  }
}

void GrpoConfig::validate() const {
  if (!(clip_epsilon > 0.0)) throw GrpoError("clip_epsilon must be > 0");
  if (!(kl_beta >= 0.0)) throw GrpoError("kl_beta must be >= 0");
  if (!(advantage_std_floor > 0.0)) {
    throw GrpoError("advantage_std_floor must be > 0");
  }
}

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double floor) {
  if (rewards.size() < 2) {
    throw GrpoError("a group needs at least two rollouts for a baseline");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  const double denom = std::max(sd, floor);
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back((r - mean) / denom);
  return out;
}

double clipped_term(double ratio, double advantage, double clip_epsilon) {
  if (advantage == 0.0) return 0.0;
  const double clipped =
      std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double k3_kl(double logprob_current, double logprob_ref) {
  const double d = logprob_ref - logprob_current;
  return std::exp(d) - d - 1.0;
}

ObjectiveResult clipped_objective(const RolloutGroup& group,
                                  const GrpoConfig& config) {
  std::vector<double> rewards;
  rewards.reserve(group.members.size());
  for (const auto& m : group.members) rewards.push_back(m.reward);
  const auto adv = group_advantages(rewards, config.advantage_std_floor);
  return clipped_objective(group, adv, config);
}

ObjectiveResult clipped_objective(const RolloutGroup& group,
                                  std::span<const double> advantages,
                                  const GrpoConfig& config) {
  config.validate();
  group.validate();
  if (advantages.size() != group.members.size()) {
    throw GrpoError("one advantage per member required");
  }

  ObjectiveResult res;
  res.advantages.assign(advantages.begin(), advantages.end());
  res.per_token_terms.resize(group.members.size());

  double term_sum = 0.0;
  double kl_sum = 0.0;
  double seq_term_sum = 0.0;
  double seq_kl_sum = 0.0;
  double seq_kl_total = 0.0;
  std::size_t seq_count = 0;

  for (std::size_t k = 0; k < group.members.size(); ++k) {
    const auto& m = group.members[k];
    const auto& mask = m.trajectory.mask;
    const double a = advantages[k];
    auto& terms = res.per_token_terms[k];
    double member_terms = 0.0;
    double member_kl = 0.0;
    double member_delta = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i] == 0) continue;
      const double cur = m.logprobs_current[i];
      const double old = m.logprobs_old[i];
      const double ref = m.logprobs_ref[i];
      if (!std::isfinite(cur) || !std::isfinite(old) || !std::isfinite(ref)) {
        throw GrpoError("non-finite log-probability in member " +
                        std::to_string(k) + " at token " + std::to_string(i));
      }
      const double term = clipped_term(std::exp(cur - old), a,
                                       config.clip_epsilon);
      const double kl = k3_kl(cur, ref);
      terms.push_back(term);
      member_terms += term;
      member_kl += kl;
      member_delta += ref - cur;
    }
    term_sum += member_terms;
    kl_sum += member_kl;
    res.token_count += terms.size();
    if (!terms.empty()) {
      const double n = static_cast<double>(terms.size());
      seq_term_sum += member_terms / n;
      seq_kl_sum += member_kl / n;
      seq_kl_total += std::exp(member_delta) - member_delta - 1.0;
      ++seq_count;
    }
  }

  double mean_term = 0.0;
  double token_kl = 0.0;
  if (config.aggregation == LossAggregation::token_mean) {
    if (res.token_count > 0) {
      mean_term = term_sum / static_cast<double>(res.token_count);
      token_kl = kl_sum / static_cast<double>(res.token_count);
    }
  } else if (seq_count > 0) {
    mean_term = seq_term_sum / static_cast<double>(seq_count);
    token_kl = seq_kl_sum / static_cast<double>(seq_count);
  }
  res.kl_value = config.kl_mode == KlMode::per_token
                     ? token_kl
                     : (seq_count > 0
                            ? seq_kl_total / static_cast<double>(seq_count)
                            : 0.0);
  res.policy_loss = -mean_term;
  res.loss = res.policy_loss + config.kl_beta * res.kl_value;
  return res;
}

}  // namespace sake
