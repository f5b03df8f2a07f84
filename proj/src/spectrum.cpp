#include "fedsel/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fedsel::spectrum {

double task_delay(double length_bits, int blocks, double block_bandwidth_hz, double spectral_efficiency) {
  if (blocks < 1) throw std::domain_error("task_delay: at least one resource block is required");
  return length_bits / (static_cast<double>(blocks) * block_bandwidth_hz * spectral_efficiency);
}

int min_blocks_for_qos(const SpectrumTask& task, double block_bandwidth_hz) {
  const double need = task.length_bits / (task.max_delay_s * block_bandwidth_hz * task.spectral_efficiency);
  auto blocks = static_cast<int>(std::ceil(need));
  // ceil() of a value that is an integer up to rounding can land one above or
  // below; settle on the exact boundary with the delay formula itself.
  while (blocks > 1 && task_delay(task.length_bits, blocks - 1, block_bandwidth_hz, task.spectral_efficiency) <=
                           task.max_delay_s) {
    --blocks;
  }
  while (task_delay(task.length_bits, std::max(blocks, 1), block_bandwidth_hz, task.spectral_efficiency) >
         task.max_delay_s) {
    ++blocks;
  }
  return std::max(blocks, 1);
}

int SpectrumConfig::total_blocks() const {
  return static_cast<int>(std::floor(total_bandwidth_hz / block_bandwidth_hz + 1e-9));
}

void SpectrumConfig::validate() const {
  if (!(block_bandwidth_hz > 0.0)) throw std::invalid_argument("spectrum: block_bandwidth_hz must be positive");
  if (total_blocks() < 1) throw std::invalid_argument("spectrum: total bandwidth holds no resource block");
  if (max_wait_s < 0.0) throw std::invalid_argument("spectrum: max_wait_s must be >= 0");
  if (drop_penalty_delay_s < 0.0) throw std::invalid_argument("spectrum: drop_penalty_delay_s must be >= 0");
}

SpectrumEnv::SpectrumEnv(SpectrumConfig config) : config_(config), total_blocks_(config.total_blocks()) {
  config_.validate();
}

void SpectrumEnv::advance_to(double t) {
  clock_s_ = std::max(clock_s_, t);
  std::erase_if(holds_, [&](const Hold& h) {
    if (h.release_s <= clock_s_) {
      held_blocks_ -= h.blocks;
      return true;
    }
    return false;
  });
}

void SpectrumEnv::hold(int blocks, double release_s) {
  if (blocks < 1 || blocks > free_blocks()) throw std::invalid_argument("hold: block count out of range");
  if (release_s <= clock_s_) return;
  holds_.push_back({blocks, release_s});
  held_blocks_ += blocks;
}

StepOutcome SpectrumEnv::step(const SpectrumTask& task, int action_blocks) {
  if (action_blocks < 1) throw std::domain_error("env step: action must request at least one block");
  advance_to(task.arrival_s);

  StepOutcome out;
  while (free_blocks() == 0) {
    double earliest = std::numeric_limits<double>::infinity();
    for (const auto& h : holds_) earliest = std::min(earliest, h.release_s);
    if (earliest - task.arrival_s > config_.max_wait_s) {
      out.dropped = true;
      out.qos_violated = true;
      out.delay_s = config_.drop_penalty_delay_s;
      return out;
    }
    advance_to(earliest);
  }

  out.wait_s = clock_s_ - task.arrival_s;
  out.granted_blocks = std::min(action_blocks, free_blocks());
  const double tx = task_delay(task.length_bits, out.granted_blocks, config_.block_bandwidth_hz,
                               task.spectral_efficiency);
  out.delay_s = out.wait_s + tx;
  out.qos_violated = out.delay_s > task.max_delay_s;
  if (tx > 0.0) {
    holds_.push_back({out.granted_blocks, clock_s_ + tx});
    held_blocks_ += out.granted_blocks;
  }
  return out;
}

void WorkloadConfig::validate() const {
  if (!(arrival_rate_hz > 0.0)) throw std::invalid_argument("workload: arrival_rate_hz must be positive");
  if (tasks_per_episode < 1) throw std::invalid_argument("workload: tasks_per_episode must be >= 1");
  if (!(length_min_bits > 0.0) || length_max_bits < length_min_bits) {
    throw std::invalid_argument("workload: need 0 < length_min_bits <= length_max_bits");
  }
  if (!(eta_min > 0.0) || eta_max < eta_min) throw std::invalid_argument("workload: need 0 < eta_min <= eta_max");
  if (!(max_delay_s > 0.0)) throw std::invalid_argument("workload: max_delay_s must be positive");
}

std::vector<SpectrumTask> generate_workload(const WorkloadConfig& config, Rng& rng) {
  config.validate();
  std::vector<SpectrumTask> tasks;
  tasks.reserve(static_cast<std::size_t>(config.tasks_per_episode));
  double t = 0.0;
  for (int i = 0; i < config.tasks_per_episode; ++i) {
    t += config.arrivals == ArrivalProcess::Poisson ? rng.exponential(config.arrival_rate_hz)
                                                    : 1.0 / config.arrival_rate_hz;
    SpectrumTask task;
    task.id = i;
    task.arrival_s = t;
    task.length_bits = rng.uniform(config.length_min_bits, config.length_max_bits);
    task.spectral_efficiency = rng.uniform(config.eta_min, config.eta_max);
    task.max_delay_s = config.max_delay_s;
    tasks.push_back(task);
  }
  return tasks;
}

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::MinQos:
      return "min_qos";
    case BaselineKind::EqualShare:
      return "equal_share";
    case BaselineKind::GreedyMax:
      return "greedy_max";
  }
  return "?";
}

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "min_qos") return BaselineKind::MinQos;
  if (name == "equal_share") return BaselineKind::EqualShare;
  if (name == "greedy_max") return BaselineKind::GreedyMax;
  throw std::invalid_argument("unknown baseline policy: " + std::string(name));
}

int baseline_policy(BaselineKind kind, const SpectrumEnv& env, const SpectrumTask& task, int expected_concurrency) {
  const int free = env.free_blocks() > 0 ? env.free_blocks() : env.total_blocks();
  switch (kind) {
    case BaselineKind::MinQos:
      return std::min(min_blocks_for_qos(task, env.config().block_bandwidth_hz), free);
    case BaselineKind::EqualShare:
      return std::max(1, free / std::max(1, expected_concurrency));
    case BaselineKind::GreedyMax:
      return free;
  }
  return 1;
}

Allocator make_baseline(BaselineKind kind, int expected_concurrency) {
  return [kind, expected_concurrency](const SpectrumEnv& env, const SpectrumTask& task) {
    return baseline_policy(kind, env, task, expected_concurrency);
  };
}

namespace {

int bucket(double v, double lo, double hi, int n) {
  if (n <= 1 || !(hi > lo)) return 0;
  const auto b = static_cast<int>(std::floor((v - lo) / (hi - lo) * n));
  return std::clamp(b, 0, n - 1);
}

}  // namespace

std::size_t StateDiscretizer::state_count() const {
  return static_cast<std::size_t>(eta_buckets) * free_buckets * length_buckets;
}

std::size_t StateDiscretizer::state(const SpectrumEnv& env, const SpectrumTask& task) const {
  const int e = bucket(task.spectral_efficiency, eta_min, eta_max, eta_buckets);
  // Free-block share; a full pool lands in the top bucket.
  const int f = bucket(static_cast<double>(env.free_blocks()), 0.0, static_cast<double>(env.total_blocks()),
                       free_buckets);
  const int l = bucket(task.length_bits, length_min_bits, length_max_bits, length_buckets);
  return (static_cast<std::size_t>(e) * free_buckets + f) * length_buckets + l;
}

StateDiscretizer StateDiscretizer::for_workload(const WorkloadConfig& workload) {
  StateDiscretizer d;
  d.eta_min = workload.eta_min;
  d.eta_max = workload.eta_max;
  d.length_min_bits = workload.length_min_bits;
  d.length_max_bits = workload.length_max_bits;
  return d;
}

void QHyperParams::validate() const {
  if (learning_rate < 0.0 || learning_rate > 1.0) throw std::invalid_argument("q-learning: learning_rate not in [0,1]");
  if (discount < 0.0 || discount >= 1.0) throw std::invalid_argument("q-learning: discount not in [0,1)");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 || epsilon_end > 1.0) {
    throw std::invalid_argument("q-learning: epsilon not in [0,1]");
  }
  if (episodes < 1) throw std::invalid_argument("q-learning: episodes must be >= 1");
  if (!(reward_cap > 0.0)) throw std::invalid_argument("q-learning: reward_cap must be positive");
  if (violation_penalty < 0.0) throw std::invalid_argument("q-learning: violation_penalty must be >= 0");
}

QPolicy::QPolicy(std::size_t states, int actions)
    : states_(states), actions_(actions), table_(states * static_cast<std::size_t>(actions), 0.0) {
  if (states == 0 || actions < 1) throw std::invalid_argument("QPolicy: empty table");
}

double QPolicy::max_value(std::size_t s) const { return value(s, greedy_action(s)); }

int QPolicy::greedy_action(std::size_t s) const {
  int best = 0;
  for (int a = 1; a < actions_; ++a) {
    if (value(s, a) > value(s, best)) best = a;
  }
  return best;
}

void q_update(QPolicy& policy, std::size_t s, int a, double reward, std::optional<std::size_t> next_state,
              double learning_rate, double discount) {
  const double bootstrap = next_state ? discount * policy.max_value(*next_state) : 0.0;
  double& q = policy.value(s, a);
  q += learning_rate * (reward + bootstrap - q);
}

double step_reward(const StepOutcome& outcome, const QHyperParams& hp) {
  const double speed = outcome.delay_s > 0.0 ? std::min(1.0 / outcome.delay_s, hp.reward_cap) : hp.reward_cap;
  return speed - (outcome.qos_violated ? hp.violation_penalty : 0.0);
}

TrainedAgent train_agent(const SpectrumConfig& env_config, const WorkloadConfig& workload, const QHyperParams& hp,
                         Rng& rng, std::optional<StateDiscretizer> discretizer) {
  env_config.validate();
  workload.validate();
  hp.validate();
  const auto disc = discretizer.value_or(StateDiscretizer::for_workload(workload));
  TrainedAgent agent{QPolicy(disc.state_count(), env_config.total_blocks()), disc, {}};
  auto& q = agent.policy;

  for (int ep = 0; ep < hp.episodes; ++ep) {
    const double progress = hp.episodes > 1 ? static_cast<double>(ep) / (hp.episodes - 1) : 1.0;
    const double epsilon = hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * progress;
    const auto tasks = generate_workload(workload, rng);
    SpectrumEnv env(env_config);

    std::optional<std::size_t> prev_state;
    int prev_action = 0;
    double prev_reward = 0.0;
    double delay_sum = 0.0;
    int violations = 0;

    for (const auto& task : tasks) {
      env.advance_to(task.arrival_s);
      const auto s = disc.state(env, task);
      if (prev_state) q_update(q, *prev_state, prev_action, prev_reward, s, hp.learning_rate, hp.discount);

      const int a = rng.bernoulli(epsilon) ? static_cast<int>(rng.index(static_cast<std::size_t>(q.action_count())))
                                           : q.greedy_action(s);
      const auto outcome = env.step(task, a + 1);
      delay_sum += outcome.delay_s;
      violations += outcome.qos_violated ? 1 : 0;

      prev_state = s;
      prev_action = a;
      prev_reward = step_reward(outcome, hp);
    }
    if (prev_state) q_update(q, *prev_state, prev_action, prev_reward, std::nullopt, hp.learning_rate, hp.discount);

    const auto n = static_cast<double>(tasks.size());
    agent.learning_curve.push_back({ep, delay_sum / n, violations / n});
  }
  return agent;
}

Allocator make_agent_allocator(const TrainedAgent& agent) {
  return [&policy = agent.policy, disc = agent.discretizer](const SpectrumEnv& env, const SpectrumTask& task) {
    return policy.greedy_action(disc.state(env, task)) + 1;
  };
}

EvalResult run_episode(const Allocator& allocator, const SpectrumConfig& env_config,
                       std::span<const SpectrumTask> tasks) {
  SpectrumEnv env(env_config);
  EvalResult r;
  double delay_sum = 0.0;
  int violations = 0;
  for (const auto& task : tasks) {
    env.advance_to(task.arrival_s);
    const auto outcome = env.step(task, allocator(env, task));
    delay_sum += outcome.delay_s;
    violations += outcome.qos_violated ? 1 : 0;
  }
  r.tasks = static_cast<int>(tasks.size());
  if (r.tasks > 0) {
    r.mean_delay_s = delay_sum / r.tasks;
    r.violation_rate = static_cast<double>(violations) / r.tasks;
  }
  return r;
}

EvalResult evaluate_policy(const Allocator& allocator, const SpectrumConfig& env_config,
                           const WorkloadConfig& workload, Rng& rng, int episodes) {
  if (episodes < 1) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
  double delay_sum = 0.0;
  double violation_sum = 0.0;
  int tasks = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    const auto workload_tasks = generate_workload(workload, rng);
    const auto r = run_episode(allocator, env_config, workload_tasks);
    delay_sum += r.mean_delay_s * r.tasks;
    violation_sum += r.violation_rate * r.tasks;
    tasks += r.tasks;
  }
  return {delay_sum / tasks, violation_sum / tasks, tasks};
}

}  // namespace fedsel::spectrum
