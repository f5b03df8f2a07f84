#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fedsel/random.hpp"

namespace fedsel::spectrum {

struct SpectrumTask {
  int id = 0;
  double length_bits = 0.0;
  double spectral_efficiency = 0.0;  // bits/s/Hz
  double arrival_s = 0.0;
  double max_delay_s = 0.0;          // QoS bound
};

/// l / (x * beta * eta). Throws std::domain_error for blocks < 1.
double task_delay(double length_bits, int blocks, double block_bandwidth_hz, double spectral_efficiency);

/// Smallest block count meeting the task's delay bound, at least 1. Not
/// capped by the system size; callers compare against total_blocks.
int min_blocks_for_qos(const SpectrumTask& task, double block_bandwidth_hz);

struct SpectrumConfig {
  double total_bandwidth_hz = 3.6e6;   // W_0
  double block_bandwidth_hz = 180e3;   // beta
  double max_wait_s = 1.0;             // tasks waiting longer are dropped
  double drop_penalty_delay_s = 1.0;   // delay charged to a dropped task

  int total_blocks() const;
  void validate() const;
};

struct StepOutcome {
  double delay_s = 0.0;  // wait + transmission
  double wait_s = 0.0;
  int granted_blocks = 0;
  bool qos_violated = false;
  bool dropped = false;
};

/// Resource-block pool with exclusive holding. Tasks are served in the order
/// they are stepped; a task that must wait for blocks moves the clock to the
/// grant instant, so later tasks queue behind it.
class SpectrumEnv {
 public:
  explicit SpectrumEnv(SpectrumConfig config);

  const SpectrumConfig& config() const { return config_; }
  int total_blocks() const { return total_blocks_; }
  int free_blocks() const { return total_blocks_ - held_blocks_; }
  int held_blocks() const { return held_blocks_; }
  double clock() const { return clock_s_; }

  /// Moves the clock forward to t (never backwards), releasing blocks whose
  /// transmissions have ended.
  void advance_to(double t);

  /// Occupies `blocks` until `release_s`; used to set up scenarios.
  void hold(int blocks, double release_s);

  /// Serves one task with the requested number of blocks. Grants
  /// min(request, free); with nothing free the task waits for the next
  /// release. Throws std::domain_error for a request < 1.
  StepOutcome step(const SpectrumTask& task, int action_blocks);

 private:
  struct Hold {
    int blocks;
    double release_s;
  };

  SpectrumConfig config_;
  int total_blocks_;
  int held_blocks_ = 0;
  double clock_s_ = 0.0;
  std::vector<Hold> holds_;
};

// ---------------------------------------------------------------------------
// Workloads

enum class ArrivalProcess { Poisson, Periodic };

struct WorkloadConfig {
  ArrivalProcess arrivals = ArrivalProcess::Poisson;
  double arrival_rate_hz = 40.0;
  int tasks_per_episode = 200;
  double length_min_bits = 0.5e5;
  double length_max_bits = 2.0e5;
  double eta_min = 1.0;
  double eta_max = 5.0;
  double max_delay_s = 0.1;

  void validate() const;
};

std::vector<SpectrumTask> generate_workload(const WorkloadConfig& config, Rng& rng);

// ---------------------------------------------------------------------------
// Allocators

/// Chooses a block request for the task about to be served.
using Allocator = std::function<int(const SpectrumEnv&, const SpectrumTask&)>;

enum class BaselineKind { MinQos, EqualShare, GreedyMax };

std::string_view to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(std::string_view name);

/// Fixed-rule allocators. With every block busy the task will be served at the
/// next release, so the rules then size against the whole pool.
int baseline_policy(BaselineKind kind, const SpectrumEnv& env, const SpectrumTask& task,
                    int expected_concurrency = 4);
Allocator make_baseline(BaselineKind kind, int expected_concurrency = 4);

// ---------------------------------------------------------------------------
// Tabular Q-learning

/// Uniform buckets over (eta, free blocks, task length).
struct StateDiscretizer {
  int eta_buckets = 4;
  double eta_min = 1.0;
  double eta_max = 5.0;
  int free_buckets = 5;
  int length_buckets = 4;
  double length_min_bits = 0.5e5;
  double length_max_bits = 2.0e5;

  std::size_t state_count() const;
  std::size_t state(const SpectrumEnv& env, const SpectrumTask& task) const;

  static StateDiscretizer for_workload(const WorkloadConfig& workload);
};

struct QHyperParams {
  double learning_rate = 0.1;
  double discount = 0.9;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int episodes = 200;
  double reward_cap = 1000.0;         // 1 / (1 ms)
  double violation_penalty = 100.0;

  void validate() const;
};

/// Action-value table; action index a stands for a + 1 blocks.
class QPolicy {
 public:
  QPolicy(std::size_t states, int actions);

  std::size_t state_count() const { return states_; }
  int action_count() const { return actions_; }

  double value(std::size_t s, int a) const { return table_[s * static_cast<std::size_t>(actions_) + a]; }
  double& value(std::size_t s, int a) { return table_[s * static_cast<std::size_t>(actions_) + a]; }

  double max_value(std::size_t s) const;
  /// Highest-valued action; ties go to the smaller block count.
  int greedy_action(std::size_t s) const;

  std::span<const double> table() const { return table_; }

 private:
  std::size_t states_;
  int actions_;
  std::vector<double> table_;
};

/// One-step temporal-difference update. A missing next state marks the end of
/// an episode and contributes no bootstrap term.
void q_update(QPolicy& policy, std::size_t s, int a, double reward, std::optional<std::size_t> next_state,
              double learning_rate, double discount);

/// clip(1 / delay, 0, cap) minus the penalty on a QoS violation.
double step_reward(const StepOutcome& outcome, const QHyperParams& hp);

struct EpisodeStats {
  int episode = 0;
  double mean_delay_s = 0.0;
  double violation_rate = 0.0;
};

struct TrainedAgent {
  QPolicy policy;
  StateDiscretizer discretizer;
  std::vector<EpisodeStats> learning_curve;
};

/// Epsilon-greedy training over hp.episodes fresh episodes, epsilon decayed
/// linearly from epsilon_start to epsilon_end. Deterministic given the rng.
TrainedAgent train_agent(const SpectrumConfig& env_config, const WorkloadConfig& workload, const QHyperParams& hp,
                         Rng& rng, std::optional<StateDiscretizer> discretizer = std::nullopt);

/// Exploration-free allocator backed by the trained table.
Allocator make_agent_allocator(const TrainedAgent& agent);

struct EvalResult {
  double mean_delay_s = 0.0;
  double violation_rate = 0.0;
  int tasks = 0;
};

/// Serves the tasks in order on a fresh environment.
EvalResult run_episode(const Allocator& allocator, const SpectrumConfig& env_config,
                       std::span<const SpectrumTask> tasks);

/// Averages over `episodes` freshly generated workloads.
EvalResult evaluate_policy(const Allocator& allocator, const SpectrumConfig& env_config,
                           const WorkloadConfig& workload, Rng& rng, int episodes = 10);

}  // namespace fedsel::spectrum
