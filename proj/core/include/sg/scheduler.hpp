#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sg/domain.hpp"

namespace sg::sched {

/// A start (RUNNING) or finish (COMPLETED) observed during a tick.
struct LifecycleEvent {
  Seconds time{0};
  std::string job_id;
  JobState state{JobState::kRunning};

  friend bool operator==(const LifecycleEvent&, const LifecycleEvent&) = default;
};

void to_json(nlohmann::json& j, const LifecycleEvent& e);
LifecycleEvent decode_lifecycle_event(const nlohmann::json& j);

/// Simulated batch queue: strict FIFO with head-of-line blocking, no backfill,
/// no preemption. Time is a virtual integer clock advanced only by tick().
///
/// Not thread-safe; the owning front-end serializes access.
class BatchScheduler {
public:
  struct RunningJob {
    std::string job_id;
    std::int64_t nodes;
    Seconds end_time;
  };
  struct QueuedJob {
    std::string job_id;
    std::int64_t nodes;
    Seconds walltime_s;
  };

  explicit BatchScheduler(std::int64_t capacity_nodes, Seconds start = 0);

  /// Enqueues at the current clock. Throws std::invalid_argument for a job
  /// that can never fit, a non-positive walltime, or a duplicate id.
  void submit(const std::string& job_id, std::int64_t nodes, Seconds walltime_s);

  /// Settles the current instant, then advances dt unit steps. At each
  /// instant running jobs whose end time has arrived complete, then queued
  /// jobs start in FIFO order while the head fits.
  std::vector<LifecycleEvent> tick(Seconds dt);

  Seconds clock() const noexcept { return clock_; }
  std::int64_t capacity_nodes() const noexcept { return capacity_; }
  std::int64_t running_nodes() const noexcept { return running_nodes_; }

  /// Sum of nodes x remaining time over running jobs plus nodes x walltime
  /// over queued jobs.
  std::int64_t committed_node_seconds() const;

  std::optional<JobStatus> status(const std::string& job_id) const;
  bool knows(const std::string& job_id) const { return statuses_.contains(job_id); }

  const std::vector<RunningJob>& running() const noexcept { return running_; }
  const std::deque<QueuedJob>& queue() const noexcept { return queue_; }

private:
  void settle_instant(std::vector<LifecycleEvent>& events);

  std::int64_t capacity_;
  Seconds clock_;
  std::int64_t running_nodes_{0};
  std::vector<RunningJob> running_;
  std::deque<QueuedJob> queue_;
  std::map<std::string, JobStatus> statuses_;
};

}  // namespace sg::sched
