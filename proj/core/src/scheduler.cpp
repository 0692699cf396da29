#include "sg/scheduler.hpp"

#include <algorithm>
#include <stdexcept>

#include "sg/json_fields.hpp"

namespace sg::sched {

void to_json(nlohmann::json& j, const LifecycleEvent& e) {
  j = nlohmann::json{{"time", e.time}, {"job_id", e.job_id}, {"state", to_string(e.state)}};
}

LifecycleEvent decode_lifecycle_event(const nlohmann::json& j) {
  return LifecycleEvent{fields::get_int(j, "time"), fields::get_string(j, "job_id"),
                        parse_job_state(fields::get_string(j, "state"))};
}

BatchScheduler::BatchScheduler(std::int64_t capacity_nodes, Seconds start)
  : capacity_(capacity_nodes), clock_(start) {
  if (capacity_nodes < 1) throw std::invalid_argument("capacity_nodes must be >= 1");
}

void BatchScheduler::submit(const std::string& job_id, std::int64_t nodes, Seconds walltime_s) {
  if (nodes < 1 || nodes > capacity_) throw std::invalid_argument("job does not fit this cluster");
  if (walltime_s < 1) throw std::invalid_argument("walltime must be >= 1");
  if (statuses_.contains(job_id)) throw std::invalid_argument("duplicate job id " + job_id);
  queue_.push_back(QueuedJob{job_id, nodes, walltime_s});
  JobStatus st;
  st.state = JobState::kQueued;
  st.submitted_at = clock_;
  statuses_.emplace(job_id, st);
}

void BatchScheduler::settle_instant(std::vector<LifecycleEvent>& events) {
  // Completions first, in start order, so freed nodes are visible to the queue.
  for (auto it = running_.begin(); it != running_.end();) {
    if (it->end_time <= clock_) {
      JobStatus& st = statuses_.at(it->job_id);
      st.state = JobState::kCompleted;
      st.finished_at = clock_;
      st.exit_code = 0;
      running_nodes_ -= it->nodes;
      events.push_back(LifecycleEvent{clock_, it->job_id, JobState::kCompleted});
      it = running_.erase(it);
    } else {
      ++it;
    }
  }

  while (!queue_.empty() && queue_.front().nodes <= capacity_ - running_nodes_) {
    QueuedJob job = std::move(queue_.front());
    queue_.pop_front();
    JobStatus& st = statuses_.at(job.job_id);
    st.state = JobState::kRunning;
    st.started_at = clock_;
    running_nodes_ += job.nodes;
    events.push_back(LifecycleEvent{clock_, job.job_id, JobState::kRunning});
    running_.push_back(RunningJob{std::move(job.job_id), job.nodes, clock_ + job.walltime_s});
  }

  if (running_nodes_ > capacity_) throw std::logic_error("capacity exceeded");
}

std::vector<LifecycleEvent> BatchScheduler::tick(Seconds dt) {
  if (dt < 0) throw std::invalid_argument("dt must be >= 0");
  std::vector<LifecycleEvent> events;
  settle_instant(events);
  for (Seconds step = 0; step < dt; ++step) {
    ++clock_;
    settle_instant(events);
  }
  return events;
}

std::int64_t BatchScheduler::committed_node_seconds() const {
  std::int64_t total = 0;
  for (const auto& r : running_) total += r.nodes * std::max<Seconds>(0, r.end_time - clock_);
  for (const auto& q : queue_) total += q.nodes * q.walltime_s;
  return total;
}

std::optional<JobStatus> BatchScheduler::status(const std::string& job_id) const {
  auto it = statuses_.find(job_id);
  if (it == statuses_.end()) return std::nullopt;
  return it->second;
}

}  // namespace sg::sched
