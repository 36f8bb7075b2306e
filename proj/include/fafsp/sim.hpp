#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "fafsp/model.hpp"
#include "fafsp/schedule.hpp"

namespace fafsp {

enum class JobStatus : std::uint8_t { NotArrived, Ready, Blocked, Running, Done };

/// Contract violations inside the environment: infeasible arcs, advancing
/// while arcs remain, or a deadlock (unfinished jobs with no pending event).
class SimulationError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

class SimState;

/// Read-only state features at the current decision point.
///
/// Per job: status (f1), elapsed/estimated time ET (f2), qualified machine
/// count (f3), order arrival (f4) and due time (f5). Per arc: processing time
/// (f6) and setup from the machine's last job. Per machine: idle-at time (f7),
/// number of ready jobs qualified on it (f8) and cumulative busy time (f9).
/// Order-level remaining operations and work count jobs not yet dispatched.
///
/// A view borrows the state it was computed from and is invalidated by the
/// next apply() or advance().
class FeatureView {
  public:
    [[nodiscard]] double now() const;
    [[nodiscard]] const Instance& instance() const;

    [[nodiscard]] JobStatus status(int job) const;
    [[nodiscard]] double elapsed(int job) const;
    [[nodiscard]] int machine_options(int job) const;
    [[nodiscard]] double arrival(int job) const;
    [[nodiscard]] double due(int job) const;
    [[nodiscard]] double ready_since(int job) const;
    [[nodiscard]] int ops_remaining(int job) const;
    [[nodiscard]] double work_remaining(int job) const;

    [[nodiscard]] double processing(int job, int machine) const;
    [[nodiscard]] double setup(int job, int machine) const;

    [[nodiscard]] double idle_at(int machine) const;
    [[nodiscard]] int queue(int machine) const { return queue_[static_cast<std::size_t>(machine)]; }
    [[nodiscard]] double busy(int machine) const;

  private:
    friend class SimState;
    explicit FeatureView(const SimState& s) : state_(&s) {}

    const SimState* state_;
    std::vector<int> queue_;
};

/// Event-driven environment state. One rollout owns one SimState; copies are
/// independent (the brute-force search branches by copying).
class SimState {
  public:
    /// Clock at 0, orders arriving at 0 released, later arrivals queued.
    explicit SimState(const Instance& inst);

    [[nodiscard]] const Instance& instance() const { return *inst_; }
    [[nodiscard]] double clock() const { return clock_; }
    [[nodiscard]] JobStatus status(int job) const { return status_[idx(job)]; }
    [[nodiscard]] bool machine_idle(int machine) const { return running_[idx(machine)] < 0; }
    [[nodiscard]] std::size_t pending_events() const { return events_.size(); }
    [[nodiscard]] bool finished() const { return done_ == inst_->jobs.size(); }
    [[nodiscard]] const std::vector<int>& ready_jobs() const { return ready_; }

    /// Ready job x idle qualified machine, ordered by (job, machine).
    [[nodiscard]] std::vector<Arc> feasible_arcs() const;
    void feasible_arcs(std::vector<Arc>& out) const;
    [[nodiscard]] bool has_feasible_arc() const;

    [[nodiscard]] FeatureView features() const;

    /// Dispatch: start now, setup from the machine's last job, then processing.
    void apply(Arc arc);
    /// Jump to the next event time and process every event at that time,
    /// completions before arrivals. Requires an exhausted decision epoch.
    void advance();

    /// Arc log so far plus outcomes of completed orders (sorted by order id).
    [[nodiscard]] Schedule schedule() const;
    /// Tardiness of delivered orders, plus max(0, max(clock, running ct) - due)
    /// for undelivered ones. Never decreases along a rollout.
    [[nodiscard]] double tardiness_lower_bound() const;

  private:
    friend class FeatureView;

    struct Event {
        double time;
        int kind;  // 0 = job completion, 1 = order arrival
        int id;
        bool operator>(const Event& o) const {
            if (time != o.time) {
                return time > o.time;
            }
            if (kind != o.kind) {
                return kind > o.kind;
            }
            return id > o.id;
        }
    };

    static std::size_t idx(int i) { return static_cast<std::size_t>(i); }
    void release_order(int order);
    void make_ready(int job);
    void complete_job(int job);
    void refresh_order_work(int order);

    const Instance* inst_;
    double clock_ = 0.0;
    std::size_t done_ = 0;

    std::vector<JobStatus> status_;
    std::vector<double> elapsed_;
    std::vector<double> ready_at_;
    std::vector<int> pending_kit_;
    std::vector<int> ready_;  // sorted job ids with status Ready

    std::vector<int> running_;  // per machine, -1 when idle
    std::vector<double> idle_at_;
    std::vector<double> busy_;
    std::vector<int> last_job_;

    std::vector<int> order_ops_left_;
    std::vector<double> order_work_left_;
    std::vector<int> order_assemblies_left_;
    std::vector<double> order_completion_;  // NaN until delivered

    std::vector<ArcRecord> log_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
};

// Free-function surface mirroring the environment operations.
inline SimState init_sim(const Instance& inst) { return SimState(inst); }
inline std::vector<Arc> feasible_arcs(const SimState& s) { return s.feasible_arcs(); }
inline FeatureView compute_features(const SimState& s) { return s.features(); }
inline void apply_arc(SimState& s, Arc arc) { s.apply(arc); }
inline void advance_clock(SimState& s) { s.advance(); }

} // namespace fafsp
