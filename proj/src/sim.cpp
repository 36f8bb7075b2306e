#include "fafsp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fafsp {

namespace {
constexpr double kUndelivered = std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------- FeatureView

double FeatureView::now() const { return state_->clock_; }
const Instance& FeatureView::instance() const { return *state_->inst_; }
JobStatus FeatureView::status(int job) const { return state_->status_[SimState::idx(job)]; }
double FeatureView::elapsed(int job) const { return state_->elapsed_[SimState::idx(job)]; }
int FeatureView::machine_options(int job) const {
    return static_cast<int>(state_->inst_->job(job).eligible.size());
}
double FeatureView::arrival(int job) const {
    return state_->inst_->order(state_->inst_->job(job).order_id).arrival;
}
double FeatureView::due(int job) const { return state_->inst_->order(state_->inst_->job(job).order_id).due; }
double FeatureView::ready_since(int job) const { return state_->ready_at_[SimState::idx(job)]; }
int FeatureView::ops_remaining(int job) const {
    return state_->order_ops_left_[SimState::idx(state_->inst_->job(job).order_id)];
}
double FeatureView::work_remaining(int job) const {
    return state_->order_work_left_[SimState::idx(state_->inst_->job(job).order_id)];
}
double FeatureView::processing(int job, int machine) const { return state_->inst_->job(job).time_on(machine); }
double FeatureView::setup(int job, int machine) const {
    return state_->inst_->setup(state_->last_job_[SimState::idx(machine)], job);
}
double FeatureView::idle_at(int machine) const { return state_->idle_at_[SimState::idx(machine)]; }
double FeatureView::busy(int machine) const { return state_->busy_[SimState::idx(machine)]; }

// ------------------------------------------------------------------- SimState

SimState::SimState(const Instance& inst) : inst_(&inst) {
    const std::size_t n_jobs = inst.jobs.size();
    const std::size_t n_machines = inst.machines.size();
    const std::size_t n_orders = inst.orders.size();
    if (n_orders == 0 || n_machines == 0 || inst.setup.size() != n_jobs) {
        throw SimulationError("invalid instance: empty or inconsistent dimensions");
    }
    for (const auto& j : inst.jobs) {
        if (j.eligible.empty() || j.order_id < 0 || static_cast<std::size_t>(j.order_id) >= n_orders) {
            throw SimulationError("invalid instance: job " + std::to_string(j.id) + " is unlinked or unqualified");
        }
    }

    status_.assign(n_jobs, JobStatus::NotArrived);
    elapsed_.resize(n_jobs);
    for (std::size_t j = 0; j < n_jobs; ++j) {
        elapsed_[j] = inst.jobs[j].mean_time();
    }
    ready_at_.assign(n_jobs, 0.0);
    pending_kit_.assign(n_jobs, 0);
    running_.assign(n_machines, -1);
    idle_at_.assign(n_machines, 0.0);
    busy_.assign(n_machines, 0.0);
    last_job_.assign(n_machines, -1);
    order_ops_left_.assign(n_orders, 0);
    order_work_left_.assign(n_orders, 0.0);
    order_assemblies_left_.assign(n_orders, 0);
    order_completion_.assign(n_orders, kUndelivered);
    log_.reserve(n_jobs);

    for (const auto& o : inst.orders) {
        const auto i = idx(o.id);
        order_assemblies_left_[i] = static_cast<int>(o.products.size());
        for (const auto& p : o.products) {
            order_ops_left_[i] += static_cast<int>(p.processing_jobs.size()) + 1;
        }
        refresh_order_work(o.id);
        if (o.arrival <= 0.0) {
            release_order(o.id);
        } else {
            events_.push({o.arrival, 1, o.id});
        }
    }
}

void SimState::refresh_order_work(int order) {
    double work = 0.0;
    for (const auto& p : inst_->order(order).products) {
        for (int j : p.processing_jobs) {
            const auto s = status_[idx(j)];
            if (s != JobStatus::Running && s != JobStatus::Done) {
                work += elapsed_[idx(j)];
            }
        }
        const auto s = status_[idx(p.assembly_job)];
        if (s != JobStatus::Running && s != JobStatus::Done) {
            work += elapsed_[idx(p.assembly_job)];
        }
    }
    order_work_left_[idx(order)] = work;
}

void SimState::make_ready(int job) {
    status_[idx(job)] = JobStatus::Ready;
    ready_at_[idx(job)] = clock_;
    ready_.insert(std::lower_bound(ready_.begin(), ready_.end(), job), job);
}

void SimState::release_order(int order) {
    for (const auto& p : inst_->order(order).products) {
        for (int j : p.processing_jobs) {
            make_ready(j);
        }
        status_[idx(p.assembly_job)] = JobStatus::Blocked;
        pending_kit_[idx(p.assembly_job)] = static_cast<int>(p.processing_jobs.size());
    }
}

void SimState::complete_job(int job) {
    const Job& j = inst_->job(job);
    status_[idx(job)] = JobStatus::Done;
    ++done_;
    for (std::size_t m = 0; m < running_.size(); ++m) {
        if (running_[m] == job) {
            running_[m] = -1;
        }
    }
    if (j.kind == JobKind::Processing) {
        const auto& product = inst_->order(j.order_id).products;
        for (const auto& p : product) {
            if (p.id == j.product_id && --pending_kit_[idx(p.assembly_job)] == 0) {
                make_ready(p.assembly_job);
            }
        }
        return;
    }
    if (--order_assemblies_left_[idx(j.order_id)] == 0) {
        order_completion_[idx(j.order_id)] = clock_;
    }
}

void SimState::feasible_arcs(std::vector<Arc>& out) const {
    out.clear();
    for (int j : ready_) {
        for (const auto& e : inst_->job(j).eligible) {
            if (running_[idx(e.machine)] < 0) {
                out.push_back({j, e.machine});
            }
        }
    }
}

std::vector<Arc> SimState::feasible_arcs() const {
    std::vector<Arc> out;
    feasible_arcs(out);
    return out;
}

bool SimState::has_feasible_arc() const {
    for (int j : ready_) {
        for (const auto& e : inst_->job(j).eligible) {
            if (running_[idx(e.machine)] < 0) {
                return true;
            }
        }
    }
    return false;
}

FeatureView SimState::features() const {
    FeatureView fv(*this);
    fv.queue_.assign(running_.size(), 0);
    for (int j : ready_) {
        for (const auto& e : inst_->job(j).eligible) {
            ++fv.queue_[idx(e.machine)];
        }
    }
    return fv;
}

void SimState::apply(Arc arc) {
    if (arc.job < 0 || idx(arc.job) >= status_.size() || arc.machine < 0 || idx(arc.machine) >= running_.size()) {
        throw SimulationError("infeasible arc: ids out of range");
    }
    const Job& j = inst_->job(arc.job);
    const double pt = j.time_on(arc.machine);
    if (status_[idx(arc.job)] != JobStatus::Ready || pt < 0.0 || running_[idx(arc.machine)] >= 0) {
        throw SimulationError("infeasible arc (job " + std::to_string(arc.job) + ", machine " +
                              std::to_string(arc.machine) + ")");
    }
    const double setup = inst_->setup(last_job_[idx(arc.machine)], arc.job);
    const double completion = clock_ + setup + pt;

    status_[idx(arc.job)] = JobStatus::Running;
    ready_.erase(std::lower_bound(ready_.begin(), ready_.end(), arc.job));
    elapsed_[idx(arc.job)] = pt;
    running_[idx(arc.machine)] = arc.job;
    idle_at_[idx(arc.machine)] = completion;
    busy_[idx(arc.machine)] += setup + pt;
    last_job_[idx(arc.machine)] = arc.job;
    --order_ops_left_[idx(j.order_id)];
    refresh_order_work(j.order_id);

    log_.push_back({arc.job, arc.machine, setup, clock_, completion});
    events_.push({completion, 0, arc.job});
}

void SimState::advance() {
    if (has_feasible_arc()) {
        throw SimulationError("advance with feasible arcs remaining at t=" + std::to_string(clock_));
    }
    if (events_.empty()) {
        if (finished()) {
            throw SimulationError("advance after the last job completed");
        }
        throw SimulationError("deadlock: " + std::to_string(inst_->jobs.size() - done_) +
                              " unfinished jobs and no pending event");
    }
    const double t = events_.top().time;
    clock_ = t;
    while (!events_.empty() && events_.top().time == t) {
        const Event ev = events_.top();
        events_.pop();
        if (ev.kind == 0) {
            complete_job(ev.id);
        } else {
            release_order(ev.id);
        }
    }
}

Schedule SimState::schedule() const {
    Schedule s;
    s.arcs = log_;
    for (std::size_t i = 0; i < order_completion_.size(); ++i) {
        const double ft = order_completion_[i];
        if (!std::isnan(ft)) {
            s.orders.push_back({static_cast<int>(i), ft, std::max(0.0, ft - inst_->orders[i].due)});
        }
    }
    return s;
}

double SimState::tardiness_lower_bound() const {
    std::vector<double> bound(order_completion_.size(), clock_);
    for (std::size_t m = 0; m < running_.size(); ++m) {
        if (running_[m] >= 0) {
            auto& b = bound[idx(inst_->job(running_[m]).order_id)];
            b = std::max(b, idle_at_[m]);
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < bound.size(); ++i) {
        const double ft = std::isnan(order_completion_[i]) ? std::max(bound[i], inst_->orders[i].arrival)
                                                           : order_completion_[i];
        total += std::max(0.0, ft - inst_->orders[i].due);
    }
    return total;
}

} // namespace fafsp
