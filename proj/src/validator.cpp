#include "fafsp/validator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fafsp/sim.hpp"
#include "fafsp/text.hpp"

namespace fafsp {

std::string_view Violation::family() const {
    switch (kind) {
    case Kind::Unassigned: return "assignment";
    case Kind::MachineOverlap: return "machine sequencing";
    case Kind::SetupMismatch: return "setup accounting";
    case Kind::Precedence: return "kit precedence";
    case Kind::DeliveryMismatch: return "order delivery";
    case Kind::ArrivalBreach: return "arrival restriction";
    case Kind::TardinessMismatch: return "tardiness definition";
    }
    return "unknown";
}

std::string_view to_string(Violation::Kind kind) {
    switch (kind) {
    case Violation::Kind::MachineOverlap: return "MachineOverlap";
    case Violation::Kind::Precedence: return "Precedence";
    case Violation::Kind::ArrivalBreach: return "ArrivalBreach";
    case Violation::Kind::SetupMismatch: return "SetupMismatch";
    case Violation::Kind::DeliveryMismatch: return "DeliveryMismatch";
    case Violation::Kind::TardinessMismatch: return "TardinessMismatch";
    case Violation::Kind::Unassigned: return "Unassigned";
    }
    return "?";
}

std::string to_string(const Violation& v) {
    std::string out(to_string(v.kind));
    out += " [";
    out += v.family();
    out += ']';
    if (v.job >= 0) {
        out += " job " + std::to_string(v.job);
    }
    if (v.machine >= 0) {
        out += " machine " + std::to_string(v.machine);
    }
    if (v.order >= 0) {
        out += " order " + std::to_string(v.order);
    }
    out += ": measured " + format_number(v.measured) + ", required " + format_number(v.required);
    if (!v.detail.empty()) {
        out += " (" + v.detail + ")";
    }
    return out;
}

std::vector<Violation> validate_schedule(const Instance& inst, const Schedule& sched, double tol) {
    std::vector<Violation> out;
    auto report = [&out](Violation::Kind kind, int job, int order, int machine, double measured, double required,
                         std::string detail) {
        out.push_back({kind, job, order, machine, measured, required, std::move(detail)});
    };

    const std::size_t n_jobs = inst.jobs.size();
    std::vector<const ArcRecord*> record(n_jobs, nullptr);
    std::map<int, std::vector<const ArcRecord*>> by_machine;

    for (const auto& a : sched.arcs) {
        if (a.job < 0 || static_cast<std::size_t>(a.job) >= n_jobs) {
            report(Violation::Kind::Unassigned, a.job, -1, a.machine, 0, 0, "unknown job id");
            continue;
        }
        if (record[static_cast<std::size_t>(a.job)] != nullptr) {
            report(Violation::Kind::Unassigned, a.job, -1, a.machine, 2, 1, "job assigned more than once");
            continue;
        }
        const double pt = inst.job(a.job).time_on(a.machine);
        if (pt < 0.0) {
            report(Violation::Kind::Unassigned, a.job, -1, a.machine, 0, 1, "machine not qualified for job");
            continue;
        }
        record[static_cast<std::size_t>(a.job)] = &a;
        by_machine[a.machine].push_back(&a);
        if (std::fabs(a.completion - (a.start + a.setup + pt)) > tol) {
            report(Violation::Kind::SetupMismatch, a.job, -1, a.machine, a.completion, a.start + a.setup + pt,
                   "completion != start + setup + processing");
        }
    }
    for (std::size_t j = 0; j < n_jobs; ++j) {
        if (record[j] == nullptr) {
            report(Violation::Kind::Unassigned, static_cast<int>(j), inst.jobs[j].order_id, -1, 0, 1,
                   "job never dispatched");
        }
    }

    for (auto& [machine, seq] : by_machine) {
        std::stable_sort(seq.begin(), seq.end(), [](const ArcRecord* a, const ArcRecord* b) {
            return a->start != b->start ? a->start < b->start : a->completion < b->completion;
        });
        int prev_job = -1;
        double prev_end = 0.0;
        for (const ArcRecord* a : seq) {
            if (prev_job >= 0 && a->start < prev_end - tol) {
                report(Violation::Kind::MachineOverlap, a->job, -1, machine, a->start, prev_end,
                       "starts before job " + std::to_string(prev_job) + " completes");
            }
            const double expected = prev_job < 0 ? 0.0 : inst.setup(prev_job, a->job);
            if (std::fabs(a->setup - expected) > tol) {
                report(Violation::Kind::SetupMismatch, a->job, -1, machine, a->setup, expected,
                       prev_job < 0 ? "first job on machine" : "after job " + std::to_string(prev_job));
            }
            prev_job = a->job;
            prev_end = a->completion;
        }
    }

    std::vector<const OrderOutcome*> outcome(inst.orders.size(), nullptr);
    for (const auto& o : sched.orders) {
        if (o.order < 0 || static_cast<std::size_t>(o.order) >= inst.orders.size()) {
            report(Violation::Kind::DeliveryMismatch, -1, o.order, -1, o.completion, 0, "unknown order id");
        } else if (outcome[static_cast<std::size_t>(o.order)] != nullptr) {
            report(Violation::Kind::DeliveryMismatch, -1, o.order, -1, o.completion, 0, "duplicate order outcome");
        } else {
            outcome[static_cast<std::size_t>(o.order)] = &o;
        }
    }

    for (const auto& order : inst.orders) {
        double delivery = -std::numeric_limits<double>::infinity();
        bool complete = true;
        for (const auto& product : order.products) {
            double kit_done = -std::numeric_limits<double>::infinity();
            for (int j : product.processing_jobs) {
                const ArcRecord* r = record[static_cast<std::size_t>(j)];
                if (r == nullptr) {
                    complete = false;
                    continue;
                }
                kit_done = std::max(kit_done, r->completion);
                if (r->start < order.arrival - tol) {
                    report(Violation::Kind::ArrivalBreach, j, order.id, r->machine, r->start, order.arrival, "");
                }
            }
            const ArcRecord* asm_rec = record[static_cast<std::size_t>(product.assembly_job)];
            if (asm_rec == nullptr) {
                complete = false;
                continue;
            }
            if (asm_rec->start < order.arrival - tol) {
                report(Violation::Kind::ArrivalBreach, product.assembly_job, order.id, asm_rec->machine,
                       asm_rec->start, order.arrival, "");
            }
            if (!product.processing_jobs.empty() && asm_rec->start < kit_done - tol) {
                report(Violation::Kind::Precedence, product.assembly_job, order.id, asm_rec->machine, asm_rec->start,
                       kit_done, "assembly starts before its kit completes");
            }
            delivery = std::max(delivery, asm_rec->completion);
        }

        const OrderOutcome* o = outcome[static_cast<std::size_t>(order.id)];
        if (o == nullptr) {
            if (complete) {
                report(Violation::Kind::DeliveryMismatch, -1, order.id, -1, 0, delivery, "missing order outcome");
            }
            continue;
        }
        if (!complete) {
            report(Violation::Kind::DeliveryMismatch, -1, order.id, -1, o->completion, 0,
                   "outcome reported for an order with undispatched jobs");
            continue;
        }
        if (std::fabs(o->completion - delivery) > tol) {
            report(Violation::Kind::DeliveryMismatch, -1, order.id, -1, o->completion, delivery,
                   "delivery != last assembly completion");
        }
        const double tardiness = std::max(0.0, delivery - order.due);
        if (std::fabs(o->tardiness - tardiness) > tol) {
            report(Violation::Kind::TardinessMismatch, -1, order.id, -1, o->tardiness, tardiness, "");
        }
    }
    return out;
}

// ----------------------------------------------------------- exhaustive search

namespace {

struct Search {
    BruteForceResult best;
    bool found = false;

    void visit(const SimState& s, Arc last_in_epoch) {
        if (found && s.tardiness_lower_bound() >= best.tardiness) {
            return;
        }
        if (s.finished()) {
            ++best.leaves;
            const Schedule sched = s.schedule();
            const double t = total_tardiness(sched, s.instance().orders.size());
            if (!found || t < best.tardiness) {
                best.tardiness = t;
                best.schedule = sched;
                found = true;
            }
            return;
        }
        std::vector<Arc> feasible = s.feasible_arcs();
        if (feasible.empty()) {
            SimState next = s;
            next.advance();
            visit(next, Arc{});
            return;
        }
        // Arcs applied in one epoch commute, so only increasing sequences are
        // explored. If only smaller arcs remain, another branch covers this set.
        for (const Arc& a : feasible) {
            if (last_in_epoch.job >= 0 && !(last_in_epoch < a)) {
                continue;
            }
            SimState next = s;
            next.apply(a);
            visit(next, a);
        }
    }
};

} // namespace

BruteForceResult brute_force_optimum(const Instance& inst, const BruteForceLimits& limits) {
    if (inst.jobs.size() > limits.max_jobs || inst.machines.size() > limits.max_machines) {
        throw LimitsExceeded("brute force limited to " + std::to_string(limits.max_jobs) + " jobs and " +
                             std::to_string(limits.max_machines) + " machines; instance has " +
                             std::to_string(inst.jobs.size()) + " jobs and " + std::to_string(inst.machines.size()) +
                             " machines");
    }
    Search search;
    search.visit(SimState(inst), Arc{});
    return std::move(search.best);
}

} // namespace fafsp
