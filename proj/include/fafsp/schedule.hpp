#pragma once

#include <string>
#include <vector>

namespace fafsp {

struct Arc {
    int job = -1;
    int machine = -1;

    auto operator<=>(const Arc&) const = default;
};

/// One dispatch decision as realized: setup is charged from `start`, so
/// completion = start + setup + processing time.
struct ArcRecord {
    int job = -1;
    int machine = -1;
    double setup = 0.0;
    double start = 0.0;
    double completion = 0.0;

    bool operator==(const ArcRecord&) const = default;
};

struct OrderOutcome {
    int order = -1;
    double completion = 0.0;  // ft
    double tardiness = 0.0;   // tt

    bool operator==(const OrderOutcome&) const = default;
};

/// Realized schedule: chronological arc log plus per-order outcomes.
struct Schedule {
    std::vector<ArcRecord> arcs;
    std::vector<OrderOutcome> orders;  // indexed by order id once complete

    bool operator==(const Schedule&) const = default;
};

/// Sum of order tardiness. Throws std::logic_error if any order outcome is
/// missing (order ids must cover 0..expected_orders-1).
double total_tardiness(const Schedule& sched, std::size_t expected_orders);
double total_tardiness(const Schedule& sched);

/// Delimited-text export: an arc section (job,machine,setup,start,completion)
/// and an order section (order,completion,tardiness). Numbers use shortest
/// round-trip formatting so reading back is exact.
std::string format_schedule(const Schedule& sched);
Schedule parse_schedule(const std::string& text);

} // namespace fafsp
