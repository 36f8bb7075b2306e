#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fafsp/model.hpp"
#include "fafsp/schedule.hpp"

namespace fafsp {

inline constexpr double kScheduleTolerance = 1e-6;

struct Violation {
    enum class Kind {
        MachineOverlap,
        Precedence,
        ArrivalBreach,
        SetupMismatch,
        DeliveryMismatch,
        TardinessMismatch,
        Unassigned,
    };

    Kind kind = Kind::Unassigned;
    int job = -1;
    int order = -1;
    int machine = -1;
    double measured = 0.0;
    double required = 0.0;
    std::string detail;

    /// Constraint family the violation instantiates, e.g. "kit precedence".
    [[nodiscard]] std::string_view family() const;
};

std::string_view to_string(Violation::Kind kind);
std::string to_string(const Violation& v);

/// Checks a realized schedule against the model constraints without using
/// the simulator: single assignment to a qualified machine, per-machine
/// sequencing with setups from the true predecessor, kit precedence, arrival,
/// delivery time and tardiness bookkeeping. Empty result means feasible.
std::vector<Violation> validate_schedule(const Instance& inst, const Schedule& sched,
                                         double tolerance = kScheduleTolerance);

struct BruteForceLimits {
    std::size_t max_jobs = 8;
    std::size_t max_machines = 4;
};

class LimitsExceeded : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct BruteForceResult {
    double tardiness = 0.0;
    Schedule schedule;
    std::size_t leaves = 0;  // complete schedules reached
};

/// Minimum total tardiness over all non-delay schedules, found by depth-first
/// enumeration of arc decisions through the simulator with bound pruning.
/// Ties keep the lexicographically first arc sequence.
BruteForceResult brute_force_optimum(const Instance& inst, const BruteForceLimits& limits = {});

} // namespace fafsp
