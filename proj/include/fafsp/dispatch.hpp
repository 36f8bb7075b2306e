#pragma once

#include <cstddef>
#include <stdexcept>

#include "fafsp/model.hpp"
#include "fafsp/rules.hpp"
#include "fafsp/schedule.hpp"

namespace fafsp {

struct DispatchOptions {
    /// Arc applications plus clock advances; 0 means unlimited.
    std::size_t max_steps = 0;
};

class StepBudgetExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Rolls the instance out under `rule`: within each decision epoch the best
/// arc is applied and features are recomputed until no arc is feasible, then
/// the clock advances. Propagates RuleInvalid.
Schedule run_dispatch(const Instance& inst, const RuleSpec& rule, const DispatchOptions& options = {});

} // namespace fafsp
