#include "fafsp/dispatch.hpp"

#include <string>
#include <vector>

#include "fafsp/sim.hpp"

namespace fafsp {

Schedule run_dispatch(const Instance& inst, const RuleSpec& rule, const DispatchOptions& options) {
    SimState state(inst);
    std::vector<Arc> arcs;
    std::size_t steps = 0;
    while (!state.finished()) {
        if (options.max_steps != 0 && ++steps > options.max_steps) {
            throw StepBudgetExceeded("dispatch exceeded " + std::to_string(options.max_steps) + " steps");
        }
        state.feasible_arcs(arcs);
        if (arcs.empty()) {
            state.advance();
            continue;
        }
        state.apply(rank_arcs(rule, state.features(), arcs));
    }
    return state.schedule();
}

} // namespace fafsp
