#include "fafsp/rules.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "fafsp/dispatch.hpp"
#include "fafsp/generator.hpp"
#include "fafsp/text.hpp"

namespace fafsp {

namespace {

enum class JobKey { Due, Arrival, NegOps, Work, NegWork };
enum class MachineKey { Spt, Eet };

struct BuiltinInfo {
    BuiltinRule id;
    std::string_view name;
    JobKey job;
    MachineKey machine;
    std::string_view source;
};

constexpr std::array<BuiltinInfo, 9> kInfo = {{
    {BuiltinRule::Edd, "EDD", JobKey::Due, MachineKey::Eet, "due*1000000 + max(avail, now) + setup + pt"},
    {BuiltinRule::FifoSpt, "FIFO+SPT", JobKey::Arrival, MachineKey::Spt, "arrival*1000000 + pt"},
    {BuiltinRule::FifoEet, "FIFO+EET", JobKey::Arrival, MachineKey::Eet,
     "arrival*1000000 + max(avail, now) + setup + pt"},
    {BuiltinRule::MopnrSpt, "MOPNR+SPT", JobKey::NegOps, MachineKey::Spt, "-ops_rem*1000000 + pt"},
    {BuiltinRule::MopnrEet, "MOPNR+EET", JobKey::NegOps, MachineKey::Eet,
     "-ops_rem*1000000 + max(avail, now) + setup + pt"},
    {BuiltinRule::LwkrSpt, "LWKR+SPT", JobKey::Work, MachineKey::Spt, "work_rem*1000000 + pt"},
    {BuiltinRule::LwkrEet, "LWKR+EET", JobKey::Work, MachineKey::Eet,
     "work_rem*1000000 + max(avail, now) + setup + pt"},
    {BuiltinRule::MwkrSpt, "MWKR+SPT", JobKey::NegWork, MachineKey::Spt, "-work_rem*1000000 + pt"},
    {BuiltinRule::MwkrEet, "MWKR+EET", JobKey::NegWork, MachineKey::Eet,
     "-work_rem*1000000 + max(avail, now) + setup + pt"},
}};

const BuiltinInfo& info(BuiltinRule id) { return kInfo[static_cast<std::size_t>(id)]; }

Priority builtin_priority(const BuiltinInfo& b, const FeatureView& fv, Arc arc) {
    Priority p;
    switch (b.job) {
    case JobKey::Due: p.primary = fv.due(arc.job); break;
    case JobKey::Arrival: p.primary = fv.arrival(arc.job); break;
    case JobKey::NegOps: p.primary = -static_cast<double>(fv.ops_remaining(arc.job)); break;
    case JobKey::Work: p.primary = fv.work_remaining(arc.job); break;
    case JobKey::NegWork: p.primary = -fv.work_remaining(arc.job); break;
    }
    const double pt = fv.processing(arc.job, arc.machine);
    if (b.machine == MachineKey::Spt) {
        p.secondary = pt;
    } else {
        p.secondary = std::max(fv.idle_at(arc.machine), fv.now()) + fv.setup(arc.job, arc.machine) + pt;
    }
    return p;
}

std::string_view strip_prefix(std::string_view line, std::string_view prefix) {
    return trim(line.substr(prefix.size()));
}

} // namespace

std::string_view builtin_name(BuiltinRule id) { return info(id).name; }

std::optional<BuiltinRule> builtin_from_name(std::string_view name) {
    for (const auto& b : kInfo) {
        if (b.name == name) {
            return b.id;
        }
    }
    return std::nullopt;
}

std::string builtin_source(BuiltinRule id) { return std::string(info(id).source); }

RuleSpec RuleSpec::builtin(BuiltinRule id) {
    RuleSpec r;
    r.builtin_ = id;
    r.source_ = builtin_source(id);
    return r;
}

RuleSpec RuleSpec::expression(std::string source) {
    RuleSpec r;
    r.program_ = parse_rule(source);
    r.source_ = std::move(source);
    return r;
}

std::string RuleSpec::name() const {
    if (builtin_) {
        return std::string(builtin_name(*builtin_));
    }
    return to_source(program_);
}

RuleInvalid::RuleInvalid(const std::string& what, Arc arc, double clock)
    : std::runtime_error(what + " at arc (job " + std::to_string(arc.job) + ", machine " +
                         std::to_string(arc.machine) + "), t=" + format_number(clock)),
      arc_(arc),
      clock_(clock) {}

AccessorValues arc_accessors(const FeatureView& fv, Arc arc) {
    AccessorValues v{};
    const double now = fv.now();
    const double due = fv.due(arc.job);
    const double work = fv.work_remaining(arc.job);
    auto set = [&v](Accessor a, double x) { v[static_cast<std::size_t>(a)] = x; };
    set(Accessor::Due, due);
    set(Accessor::Arrival, fv.arrival(arc.job));
    set(Accessor::Now, now);
    set(Accessor::Slack, due - now - work);
    set(Accessor::Wait, now - fv.ready_since(arc.job));
    set(Accessor::Et, fv.elapsed(arc.job));
    set(Accessor::NMach, fv.machine_options(arc.job));
    set(Accessor::OpsRem, fv.ops_remaining(arc.job));
    set(Accessor::WorkRem, work);
    set(Accessor::Pt, fv.processing(arc.job, arc.machine));
    set(Accessor::Setup, fv.setup(arc.job, arc.machine));
    set(Accessor::Avail, fv.idle_at(arc.machine));
    set(Accessor::Queue, fv.queue(arc.machine));
    set(Accessor::Util, fv.busy(arc.machine));
    return v;
}

Priority eval_priority(const RuleSpec& rule, const FeatureView& fv, Arc arc) {
    if (rule.is_builtin()) {
        return builtin_priority(info(rule.builtin_id()), fv, arc);
    }
    const double score = rule.program().evaluate(arc_accessors(fv, arc));
    if (!std::isfinite(score)) {
        throw RuleInvalid("non-finite priority", arc, fv.now());
    }
    return {score, 0.0};
}

Arc rank_arcs(const RuleSpec& rule, const FeatureView& fv, std::span<const Arc> arcs) {
    if (arcs.empty()) {
        throw std::invalid_argument("rank_arcs: no feasible arc");
    }
    Arc best = arcs[0];
    Priority best_p = eval_priority(rule, fv, best);
    for (std::size_t i = 1; i < arcs.size(); ++i) {
        const Priority p = eval_priority(rule, fv, arcs[i]);
        if (p < best_p || (p == best_p && arcs[i] < best)) {
            best = arcs[i];
            best_p = p;
        }
    }
    return best;
}

const std::vector<Instance>& smoke_instances() {
    static const std::vector<Instance> instances = [] {
        std::vector<Instance> out;
        for (std::uint64_t seed : {11u, 12u, 13u}) {
            ScenarioConfig cfg;
            cfg.dynamic_orders = 8;
            cfg.initial_orders = 3;
            cfg.load_factor = 2.0;
            cfg.seed = seed;
            out.push_back(generate_instance(cfg));
        }
        return out;
    }();
    return instances;
}

bool validate_rule(const RuleSpec& rule) {
    try {
        for (const auto& inst : smoke_instances()) {
            DispatchOptions opt;
            opt.max_steps = 4 * (inst.jobs.size() + inst.orders.size()) + 16;
            run_dispatch(inst, rule, opt);
        }
    } catch (const RuleInvalid&) {
        return false;
    } catch (const StepBudgetExceeded&) {
        return false;
    }
    return true;
}

bool validate_rule(std::string_view source) {
    try {
        return validate_rule(RuleSpec::expression(std::string(source)));
    } catch (const ParseError&) {
        return false;
    }
}

RuleFile parse_rule_file(const std::string& text) {
    RuleFile file;
    std::string expr;
    for (auto raw : split(text, '\n')) {
        const auto line = trim(raw);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            const auto body = trim(line.substr(1));
            if (body.starts_with("name:")) {
                file.name = std::string(strip_prefix(body, "name:"));
            } else if (body.starts_with("description:")) {
                file.description = std::string(strip_prefix(body, "description:"));
            } else if (body.starts_with("fitness:")) {
                file.fitness = parse_number(strip_prefix(body, "fitness:"));
            }
            continue;
        }
        if (!expr.empty()) {
            expr += ' ';
        }
        expr += line;
    }
    if (expr.empty()) {
        throw std::invalid_argument("rule file has no expression");
    }
    file.source = std::move(expr);
    return file;
}

std::string format_rule_file(const RuleFile& file) {
    auto one_line = [](std::string s) {
        std::replace(s.begin(), s.end(), '\n', ' ');
        return s;
    };
    std::string out = "# name: " + one_line(file.name) + '\n';
    out += "# description: " + one_line(file.description) + '\n';
    if (file.fitness) {
        out += "# fitness: " + format_number(*file.fitness) + '\n';
    }
    out += one_line(file.source) + '\n';
    return out;
}

RuleSpec load_rule(const std::string& name_or_path) {
    if (auto id = builtin_from_name(name_or_path)) {
        return RuleSpec::builtin(*id);
    }
    if (!std::filesystem::exists(name_or_path)) {
        throw std::invalid_argument("unknown rule '" + name_or_path + "' (not a builtin name or a file)");
    }
    return RuleSpec::expression(parse_rule_file(read_file(name_or_path)).source);
}

} // namespace fafsp
