#pragma once

#include <array>
#include <compare>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fafsp/model.hpp"
#include "fafsp/rule_lang.hpp"
#include "fafsp/schedule.hpp"
#include "fafsp/sim.hpp"

namespace fafsp {

enum class BuiltinRule {
    Edd,
    FifoSpt,
    FifoEet,
    MopnrSpt,
    MopnrEet,
    LwkrSpt,
    LwkrEet,
    MwkrSpt,
    MwkrEet,
};

inline constexpr std::array<BuiltinRule, 9> kBuiltinRules = {
    BuiltinRule::Edd,     BuiltinRule::FifoSpt, BuiltinRule::FifoEet, BuiltinRule::MopnrSpt, BuiltinRule::MopnrEet,
    BuiltinRule::LwkrSpt, BuiltinRule::LwkrEet, BuiltinRule::MwkrSpt, BuiltinRule::MwkrEet,
};

/// "EDD", "FIFO+SPT", ... "MWKR+EET".
std::string_view builtin_name(BuiltinRule id);
std::optional<BuiltinRule> builtin_from_name(std::string_view name);

/// Scalar expression that reproduces the builtin's decisions:
/// job score * 1e6 + machine score. Exact while job scores of competing arcs
/// differ by more than (machine score spread) / 1e6.
std::string builtin_source(BuiltinRule id);

/// Either a builtin rule or a parsed expression.
class RuleSpec {
  public:
    static RuleSpec builtin(BuiltinRule id);
    /// Throws ParseError.
    static RuleSpec expression(std::string source);

    [[nodiscard]] bool is_builtin() const { return builtin_.has_value(); }
    [[nodiscard]] BuiltinRule builtin_id() const { return *builtin_; }
    [[nodiscard]] const std::string& source() const { return source_; }
    [[nodiscard]] const Program& program() const { return program_; }
    /// Builtin name, or the canonical expression text.
    [[nodiscard]] std::string name() const;

  private:
    std::optional<BuiltinRule> builtin_;
    std::string source_;
    Program program_;
};

/// Builtins compare (job score, machine score); expressions fill `primary`
/// and leave `secondary` at 0. Lower dispatches first.
struct Priority {
    double primary = 0.0;
    double secondary = 0.0;

    auto operator<=>(const Priority&) const = default;
};

class RuleInvalid : public std::runtime_error {
  public:
    RuleInvalid(const std::string& what, Arc arc, double clock);

    [[nodiscard]] Arc arc() const { return arc_; }
    [[nodiscard]] double clock() const { return clock_; }

  private:
    Arc arc_;
    double clock_;
};

/// Accessor values the expression language sees for one arc.
AccessorValues arc_accessors(const FeatureView& fv, Arc arc);

/// Throws RuleInvalid when the score is not finite.
Priority eval_priority(const RuleSpec& rule, const FeatureView& fv, Arc arc);

/// argmin over (priority, job, machine). Requires a non-empty list.
Arc rank_arcs(const RuleSpec& rule, const FeatureView& fv, std::span<const Arc> arcs);

/// Three fixed small instances used to vet candidate rules.
const std::vector<Instance>& smoke_instances();

/// True iff the rule dispatches every smoke instance to completion without
/// RuleInvalid and within the step budget.
bool validate_rule(const RuleSpec& rule);
bool validate_rule(std::string_view source);

/// Rule file: `# name:`, `# description:`, `# fitness:` headers, then one
/// expression (may span lines).
struct RuleFile {
    std::string name;
    std::string description;
    std::optional<double> fitness;
    std::string source;
};

RuleFile parse_rule_file(const std::string& text);
std::string format_rule_file(const RuleFile& file);

/// Builtin name or a path to a rule file.
RuleSpec load_rule(const std::string& name_or_path);

} // namespace fafsp
