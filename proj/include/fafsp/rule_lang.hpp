#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fafsp {

/// Quantities a priority expression may read for one (job, machine) arc.
enum class Accessor : std::uint8_t {
    Due,      // order due time
    Arrival,  // order arrival time
    Now,      // current clock
    Slack,    // due - now - work_rem
    Wait,     // now - time the job became ready
    Et,       // elapsed or estimated processing time of the job
    NMach,    // number of qualified machines
    OpsRem,   // undispatched jobs of the order, this one included
    WorkRem,  // estimated work of those jobs
    Pt,       // processing time on this machine
    Setup,    // setup from the machine's last job
    Avail,    // time the machine became (or becomes) idle
    Queue,    // ready jobs qualified on this machine
    Util,     // cumulative busy time of the machine
};
inline constexpr std::size_t kAccessorCount = 14;

using AccessorValues = std::array<double, kAccessorCount>;

std::string_view accessor_name(Accessor a);
std::optional<Accessor> accessor_from_name(std::string_view name);

enum class Function : std::uint8_t { Min, Max, Abs, Sqrt, Exp, Log, If };
enum class Comparison : std::uint8_t { Lt, Le, Gt, Ge, Eq, Ne };

struct ExprNode {
    enum class Kind : std::uint8_t { Number, Access, Sum, Product, Negate, Call, Compare };

    Kind kind = Kind::Number;
    double number = 0.0;
    Accessor accessor = Accessor::Due;
    Function function = Function::Min;
    Comparison comparison = Comparison::Lt;
    std::vector<std::uint32_t> children;
    // Sum: true means subtract. Product: true means divide. First entry is false.
    std::vector<bool> inverse;

    bool operator==(const ExprNode&) const = default;
};

/// A parsed, immutable priority expression. Lower values dispatch first.
class Program {
  public:
    Program() = default;

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] const std::vector<ExprNode>& nodes() const { return nodes_; }
    [[nodiscard]] std::uint32_t root() const { return root_; }
    [[nodiscard]] bool empty() const { return nodes_.empty(); }

    /// Evaluates with protected operators: x/0 -> 0, log(x <= 0) -> 0,
    /// sqrt(x < 0) -> 0. The result may still be non-finite on overflow.
    [[nodiscard]] double evaluate(const AccessorValues& values) const;

    bool operator==(const Program&) const = default;

  private:
    friend class Parser;
    [[nodiscard]] double eval(std::uint32_t node, const AccessorValues& values) const;

    std::vector<ExprNode> nodes_;
    std::uint32_t root_ = 0;
};

class ParseError : public std::runtime_error {
  public:
    enum class Kind { Syntax, UnknownAccessor, NodeLimitExceeded };

    ParseError(Kind kind, std::size_t position, std::vector<std::string> expected, const std::string& message);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] std::size_t position() const { return position_; }
    [[nodiscard]] const std::vector<std::string>& expected() const { return expected_; }

  private:
    Kind kind_;
    std::size_t position_;
    std::vector<std::string> expected_;
};

inline constexpr std::size_t kMaxProgramNodes = 512;

/// Grammar:
///   expr    := term (('+'|'-') term)*
///   term    := unary (('*'|'/') unary)*
///   unary   := '-' unary | primary
///   primary := NUMBER | ACCESSOR | CALL | '(' expr ')'
///   CALL    := NAME '(' args ')'   NAME in {min, max, abs, sqrt, exp, log, if}
///   if(cond, then, else), cond := expr CMP expr, CMP in {<, <=, >, >=, ==, !=}
Program parse_rule(std::string_view source);

/// Canonical text; parse_rule(to_source(p)) == p.
std::string to_source(const Program& program);

} // namespace fafsp
