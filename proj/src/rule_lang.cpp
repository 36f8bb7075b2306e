#include "fafsp/rule_lang.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "fafsp/text.hpp"

namespace fafsp {

namespace {

constexpr std::array<std::string_view, kAccessorCount> kAccessorNames = {
    "due", "arrival", "now", "slack", "wait", "et", "n_mach",
    "ops_rem", "work_rem", "pt", "setup", "avail", "queue", "util"};

struct FunctionInfo {
    std::string_view name;
    Function function;
    std::size_t min_args;
    std::size_t max_args;
};

constexpr std::array<FunctionInfo, 7> kFunctions = {{
    {"min", Function::Min, 2, kMaxProgramNodes},
    {"max", Function::Max, 2, kMaxProgramNodes},
    {"abs", Function::Abs, 1, 1},
    {"sqrt", Function::Sqrt, 1, 1},
    {"exp", Function::Exp, 1, 1},
    {"log", Function::Log, 1, 1},
    {"if", Function::If, 3, 3},
}};

constexpr std::array<std::string_view, 6> kComparisonText = {"<", "<=", ">", ">=", "==", "!="};

const FunctionInfo* find_function(std::string_view name) {
    for (const auto& f : kFunctions) {
        if (f.name == name) {
            return &f;
        }
    }
    return nullptr;
}

std::string_view function_name(Function f) {
    for (const auto& info : kFunctions) {
        if (info.function == f) {
            return info.name;
        }
    }
    return "?";
}

struct Token {
    enum class Type { Number, Name, LParen, RParen, Comma, Plus, Minus, Star, Slash, Compare, End };
    Type type = Type::End;
    std::size_t pos = 0;
    std::string_view text;
    double number = 0.0;
    Comparison comparison = Comparison::Lt;
};

const std::vector<std::string> kOperandStart = {"number", "accessor", "function call", "'('", "'-'"};

} // namespace

std::string_view accessor_name(Accessor a) { return kAccessorNames[static_cast<std::size_t>(a)]; }

std::optional<Accessor> accessor_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kAccessorNames.size(); ++i) {
        if (kAccessorNames[i] == name) {
            return static_cast<Accessor>(i);
        }
    }
    return std::nullopt;
}

ParseError::ParseError(Kind kind, std::size_t position, std::vector<std::string> expected, const std::string& message)
    : std::runtime_error("at position " + std::to_string(position) + ": " + message),
      kind_(kind),
      position_(position),
      expected_(std::move(expected)) {}

// ---------------------------------------------------------------------- Parser

class Parser {
  public:
    explicit Parser(std::string_view src) : src_(src) { advance(); }

    Program run() {
        const auto root = parse_expr();
        if (tok_.type != Token::Type::End) {
            syntax({"operator", "end of input"}, "unexpected '" + std::string(tok_.text) + "'");
        }
        program_.root_ = root;
        return std::move(program_);
    }

  private:
    [[noreturn]] void syntax(std::vector<std::string> expected, const std::string& msg) const {
        throw ParseError(ParseError::Kind::Syntax, tok_.pos, std::move(expected), msg);
    }

    std::uint32_t add(ExprNode node) {
        if (program_.nodes_.size() >= kMaxProgramNodes) {
            throw ParseError(ParseError::Kind::NodeLimitExceeded, tok_.pos, {},
                             "expression exceeds " + std::to_string(kMaxProgramNodes) + " nodes");
        }
        program_.nodes_.push_back(std::move(node));
        return static_cast<std::uint32_t>(program_.nodes_.size() - 1);
    }

    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
        }
        tok_ = Token{};
        tok_.pos = pos_;
        if (pos_ >= src_.size()) {
            tok_.type = Token::Type::End;
            return;
        }
        const char c = src_[pos_];
        auto single = [&](Token::Type t) {
            tok_.type = t;
            tok_.text = src_.substr(pos_, 1);
            ++pos_;
        };
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            scan_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
                ++end;
            }
            tok_.type = Token::Type::Name;
            tok_.text = src_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        switch (c) {
        case '(': return single(Token::Type::LParen);
        case ')': return single(Token::Type::RParen);
        case ',': return single(Token::Type::Comma);
        case '+': return single(Token::Type::Plus);
        case '-': return single(Token::Type::Minus);
        case '*': return single(Token::Type::Star);
        case '/': return single(Token::Type::Slash);
        default: break;
        }
        const std::string_view two = src_.substr(pos_, 2);
        for (std::size_t i = 0; i < kComparisonText.size(); ++i) {
            if (kComparisonText[i].size() == 2 && two == kComparisonText[i]) {
                tok_.type = Token::Type::Compare;
                tok_.comparison = static_cast<Comparison>(i);
                tok_.text = two;
                pos_ += 2;
                return;
            }
        }
        if (c == '<' || c == '>') {
            tok_.type = Token::Type::Compare;
            tok_.comparison = c == '<' ? Comparison::Lt : Comparison::Gt;
            tok_.text = src_.substr(pos_, 1);
            ++pos_;
            return;
        }
        tok_.text = src_.substr(pos_, 1);
        syntax({}, "unexpected character '" + std::string(tok_.text) + "'");
    }

    void scan_number() {
        std::size_t end = pos_;
        std::size_t digits = 0;
        auto eat_digits = [&] {
            while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
                ++end;
                ++digits;
            }
        };
        eat_digits();
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            eat_digits();
        }
        if (digits == 0) {
            tok_.text = src_.substr(pos_, 1);
            syntax({"number"}, "malformed number");
        }
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t exp_end = end + 1;
            if (exp_end < src_.size() && (src_[exp_end] == '+' || src_[exp_end] == '-')) {
                ++exp_end;
            }
            const std::size_t exp_digits_start = exp_end;
            while (exp_end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp_end]))) {
                ++exp_end;
            }
            if (exp_end == exp_digits_start) {
                tok_.pos = exp_end;
                syntax({"exponent digits"}, "malformed exponent");
            }
            end = exp_end;
        }
        tok_.type = Token::Type::Number;
        tok_.text = src_.substr(pos_, end - pos_);
        auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + end, tok_.number);
        if (ec != std::errc() || ptr != src_.data() + end || !std::isfinite(tok_.number)) {
            syntax({"finite number"}, "number out of range: " + std::string(tok_.text));
        }
        pos_ = end;
    }

    void expect(Token::Type type, const char* what) {
        if (tok_.type != type) {
            syntax({what}, std::string("expected ") + what);
        }
        advance();
    }

    std::uint32_t parse_expr() {
        ExprNode sum;
        sum.kind = ExprNode::Kind::Sum;
        sum.children.push_back(parse_term());
        sum.inverse.push_back(false);
        while (tok_.type == Token::Type::Plus || tok_.type == Token::Type::Minus) {
            const bool minus = tok_.type == Token::Type::Minus;
            advance();
            sum.children.push_back(parse_term());
            sum.inverse.push_back(minus);
        }
        if (sum.children.size() == 1) {
            return sum.children.front();
        }
        return add(std::move(sum));
    }

    std::uint32_t parse_term() {
        ExprNode product;
        product.kind = ExprNode::Kind::Product;
        product.children.push_back(parse_unary());
        product.inverse.push_back(false);
        while (tok_.type == Token::Type::Star || tok_.type == Token::Type::Slash) {
            const bool divide = tok_.type == Token::Type::Slash;
            advance();
            product.children.push_back(parse_unary());
            product.inverse.push_back(divide);
        }
        if (product.children.size() == 1) {
            return product.children.front();
        }
        return add(std::move(product));
    }

    std::uint32_t parse_unary() {
        if (tok_.type == Token::Type::Minus) {
            advance();
            ExprNode neg;
            neg.kind = ExprNode::Kind::Negate;
            neg.children.push_back(parse_unary());
            return add(std::move(neg));
        }
        return parse_primary();
    }

    std::uint32_t parse_primary() {
        switch (tok_.type) {
        case Token::Type::Number: {
            ExprNode n;
            n.kind = ExprNode::Kind::Number;
            n.number = tok_.number;
            advance();
            return add(std::move(n));
        }
        case Token::Type::LParen: {
            advance();
            const auto inner = parse_expr();
            expect(Token::Type::RParen, "')'");
            return inner;
        }
        case Token::Type::Name: return parse_name();
        default: break;
        }
        syntax(kOperandStart, tok_.type == Token::Type::End ? "unexpected end of input"
                                                            : "unexpected '" + std::string(tok_.text) + "'");
    }

    std::uint32_t parse_name() {
        const Token name = tok_;
        advance();
        if (tok_.type != Token::Type::LParen) {
            if (auto acc = accessor_from_name(name.text)) {
                ExprNode n;
                n.kind = ExprNode::Kind::Access;
                n.accessor = *acc;
                return add(std::move(n));
            }
            if (find_function(name.text) != nullptr) {
                syntax({"'('"}, "function '" + std::string(name.text) + "' needs arguments");
            }
            throw ParseError(ParseError::Kind::UnknownAccessor, name.pos, {"accessor"},
                             "unknown accessor '" + std::string(name.text) + "'");
        }
        const FunctionInfo* fn = find_function(name.text);
        if (fn == nullptr) {
            throw ParseError(ParseError::Kind::UnknownAccessor, name.pos, {"function name"},
                             "unknown function '" + std::string(name.text) + "'");
        }
        advance();  // '('
        ExprNode call;
        call.kind = ExprNode::Kind::Call;
        call.function = fn->function;
        if (fn->function == Function::If) {
            call.children.push_back(parse_condition());
        } else {
            call.children.push_back(parse_expr());
        }
        while (tok_.type == Token::Type::Comma) {
            advance();
            call.children.push_back(parse_expr());
        }
        if (tok_.type != Token::Type::RParen) {
            syntax({"','", "')'"}, "expected ',' or ')'");
        }
        if (call.children.size() < fn->min_args || call.children.size() > fn->max_args) {
            syntax({}, "wrong number of arguments to '" + std::string(fn->name) + "'");
        }
        advance();
        return add(std::move(call));
    }

    std::uint32_t parse_condition() {
        ExprNode cmp;
        cmp.kind = ExprNode::Kind::Compare;
        cmp.children.push_back(parse_expr());
        if (tok_.type != Token::Type::Compare) {
            syntax({"<", "<=", ">", ">=", "==", "!="}, "expected a comparison");
        }
        cmp.comparison = tok_.comparison;
        advance();
        cmp.children.push_back(parse_expr());
        return add(std::move(cmp));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_;
    Program program_;
};

Program parse_rule(std::string_view source) { return Parser(source).run(); }

// ------------------------------------------------------------------ evaluation

double Program::evaluate(const AccessorValues& values) const {
    if (nodes_.empty()) {
        return 0.0;
    }
    return eval(root_, values);
}

double Program::eval(std::uint32_t index, const AccessorValues& values) const {
    const ExprNode& n = nodes_[index];
    switch (n.kind) {
    case ExprNode::Kind::Number: return n.number;
    case ExprNode::Kind::Access: return values[static_cast<std::size_t>(n.accessor)];
    case ExprNode::Kind::Negate: return -eval(n.children[0], values);
    case ExprNode::Kind::Sum: {
        double acc = eval(n.children[0], values);
        for (std::size_t i = 1; i < n.children.size(); ++i) {
            const double v = eval(n.children[i], values);
            acc = n.inverse[i] ? acc - v : acc + v;
        }
        return acc;
    }
    case ExprNode::Kind::Product: {
        double acc = eval(n.children[0], values);
        for (std::size_t i = 1; i < n.children.size(); ++i) {
            const double v = eval(n.children[i], values);
            if (n.inverse[i]) {
                acc = v == 0.0 ? 0.0 : acc / v;
            } else {
                acc *= v;
            }
        }
        return acc;
    }
    case ExprNode::Kind::Compare: {
        const double a = eval(n.children[0], values);
        const double b = eval(n.children[1], values);
        switch (n.comparison) {
        case Comparison::Lt: return a < b ? 1.0 : 0.0;
        case Comparison::Le: return a <= b ? 1.0 : 0.0;
        case Comparison::Gt: return a > b ? 1.0 : 0.0;
        case Comparison::Ge: return a >= b ? 1.0 : 0.0;
        case Comparison::Eq: return a == b ? 1.0 : 0.0;
        case Comparison::Ne: return a != b ? 1.0 : 0.0;
        }
        return 0.0;
    }
    case ExprNode::Kind::Call: break;
    }
    switch (n.function) {
    case Function::Min:
    case Function::Max: {
        double acc = eval(n.children[0], values);
        for (std::size_t i = 1; i < n.children.size(); ++i) {
            const double v = eval(n.children[i], values);
            acc = n.function == Function::Min ? std::min(acc, v) : std::max(acc, v);
        }
        return acc;
    }
    case Function::Abs: return std::fabs(eval(n.children[0], values));
    case Function::Sqrt: {
        const double v = eval(n.children[0], values);
        return v < 0.0 ? 0.0 : std::sqrt(v);
    }
    case Function::Exp: return std::exp(eval(n.children[0], values));
    case Function::Log: {
        const double v = eval(n.children[0], values);
        return v <= 0.0 ? 0.0 : std::log(v);
    }
    case Function::If:
        return eval(n.children[0], values) != 0.0 ? eval(n.children[1], values) : eval(n.children[2], values);
    }
    return 0.0;
}

// ---------------------------------------------------------------- printing

namespace {

void print(const Program& p, std::uint32_t index, std::string& out);

void print_child(const Program& p, std::uint32_t index, bool wrap, std::string& out) {
    if (wrap) {
        out += '(';
    }
    print(p, index, out);
    if (wrap) {
        out += ')';
    }
}

void print(const Program& p, std::uint32_t index, std::string& out) {
    const ExprNode& n = p.nodes()[index];
    auto kind_of = [&p](std::uint32_t i) { return p.nodes()[i].kind; };
    switch (n.kind) {
    case ExprNode::Kind::Number: out += format_number(n.number); return;
    case ExprNode::Kind::Access: out += accessor_name(n.accessor); return;
    case ExprNode::Kind::Negate: {
        const auto k = kind_of(n.children[0]);
        out += '-';
        print_child(p, n.children[0], k == ExprNode::Kind::Sum || k == ExprNode::Kind::Product, out);
        return;
    }
    case ExprNode::Kind::Sum:
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i > 0) {
                out += n.inverse[i] ? " - " : " + ";
            }
            print_child(p, n.children[i], kind_of(n.children[i]) == ExprNode::Kind::Sum, out);
        }
        return;
    case ExprNode::Kind::Product:
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i > 0) {
                out += n.inverse[i] ? " / " : " * ";
            }
            const auto k = kind_of(n.children[i]);
            print_child(p, n.children[i], k == ExprNode::Kind::Sum || k == ExprNode::Kind::Product, out);
        }
        return;
    case ExprNode::Kind::Compare:
        print(p, n.children[0], out);
        out += ' ';
        out += kComparisonText[static_cast<std::size_t>(n.comparison)];
        out += ' ';
        print(p, n.children[1], out);
        return;
    case ExprNode::Kind::Call:
        out += function_name(n.function);
        out += '(';
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            print(p, n.children[i], out);
        }
        out += ')';
        return;
    }
}

} // namespace

std::string to_source(const Program& program) {
    std::string out;
    if (!program.empty()) {
        print(program, program.root(), out);
    }
    return out;
}

} // namespace fafsp
