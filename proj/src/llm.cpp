#include "fafsp/llm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <regex>

#include <json.hpp>

#include "fafsp/text.hpp"

namespace fafsp {

using json = nlohmann::json;

namespace {

constexpr std::string_view kProblem =
    "Production system: a two-stage flexible assembly flow shop. Each order contains one or more products. "
    "A product consists of several processing jobs, each run on one qualified machine of the processing "
    "stage, and one assembly job run on one qualified machine of the assembly stage. An assembly job can "
    "start only when every processing job of its product is finished, and an order is delivered when all of "
    "its assembly jobs are finished. Orders arrive over time and are unknown before arrival. Switching a "
    "machine from one job to another costs a sequence-dependent setup time. The objective is the total "
    "tardiness of all orders, where an order's tardiness is max(0, delivery time - due time).\n"
    "Whenever machines are idle and jobs are waiting, a dispatching rule scores every feasible "
    "(job, machine) pair. The pair with the LOWEST score is dispatched, the state is updated, and the rule "
    "is applied again until no feasible pair remains.";

constexpr std::string_view kLanguage =
    "A rule is one arithmetic expression evaluated for a single (job, machine) pair.\n"
    "Grammar:\n"
    "  expr    := term (('+'|'-') term)*\n"
    "  term    := unary (('*'|'/') unary)*\n"
    "  unary   := '-' unary | primary\n"
    "  primary := NUMBER | VARIABLE | CALL | '(' expr ')'\n"
    "  CALL    := min(a, b, ...) | max(a, b, ...) | abs(x) | sqrt(x) | exp(x) | log(x) | if(cond, then, else)\n"
    "  cond    := expr ('<'|'<='|'>'|'>='|'=='|'!=') expr\n"
    "Division by zero gives 0, log of a non-positive value gives 0, sqrt of a negative value gives 0.\n"
    "Variables (times in minutes):\n"
    "  due       due time of the job's order\n"
    "  arrival   arrival time of the job's order\n"
    "  now       current time\n"
    "  slack     due - now - work_rem\n"
    "  wait      time the job has been waiting since it became ready\n"
    "  et        mean processing time of the job over its qualified machines\n"
    "  n_mach    number of machines qualified for the job\n"
    "  ops_rem   jobs of the order not yet started, this one included\n"
    "  work_rem  estimated processing time of those jobs\n"
    "  pt        processing time of the job on this machine\n"
    "  setup     setup time on this machine before the job\n"
    "  avail     time the machine became idle\n"
    "  queue     number of waiting jobs that this machine can process\n"
    "  util      total busy time of the machine so far\n"
    "No other names, statements, assignments or loops are allowed.";

constexpr std::string_view kGeneratorFormat =
    "Answer format:\n"
    "Description: <one or two sentences describing the idea of the rule>\n"
    "```rule\n"
    "<a single expression in the rule language>\n"
    "```\n"
    "Give exactly one code block and nothing after it.";

constexpr std::string_view kEvaluatorFormat =
    "Answer format (three labelled sections, plain text):\n"
    "Advantages: <what the rule does well in this production system>\n"
    "Limitations: <where and why it loses tardiness>\n"
    "Suggestions: <concrete changes to the expression that should reduce tardiness>";

std::string fitness_text(double v) { return format_fixed(v, 2); }

void append_rule(std::string& out, std::string_view title, const RuleSummary& r, bool with_critique) {
    out += title;
    out += '\n';
    out += "Description: " + (r.description.empty() ? std::string("(none)") : r.description) + '\n';
    out += "Expression: " + r.code + '\n';
    out += "Mean tardiness: " + fitness_text(r.fitness) + '\n';
    if (with_critique) {
        if (r.critique) {
            out += "Expert assessment:\n";
            out += "  Advantages: " + r.critique->advantages + '\n';
            out += "  Limitations: " + r.critique->limitations + '\n';
            out += "  Suggestions: " + r.critique->suggestions + '\n';
        } else {
            out += "Expert assessment: not available.\n";
        }
    }
}

void append_section(std::string& out, std::string_view heading, std::string_view body) {
    out += "## ";
    out += heading;
    out += '\n';
    out += body;
    if (!body.empty() && body.back() != '\n') {
        out += '\n';
    }
    out += '\n';
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string normalize_space(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += c;
    }
    return out;
}

} // namespace

std::string_view to_string(Role role) { return role == Role::Evaluator ? "Evaluator" : "Generator"; }

std::string_view to_string(Operator op) {
    switch (op) {
    case Operator::Init: return "Init";
    case Operator::C1: return "C1";
    case Operator::C2: return "C2";
    case Operator::M1: return "M1";
    case Operator::M2: return "M2";
    }
    return "?";
}

std::optional<Operator> operator_from_name(std::string_view name) {
    for (auto op : {Operator::Init, Operator::C1, Operator::C2, Operator::M1, Operator::M2}) {
        if (to_string(op) == name) {
            return op;
        }
    }
    return std::nullopt;
}

std::size_t parent_count(Operator op) { return op == Operator::C1 || op == Operator::C2 ? 2 : 1; }

bool uses_critique(Operator op) { return op == Operator::Init || op == Operator::C1 || op == Operator::M1; }

std::string_view operator_instruction(Operator op) {
    switch (op) {
    case Operator::Init:
        return "Please create a new rule for this production system. Use the reference rule and its assessment as "
               "a starting point, keep what works and address its limitations.";
    case Operator::C1:
        return "Please design a new algorithm by combining the advantages of the two provided algorithms.";
    case Operator::C2:
        return "Please help me create a new algorithm that is completely different in form from the given one";
    case Operator::M1: return "Please improve the given algorithm based on the suggested enhancements";
    case Operator::M2:
        return "identify the main algorithm parameters, then create a new algorithm that has a different parameter "
               "settings of the score function provided";
    }
    return "";
}

std::string system_prompt(Role role) {
    if (role == Role::Evaluator) {
        return "You are an expert in production scheduling. You assess dispatching rules for a dynamic assembly "
               "flow shop and explain their strengths and weaknesses precisely.";
    }
    return "You are an expert in designing priority dispatching rules. You answer with a short description and "
           "one expression written in the rule language you are given.";
}

std::string render_evaluator_prompt(const PromptBundle& b) {
    if (b.role != Role::Evaluator) {
        throw PromptError("evaluator prompt needs an Evaluator bundle");
    }
    if (b.parents.size() != 1) {
        throw PromptError("evaluator prompt needs exactly one candidate rule, got " + std::to_string(b.parents.size()));
    }
    if (!b.best || !b.worst) {
        throw PromptError("evaluator prompt needs the population best and worst rules");
    }
    if (b.features.empty()) {
        throw PromptError("evaluator prompt needs scenario features");
    }
    std::string out;
    append_section(out, "Problem", kProblem);
    append_section(out, "Scenario features", b.features);
    append_section(out, "Rule language", kLanguage);
    std::string context;
    append_rule(context, "Best rule in the current population:", *b.best, false);
    context += '\n';
    append_rule(context, "Worst rule in the current population:", *b.worst, false);
    append_section(out, "Population", context);
    std::string task = "Please evaluate the following heuristic rules based on the above information. Judge the rule "
                       "against the best and worst rules above, not in isolation.\n\n";
    append_rule(task, "Rule under evaluation:", b.parents.front(), false);
    append_section(out, "Task", task);
    out += kEvaluatorFormat;
    out += '\n';
    return out;
}

std::string render_generator_prompt(const PromptBundle& b) {
    if (b.role != Role::Generator) {
        throw PromptError("generator prompt needs a Generator bundle");
    }
    const std::size_t want = parent_count(b.op);
    if (b.parents.size() != want) {
        throw PromptError(std::string(to_string(b.op)) + " needs " + std::to_string(want) + " parent rule(s), got " +
                          std::to_string(b.parents.size()));
    }
    const bool critique = uses_critique(b.op);
    std::string out;
    append_section(out, "Problem", kProblem);
    append_section(out, "Scenario features", b.features);
    append_section(out, "Rule language", kLanguage);
    std::string parents;
    if (b.op == Operator::Init) {
        append_rule(parents, "Reference rule:", b.parents.front(), critique);
    } else {
        for (std::size_t i = 0; i < b.parents.size(); ++i) {
            if (i > 0) {
                parents += '\n';
            }
            const std::string title = want == 1 ? "Given rule:" : "Rule " + std::to_string(i + 1) + ":";
            append_rule(parents, title, b.parents[i], critique);
        }
    }
    append_section(out, b.op == Operator::Init ? "Reference" : "Existing rules", parents);
    std::string task(operator_instruction(b.op));
    if (task.back() != '.') {
        task += '.';
    }
    task += " Lower mean tardiness is better.";
    append_section(out, "Task", task);
    out += kGeneratorFormat;
    out += '\n';
    return out;
}

// ----------------------------------------------------------------- transport

std::string CompletionRequest::digest() const {
    std::string material = system;
    material += '\0';
    material += prompt;
    material += '\0';
    material += format_number(temperature);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(material.data(), material.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[md[i] >> 4];
        hex += kHex[md[i] & 0xF];
    }
    return hex;
}

CompletionRequest make_request(const PromptBundle& b) {
    CompletionRequest r;
    r.system = system_prompt(b.role);
    if (b.role == Role::Evaluator) {
        r.tag = "Eval";
        r.prompt = render_evaluator_prompt(b);
    } else {
        r.tag = std::string(to_string(b.op));
        r.prompt = render_generator_prompt(b);
    }
    r.temperature = b.temperature;
    return r;
}

ReplayMiss::ReplayMiss(std::string digest)
    : TransportError("no cassette record for request digest " + digest), digest_(std::move(digest)) {}

std::string to_json_line(const CassetteRecord& r) {
    json j;
    j["digest"] = r.digest;
    j["operator"] = r.op;
    j["temperature"] = r.temperature;
    j["response"] = r.response;
    return j.dump();
}

CassetteRecord cassette_record_from_json(std::string_view line) {
    const json j = json::parse(line);
    CassetteRecord r;
    r.digest = j.at("digest").get<std::string>();
    r.op = j.at("operator").get<std::string>();
    r.temperature = j.at("temperature").get<double>();
    r.response = j.at("response").get<std::string>();
    return r;
}

std::vector<CassetteRecord> load_cassette(const std::filesystem::path& path) {
    std::vector<CassetteRecord> out;
    std::size_t line_no = 0;
    const std::string text = read_file(path.string());
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(cassette_record_from_json(line));
        } catch (const json::exception& e) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

ReplayTransport::ReplayTransport(const std::vector<CassetteRecord>& records, bool strict) : strict_(strict) {
    for (const auto& r : records) {
        auto& slot = slots_[r.digest];
        slot.pending.push_back(r.response);
        slot.last = r.response;
    }
}

std::string ReplayTransport::complete(const CompletionRequest& request) {
    const std::string digest = request.digest();
    auto it = slots_.find(digest);
    if (it != slots_.end() && !it->second.pending.empty()) {
        std::string out = std::move(it->second.pending.front());
        it->second.pending.pop_front();
        ++served_;
        return out;
    }
    if (strict_) {
        throw ReplayMiss(digest);
    }
    ++served_;
    return it != slots_.end() ? it->second.last : std::string();
}

std::size_t ReplayTransport::unused() const {
    std::size_t n = 0;
    for (const auto& [digest, slot] : slots_) {
        n += slot.pending.size();
    }
    return n;
}

RecordTransport::RecordTransport(Transport& upstream, std::filesystem::path cassette, bool truncate)
    : upstream_(&upstream), path_(std::move(cassette)) {
    if (truncate) {
        std::ofstream out(path_, std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write cassette " + path_.string());
        }
    }
}

std::string RecordTransport::complete(const CompletionRequest& request) {
    std::string response = upstream_->complete(request);
    std::ofstream out(path_, std::ios::app);
    out << to_json_line({request.digest(), request.tag, request.temperature, response}) << '\n';
    if (!out) {
        throw std::runtime_error("cannot append to cassette " + path_.string());
    }
    return response;
}

// ---------------------------------------------------------------- extraction

ExtractionError::ExtractionError(Kind kind, std::string section, const std::string& what)
    : std::runtime_error(what), kind_(kind), section_(std::move(section)) {}

namespace {

struct Block {
    std::string tag;
    std::vector<std::string_view> lines;
    std::size_t first_line = 0;
};

struct Scan {
    std::vector<std::string_view> lines;
    std::vector<bool> in_fence;
    std::vector<Block> blocks;
};

Scan scan_fences(std::string_view text) {
    Scan s;
    s.lines = split(text, '\n');
    s.in_fence.assign(s.lines.size(), false);
    Block* open = nullptr;
    for (std::size_t i = 0; i < s.lines.size(); ++i) {
        const auto t = trim(s.lines[i]);
        if (t.starts_with("```")) {
            s.in_fence[i] = true;
            if (open != nullptr) {
                open = nullptr;
            } else {
                s.blocks.push_back({lower(trim(t.substr(3))), {}, i});
                open = &s.blocks.back();
            }
            continue;
        }
        if (open != nullptr) {
            s.in_fence[i] = true;
            open->lines.push_back(s.lines[i]);
        }
    }
    return s;
}

bool is_expression_tag(const std::string& tag) {
    return tag.empty() || tag == "rule" || tag == "expr" || tag == "expression";
}

} // namespace

ExtractedRule extract_individual(std::string_view response) {
    const Scan s = scan_fences(response);
    const Block* expr = nullptr;
    std::size_t count = 0;
    for (const auto& b : s.blocks) {
        if (is_expression_tag(b.tag)) {
            ++count;
            expr = expr == nullptr ? &b : expr;
        }
    }
    if (count == 0) {
        throw ExtractionError(ExtractionError::Kind::MissingBlock, "", "response has no rule code block");
    }
    if (count > 1) {
        throw ExtractionError(ExtractionError::Kind::MultipleBlocks, "",
                              "response has " + std::to_string(count) + " rule code blocks");
    }
    ExtractedRule out;
    std::string source;
    for (auto line : expr->lines) {
        const auto t = trim(line);
        if (t.empty() || t.starts_with("#") || t.starts_with("//")) {
            continue;
        }
        source += std::string(t) + ' ';
    }
    out.source = std::string(trim(source));
    if (out.source.empty()) {
        throw ExtractionError(ExtractionError::Kind::MissingBlock, "", "rule code block is empty");
    }

    static const std::regex label(R"(^[\s#>*_\-]*description[*_]*\s*:[*_]*\s*(.*)$)", std::regex::icase);
    std::string description;
    for (std::size_t i = 0; i < s.lines.size(); ++i) {
        std::smatch m;
        const std::string line(s.lines[i]);
        if (s.in_fence[i] || !std::regex_match(line, m, label)) {
            continue;
        }
        description = m[1].str();
        for (std::size_t k = i + 1; k < s.lines.size() && !s.in_fence[k] && !trim(s.lines[k]).empty(); ++k) {
            description += ' ';
            description += s.lines[k];
        }
        break;
    }
    if (description.empty()) {
        for (std::size_t i = 0; i < expr->first_line; ++i) {
            if (!s.in_fence[i]) {
                description += ' ';
                description += s.lines[i];
            }
        }
    }
    out.description = normalize_space(description);
    return out;
}

Critique extract_critique(std::string_view response) {
    static const std::regex label(
        R"(^[\s#>*_\-]*(?:\d+[.)]\s*)?[*_]*\s*(advantages|limitations|suggestions)\s*[*_]*\s*(:?)\s*[*_]*\s*(.*)$)",
        std::regex::icase);
    std::array<std::string, 3> sections;
    std::array<bool, 3> seen{};
    int current = -1;
    for (auto raw : split(response, '\n')) {
        const std::string line(raw);
        std::smatch m;
        if (std::regex_match(line, m, label) && (m[2].length() > 0 || trim(m[3].str()).empty())) {
            const std::string name = lower(m[1].str());
            current = name == "advantages" ? 0 : name == "limitations" ? 1 : 2;
            seen[static_cast<std::size_t>(current)] = true;
            sections[static_cast<std::size_t>(current)] += m[3].str();
            continue;
        }
        if (current >= 0) {
            sections[static_cast<std::size_t>(current)] += ' ' + line;
        }
    }
    constexpr std::array<std::string_view, 3> kNames = {"advantages", "limitations", "suggestions"};
    Critique c;
    std::array<std::string*, 3> fields = {&c.advantages, &c.limitations, &c.suggestions};
    for (std::size_t i = 0; i < 3; ++i) {
        *fields[i] = normalize_space(sections[i]);
        if (!seen[i] || fields[i]->empty()) {
            throw ExtractionError(ExtractionError::Kind::MissingSection, std::string(kNames[i]),
                                  "critique has no " + std::string(kNames[i]) + " section");
        }
    }
    return c;
}

} // namespace fafsp
