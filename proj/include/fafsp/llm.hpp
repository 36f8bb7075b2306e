#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fafsp {

// ------------------------------------------------------------------- prompts

enum class Role { Evaluator, Generator };
enum class Operator { Init, C1, C2, M1, M2 };

std::string_view to_string(Role role);
std::string_view to_string(Operator op);
std::optional<Operator> operator_from_name(std::string_view name);

/// Parents an operator consumes: 2 for C1/C2, 1 otherwise.
std::size_t parent_count(Operator op);
/// Whether the generator prompt carries the parent critique (Init, C1, M1).
bool uses_critique(Operator op);

struct Critique {
    std::string advantages;
    std::string limitations;
    std::string suggestions;

    bool operator==(const Critique&) const = default;
};

/// A rule as shown to the model.
struct RuleSummary {
    std::string description;
    std::string code;
    double fitness = 0.0;
    std::optional<Critique> critique;
};

struct PromptBundle {
    Role role = Role::Generator;
    Operator op = Operator::Init;
    std::string features;              // scenario digest
    std::vector<RuleSummary> parents;  // generator: parents; evaluator: the candidate
    std::optional<RuleSummary> best;   // evaluator: population extremes
    std::optional<RuleSummary> worst;
    double temperature = 0.0;
};

class PromptError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The fixed system message of each role.
std::string system_prompt(Role role);
std::string render_evaluator_prompt(const PromptBundle& b);
std::string render_generator_prompt(const PromptBundle& b);

/// The operator's instruction sentence (embedded verbatim in its prompt).
std::string_view operator_instruction(Operator op);

// ----------------------------------------------------------------- transport

struct CompletionRequest {
    std::string tag;  // operator name, or "Eval" for the evaluator
    std::string system;
    std::string prompt;
    double temperature = 0.0;

    /// SHA-256 (hex) over system, prompt and the shortest text of temperature.
    [[nodiscard]] std::string digest() const;
};

CompletionRequest make_request(const PromptBundle& b);

/// Network, protocol or authentication failure after retries.
class TransportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ReplayMiss : public TransportError {
  public:
    explicit ReplayMiss(std::string digest);
    [[nodiscard]] const std::string& digest() const { return digest_; }

  private:
    std::string digest_;
};

class Transport {
  public:
    virtual ~Transport() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
};

struct CassetteRecord {
    std::string digest;
    std::string op;
    double temperature = 0.0;
    std::string response;

    bool operator==(const CassetteRecord&) const = default;
};

std::string to_json_line(const CassetteRecord& r);
CassetteRecord cassette_record_from_json(std::string_view line);
/// Reads a line-delimited cassette; blank lines are skipped.
std::vector<CassetteRecord> load_cassette(const std::filesystem::path& path);

/// Serves recorded responses by digest. Records sharing a digest are consumed
/// in file order. A miss throws ReplayMiss when strict; otherwise the last
/// record for the digest is reused, or an empty response returned.
class ReplayTransport : public Transport {
  public:
    explicit ReplayTransport(const std::vector<CassetteRecord>& records, bool strict = true);
    std::string complete(const CompletionRequest& request) override;

    [[nodiscard]] std::size_t served() const { return served_; }
    [[nodiscard]] std::size_t unused() const;

  private:
    struct Slot {
        std::deque<std::string> pending;
        std::string last;
    };
    std::map<std::string, Slot> slots_;
    bool strict_;
    std::size_t served_ = 0;
};

/// Forwards to `upstream` and appends every exchange to the cassette file.
class RecordTransport : public Transport {
  public:
    RecordTransport(Transport& upstream, std::filesystem::path cassette, bool truncate = true);
    std::string complete(const CompletionRequest& request) override;

  private:
    Transport* upstream_;
    std::filesystem::path path_;
};

struct LiveConfig {
    std::string base_url;  // e.g. https://api.example.com/v1
    std::string api_key;
    std::string model;
    int max_attempts = 3;
    std::chrono::milliseconds backoff{500};
    std::chrono::seconds timeout{120};

    /// FAFSP_LLM_BASE_URL, FAFSP_LLM_API_KEY, FAFSP_LLM_MODEL; nullopt when
    /// any is unset or empty.
    static std::optional<LiveConfig> from_env();
};

/// Chat-completion client: POST {base_url}/chat/completions with
/// {model, messages: [system, user], temperature}. Transient failures
/// (connection errors, 408, 429, 5xx) are retried with exponential backoff.
class LiveTransport : public Transport {
  public:
    explicit LiveTransport(LiveConfig cfg);
    std::string complete(const CompletionRequest& request) override;

    /// Body of the request that complete() sends.
    [[nodiscard]] std::string request_body(const CompletionRequest& request) const;
    /// Content of the first choice of a chat-completion response.
    static std::string parse_response(const std::string& body);

  private:
    LiveConfig cfg_;
};

// ---------------------------------------------------------------- extraction

class ExtractionError : public std::runtime_error {
  public:
    enum class Kind { MissingBlock, MultipleBlocks, MissingSection };
    ExtractionError(Kind kind, std::string section, const std::string& what);

    [[nodiscard]] Kind kind() const { return kind_; }
    /// Missing section name for MissingSection, empty otherwise.
    [[nodiscard]] const std::string& section() const { return section_; }

  private:
    Kind kind_;
    std::string section_;
};

struct ExtractedRule {
    std::string description;
    std::string source;
};

/// Description from a `Description:` line (or the prose before the code
/// block) plus the single fenced block tagged rule/expr/expression or untagged.
ExtractedRule extract_individual(std::string_view response);

/// Sections labelled Advantages, Limitations and Suggestions (any case,
/// optional markdown emphasis or heading marks), whitespace-normalized.
Critique extract_critique(std::string_view response);

} // namespace fafsp
