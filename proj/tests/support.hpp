#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fafsp/generator.hpp"
#include "fafsp/llm.hpp"
#include "fafsp/model.hpp"
#include "fafsp/text.hpp"

namespace fafsp::test {

inline std::filesystem::path data_dir() { return FAFSP_TEST_DATA; }
inline std::filesystem::path fixture(const std::string& name) { return data_dir() / "fixtures" / name; }
inline std::filesystem::path golden(const std::string& name) { return data_dir() / "golden" / name; }

/// Compares against a golden file; FAFSP_UPDATE_GOLDEN=1 rewrites it instead.
inline bool matches_golden(const std::string& name, const std::string& actual) {
    const auto path = golden(name);
    if (const char* up = std::getenv("FAFSP_UPDATE_GOLDEN"); up != nullptr && std::string(up) == "1") {
        write_file(path.string(), actual);
        return true;
    }
    return std::filesystem::exists(path) && read_file(path.string()) == actual;
}

/// Hand-built instances. Machine ids: processing 0..p-1, assembly p..p+a-1.
class InstanceBuilder {
  public:
    InstanceBuilder(int processing, int assembly) {
        for (int m = 0; m < processing + assembly; ++m) {
            inst_.machines.push_back({m, m < processing ? Stage::Processing : Stage::Assembly});
        }
    }

    int order(double arrival, double due) {
        const int id = static_cast<int>(inst_.orders.size());
        inst_.orders.push_back({id, arrival, due, {}});
        return id;
    }

    /// Adds a product whose kit is the given processing jobs, each listed as
    /// (machine, minutes) options, plus one assembly job. Returns job ids
    /// (processing jobs first, assembly last).
    std::vector<int> product(int order, const std::vector<std::vector<std::pair<int, double>>>& kit,
                             const std::vector<std::pair<int, double>>& assembly) {
        Product p;
        p.id = next_product_++;
        std::vector<int> ids;
        for (const auto& options : kit) {
            const int j = add_job(JobKind::Processing, options);
            p.processing_jobs.push_back(j);
            ids.push_back(j);
        }
        p.assembly_job = add_job(JobKind::Assembly, assembly);
        ids.push_back(p.assembly_job);
        inst_.orders[static_cast<std::size_t>(order)].products.push_back(p);
        return ids;
    }

    void setup(int from, int to, double minutes) { setups_[{from, to}] = minutes; }

    [[nodiscard]] Instance build() const {
        Instance out = inst_;
        out.setup = SetupMatrix(out.jobs.size());
        for (const auto& [key, v] : setups_) {
            out.setup.at(key.first, key.second) = v;
        }
        link_instance(out);
        const auto errors = check_instance(out);
        if (!errors.empty()) {
            throw std::logic_error("test instance invalid: " + errors.front());
        }
        return out;
    }

  private:
    int add_job(JobKind kind, const std::vector<std::pair<int, double>>& options) {
        Job j;
        j.id = static_cast<int>(inst_.jobs.size());
        j.kind = kind;
        for (const auto& [m, t] : options) {
            j.eligible.push_back({m, t});
        }
        inst_.jobs.push_back(j);
        return j.id;
    }

    Instance inst_;
    int next_product_ = 0;
    std::map<std::pair<int, int>, double> setups_;
};

/// Small generated instance with every order present at time 0.
inline Instance tiny_static_instance(std::uint64_t seed, int orders = 2) {
    ScenarioConfig cfg;
    cfg.assembly_machines = 1;
    cfg.processing_machines = 2;
    cfg.flexibility = 0.7;
    cfg.dynamic_orders = 0;
    cfg.initial_orders = orders;
    cfg.seed = seed;
    return generate_instance(cfg);
}

/// Deterministic stand-in for an LLM. Generator requests cycle through a
/// fixed script of answers (valid rules and a few broken ones); evaluator
/// requests get a critique, except every fifth one, which is malformed.
class ScriptedTransport : public Transport {
  public:
    std::string complete(const CompletionRequest& request) override {
        ++calls_;
        if (request.tag == "Eval") {
            const std::size_t n = evals_++;
            if (n % 5 == 4) {
                return "The rule looks reasonable overall.\nAdvantages: simple.\n";
            }
            static const char* const kNotes[] = {
                "it ignores setup times",
                "it reacts slowly to newly arrived urgent orders",
                "it does not account for the remaining work of the order",
                "it treats all machines alike",
            };
            return "**Advantages:** Orders with early due dates are served first, which keeps most deliveries on "
                   "time.\n\n**Limitations:** Under heavy load " +
                   std::string(kNotes[n % 4]) +
                   ".\n\n**Suggestions:** Blend slack with processing time and penalize large setups.\n";
        }
        static const char* const kScript[] = {
            "Description: slack first, shorter operations break ties.\n```rule\nslack + 0.5*pt\n```",
            "Description: due date with setup awareness.\n```rule\ndue + setup + pt\n```",
            "I would simply use the due date of the order.",
            "Description: remaining slack per open operation.\n```rule\nslack / max(ops_rem, 1) + pt\n```",
            "Description: broken.\n```rule\nmin(due,\n```",
            "Description: urgent orders get a boost.\n```rule\nif(slack < 0, 2*slack, slack) + pt + setup\n```",
            "Description: explosive.\n```rule\nexp(exp(exp(et)))\n```",
            "Description: earliest due date, then least work.\n```expression\ndue - 0.2*work_rem + pt\n```",
            "Description: two tries.\n```rule\ndue\n```\n```rule\nslack\n```",
            "Description: waiting time matters.\n```rule\ndue - 0.3*wait + setup + pt\n```",
            "Description: unknown name.\n```rule\ndue + priority\n```",
            "Description: queue aware slack.\n```rule\nslack - 0.5*queue + pt\n```",
            "Description: log-damped slack.\n```rule\nlog(1 + abs(slack)) * 10 + pt + setup\n```",
            "Description: due time and load of the machine.\n```rule\ndue + 0.05*util + pt\n```",
        };
        const std::size_t n = gens_++;
        return kScript[n % (sizeof kScript / sizeof kScript[0])];
    }

    [[nodiscard]] std::size_t calls() const { return calls_; }

  private:
    std::size_t calls_ = 0;
    std::size_t evals_ = 0;
    std::size_t gens_ = 0;
};

} // namespace fafsp::test
