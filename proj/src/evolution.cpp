#include "fafsp/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "fafsp/dispatch.hpp"
#include "fafsp/generator.hpp"
#include "fafsp/instance_io.hpp"
#include "fafsp/text.hpp"

namespace fafsp {

using json = nlohmann::json;

std::vector<Strategy> default_strategies() {
    return {
        {Operator::C1, 2, true},
        {Operator::C2, 2, false},
        {Operator::M1, 1, true},
        {Operator::M2, 1, false},
    };
}

// -------------------------------------------------------------------- config

std::vector<std::string> EvolutionConfig::errors() const {
    std::vector<std::string> out;
    if (generations < 0) {
        out.emplace_back("generations must be >= 0");
    }
    if (population < 2) {
        out.emplace_back("population must be >= 2");
    }
    if (!(u_low < u_up)) {
        out.emplace_back("temperature range needs u_low < u_up");
    }
    if (u_low < 0.0) {
        out.emplace_back("temperatures must be >= 0");
    }
    if (strategies.empty()) {
        out.emplace_back("at least one strategy is required");
    }
    for (const auto& s : strategies) {
        if (s.op == Operator::Init) {
            out.emplace_back("Init is not an evolution strategy");
        } else if (s.parents != parent_count(s.op)) {
            out.emplace_back(std::string(to_string(s.op)) + " takes " + std::to_string(parent_count(s.op)) +
                             " parent(s)");
        }
    }
    if (tournament < 1) {
        out.emplace_back("tournament size must be >= 1");
    }
    if (retries < 0) {
        out.emplace_back("retries must be >= 0");
    }
    if (threads < 1) {
        out.emplace_back("threads must be >= 1");
    }
    if (training_instances.empty() && training_count <= 0) {
        out.emplace_back("no training instances (give training_instances or training_scenario with training_count)");
    }
    return out;
}

double EvolutionConfig::init_temperature(int p) const { return u_low + p * (u_up - u_low) / population; }

EvolutionConfig parse_evolution_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    const json doc = json::parse(json_text);
    EvolutionConfig cfg;
    cfg.generations = doc.value("generations", cfg.generations);
    cfg.population = doc.value("population", cfg.population);
    cfg.u_low = doc.value("u_low", cfg.u_low);
    cfg.u_up = doc.value("u_up", cfg.u_up);
    if (doc.contains("evolution_temperature") && !doc["evolution_temperature"].is_null()) {
        cfg.evolution_temperature = doc["evolution_temperature"].get<double>();
    }
    cfg.evaluator_temperature = doc.value("evaluator_temperature", cfg.evaluator_temperature);
    cfg.tournament = doc.value("tournament", cfg.tournament);
    cfg.retries = doc.value("retries", cfg.retries);
    cfg.sample_budget = doc.value("sample_budget", cfg.sample_budget);
    cfg.threads = doc.value("threads", cfg.threads);
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("load_factor") && !doc["load_factor"].is_null()) {
        cfg.load_factor = doc["load_factor"].get<double>();
    }
    if (doc.contains("strategies")) {
        cfg.strategies.clear();
        for (const auto& s : doc["strategies"]) {
            const auto name = s.at("operator").get<std::string>();
            const auto op = operator_from_name(name);
            if (!op) {
                throw std::invalid_argument("unknown operator '" + name + "'");
            }
            Strategy st{*op, parent_count(*op), uses_critique(*op)};
            st.parents = s.value("parents", st.parents);
            st.needs_critique = s.value("critique", st.needs_critique);
            cfg.strategies.push_back(st);
        }
    }
    for (const auto& p : doc.value("training_instances", std::vector<std::string>{})) {
        std::filesystem::path path(p);
        cfg.training_instances.push_back(path.is_absolute() || base_dir.empty() ? path : base_dir / path);
    }
    if (doc.contains("training_scenario")) {
        cfg.training_scenario = doc["training_scenario"].dump();
        if (!cfg.load_factor && doc["training_scenario"].contains("mu")) {
            cfg.load_factor = doc["training_scenario"]["mu"].get<double>();
        }
    }
    cfg.training_count = doc.value("training_count", cfg.training_count);
    return cfg;
}

std::string serialize_evolution_config(const EvolutionConfig& cfg) {
    json doc;
    doc["generations"] = cfg.generations;
    doc["population"] = cfg.population;
    doc["u_low"] = cfg.u_low;
    doc["u_up"] = cfg.u_up;
    doc["evolution_temperature"] = cfg.evolution_temperature ? json(*cfg.evolution_temperature) : json(nullptr);
    doc["evaluator_temperature"] = cfg.evaluator_temperature;
    doc["tournament"] = cfg.tournament;
    doc["retries"] = cfg.retries;
    doc["sample_budget"] = cfg.sample_budget;
    doc["threads"] = cfg.threads;
    doc["seed"] = cfg.seed;
    doc["load_factor"] = cfg.load_factor ? json(*cfg.load_factor) : json(nullptr);
    json strategies = json::array();
    for (const auto& s : cfg.strategies) {
        strategies.push_back({{"operator", to_string(s.op)}, {"parents", s.parents}, {"critique", s.needs_critique}});
    }
    doc["strategies"] = strategies;
    json paths = json::array();
    for (const auto& p : cfg.training_instances) {
        paths.push_back(p.string());
    }
    doc["training_instances"] = paths;
    if (!cfg.training_scenario.empty()) {
        doc["training_scenario"] = json::parse(cfg.training_scenario);
    }
    doc["training_count"] = cfg.training_count;
    return doc.dump(2) + '\n';
}

std::vector<Instance> load_training_set(const EvolutionConfig& cfg) {
    std::vector<Instance> out;
    for (const auto& p : cfg.training_instances) {
        out.push_back(load_instance(p));
    }
    if (cfg.training_count > 0) {
        const ScenarioConfig base = parse_scenario(cfg.training_scenario.empty() ? "{}" : cfg.training_scenario);
        for (int k = 0; k < cfg.training_count; ++k) {
            ScenarioConfig sc = base;
            sc.seed = batch_seed(base.seed, static_cast<std::uint64_t>(k));
            out.push_back(generate_instance(sc));
        }
    }
    return out;
}

// ------------------------------------------------------------------- fitness

double evaluate_fitness(const RuleSpec& rule, std::span<const Instance> instances, int threads) {
    if (instances.empty()) {
        throw std::invalid_argument("evaluate_fitness: empty instance set");
    }
    std::vector<double> values(instances.size());
    auto work = [&](std::size_t begin, std::size_t step) {
        for (std::size_t i = begin; i < instances.size(); i += step) {
            values[i] = total_tardiness(run_dispatch(instances[i], rule), instances[i].orders.size());
        }
    };
    const auto n_threads = static_cast<std::size_t>(std::clamp(threads, 1, static_cast<int>(instances.size())));
    if (n_threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::exception_ptr> errors(n_threads);
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    work(t, n_threads);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return sum / static_cast<double>(values.size());
}

namespace {

struct Stat {
    std::vector<double> xs;
    void add(double x) { xs.push_back(x); }
    [[nodiscard]] double mean() const {
        if (xs.empty()) {
            return 0.0;
        }
        std::vector<double> s = xs;
        std::sort(s.begin(), s.end());
        double sum = 0.0;
        for (double x : s) {
            sum += x;
        }
        return sum / static_cast<double>(s.size());
    }
    [[nodiscard]] double sd() const {
        if (xs.size() < 2) {
            return 0.0;
        }
        const double m = mean();
        std::vector<double> sq;
        sq.reserve(xs.size());
        for (double x : xs) {
            sq.push_back((x - m) * (x - m));
        }
        std::sort(sq.begin(), sq.end());
        double sum = 0.0;
        for (double x : sq) {
            sum += x;
        }
        return std::sqrt(sum / static_cast<double>(xs.size() - 1));
    }
};

std::string count_text(double v) { return v == std::floor(v) ? format_number(v) : format_fixed(v, 2); }

} // namespace

std::string summarize_features(std::span<const Instance> instances, std::optional<double> load_factor) {
    if (instances.empty()) {
        throw std::invalid_argument("summarize_features: empty instance set");
    }
    Stat proc_machines, asm_machines, flexibility, orders, released, products, parts, pt_proc, pt_asm, setup, gaps,
        allowance, lower_bound;
    for (const auto& inst : instances) {
        const auto n_proc = static_cast<double>(inst.machine_count(Stage::Processing));
        const auto n_asm = static_cast<double>(inst.machine_count(Stage::Assembly));
        proc_machines.add(n_proc);
        asm_machines.add(n_asm);
        orders.add(static_cast<double>(inst.orders.size()));
        for (const auto& job : inst.jobs) {
            const double stage_size = job.kind == JobKind::Processing ? n_proc : n_asm;
            flexibility.add(static_cast<double>(job.eligible.size()) / stage_size);
            for (const auto& e : job.eligible) {
                (job.kind == JobKind::Processing ? pt_proc : pt_asm).add(e.minutes);
            }
        }
        const std::size_t n = inst.jobs.size();
        double setup_sum = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a != b) {
                    setup_sum += inst.setup(static_cast<int>(a), static_cast<int>(b));
                }
            }
        }
        if (n > 1) {
            setup.add(setup_sum / static_cast<double>(n * (n - 1)));
        }
        std::vector<double> arrivals;
        double at_zero = 0.0;
        for (const auto& o : inst.orders) {
            arrivals.push_back(o.arrival);
            at_zero += o.arrival <= 0.0 ? 1.0 : 0.0;
            products.add(static_cast<double>(o.products.size()));
            for (const auto& p : o.products) {
                parts.add(static_cast<double>(p.processing_jobs.size()));
            }
            allowance.add(o.due - o.arrival);
            lower_bound.add(order_lower_bound(inst, o.id));
        }
        released.add(at_zero);
        std::sort(arrivals.begin(), arrivals.end());
        for (std::size_t i = 1; i < arrivals.size(); ++i) {
            if (arrivals[i] > 0.0) {
                gaps.add(arrivals[i] - arrivals[i - 1]);
            }
        }
    }
    const double lb = lower_bound.mean();
    std::string out;
    out += "training instances: " + std::to_string(instances.size()) + '\n';
    out += "machines: processing stage " + count_text(proc_machines.mean()) + ", assembly stage " +
           count_text(asm_machines.mean()) + '\n';
    out += "flexibility (share of same-stage machines qualified per job): " + format_fixed(flexibility.mean(), 3) + '\n';
    out += "orders per instance: " + format_fixed(orders.mean(), 2) + ", present at time 0: " +
           format_fixed(released.mean(), 2) + '\n';
    out += "products per order: " + format_fixed(products.mean(), 2) +
           ", processing jobs per product: " + format_fixed(parts.mean(), 2) + '\n';
    out += "processing time on processing machines: mean " + format_fixed(pt_proc.mean(), 3) + ", sd " +
           format_fixed(pt_proc.sd(), 3) + '\n';
    out += "processing time on assembly machines: mean " + format_fixed(pt_asm.mean(), 3) + ", sd " +
           format_fixed(pt_asm.sd(), 3) + '\n';
    out += "setup time between jobs: mean " + format_fixed(setup.mean(), 3) + '\n';
    out += "mean time between order arrivals: " + format_fixed(gaps.mean(), 3) + '\n';
    out += "due-date allowance / order makespan lower bound: " + format_fixed(lb > 0.0 ? allowance.mean() / lb : 0.0, 3) +
           '\n';
    if (load_factor) {
        out += "load factor: " + format_number(*load_factor) + '\n';
    }
    return out;
}

// ------------------------------------------------------------------ journal

std::string journal_to_jsonl(std::span<const JournalEntry> journal) {
    std::string out;
    for (const auto& e : journal) {
        json j;
        j["generation"] = e.generation;
        j["operator"] = e.op;
        j["role"] = e.role;
        j["digest"] = e.digest;
        j["temperature"] = e.temperature;
        j["fitness"] = e.fitness ? json(*e.fitness) : json(nullptr);
        j["best"] = e.best;
        j["status"] = e.status;
        j["prompt"] = e.prompt;
        j["response"] = e.response;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<JournalEntry> journal_from_jsonl(const std::string& text) {
    std::vector<JournalEntry> out;
    for (auto line : split(text, '\n')) {
        if (trim(line).empty()) {
            continue;
        }
        const json j = json::parse(line);
        JournalEntry e;
        e.generation = j.at("generation").get<int>();
        e.op = j.at("operator").get<std::string>();
        e.role = j.value("role", std::string());
        e.digest = j.at("digest").get<std::string>();
        e.temperature = j.value("temperature", 0.0);
        if (j.contains("fitness") && !j["fitness"].is_null()) {
            e.fitness = j["fitness"].get<double>();
        }
        e.best = j.value("best", 0.0);
        e.status = j.value("status", std::string());
        e.prompt = j.value("prompt", std::string());
        e.response = j.value("response", std::string());
        out.push_back(std::move(e));
    }
    return out;
}

std::string trace_to_csv(std::span<const TracePoint> trace) {
    std::string out = "sample,best_fitness\n";
    for (const auto& t : trace) {
        out += std::to_string(t.sample) + ',' + format_number(t.best) + '\n';
    }
    return out;
}

// ---------------------------------------------------------------- selection

std::vector<std::size_t> tournament_select(std::span<const RuleIndividual> population, std::size_t j, int k,
                                           const std::function<std::size_t(std::size_t)>& draw) {
    if (population.empty()) {
        throw std::invalid_argument("tournament_select: empty population");
    }
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < j; ++t) {
        std::size_t best = draw(population.size());
        for (int r = 1; r < k; ++r) {
            const std::size_t c = draw(population.size());
            if (population[c].fitness < population[best].fitness ||
                (population[c].fitness == population[best].fitness && c < best)) {
                best = c;
            }
        }
        out.push_back(best);
    }
    return out;
}

std::vector<std::size_t> tournament_select(std::span<const RuleIndividual> population, std::size_t j, int k,
                                           Rng& rng) {
    return tournament_select(population, j, k, [&rng](std::size_t n) { return rng.index(n); });
}

// ------------------------------------------------------------------- engine

EvolutionEngine::EvolutionEngine(EvolutionConfig cfg, std::vector<Instance> training, Transport& transport)
    : cfg_(std::move(cfg)), training_(std::move(training)), transport_(&transport), rng_(cfg_.seed) {
    auto errs = cfg_.errors();
    // The engine receives its instances directly, so the path check does not apply.
    std::erase_if(errs, [](const std::string& e) { return e.starts_with("no training instances"); });
    if (!errs.empty()) {
        throw std::invalid_argument("invalid evolution config: " + errs.front());
    }
    if (training_.empty()) {
        throw std::invalid_argument("evolution needs at least one training instance");
    }
    features_ = summarize_features(training_, cfg_.load_factor);
}

RuleSummary EvolutionEngine::summary(const RuleIndividual& ind, bool with_critique) const {
    RuleSummary s{ind.description, ind.source, ind.fitness, std::nullopt};
    if (with_critique) {
        s.critique = ind.critique;
    }
    return s;
}

std::string EvolutionEngine::call(const PromptBundle& bundle, JournalEntry entry) {
    if (cfg_.sample_budget != 0 && samples_ >= cfg_.sample_budget) {
        budget_exhausted_ = true;
        throw BudgetStop{};
    }
    const CompletionRequest req = make_request(bundle);
    ++samples_;
    std::string response = transport_->complete(req);
    entry.digest = req.digest();
    entry.prompt = req.prompt;
    entry.response = response;
    journal_.push_back(std::move(entry));
    return response;
}

void EvolutionEngine::consider_incumbent(const RuleIndividual& ind) {
    if (ind.fitness < incumbent_.fitness) {
        incumbent_ = ind;
    }
}

bool EvolutionEngine::hybrid_evaluate(RuleIndividual& candidate) {
    const RuleIndividual* best = &candidate;
    const RuleIndividual* worst = &candidate;
    for (const auto& m : population_) {
        if (best == &candidate || m.fitness < best->fitness) {
            best = &m;
        }
        if (worst == &candidate || m.fitness > worst->fitness) {
            worst = &m;
        }
    }
    PromptBundle b;
    b.role = Role::Evaluator;
    b.op = candidate.origin.op;
    b.features = features_;
    b.parents = {summary(candidate, false)};
    b.best = summary(*best, false);
    b.worst = summary(*worst, false);
    b.temperature = cfg_.evaluator_temperature;

    JournalEntry e;
    e.generation = generation_;
    e.op = "Eval";
    e.role = "Evaluator";
    e.temperature = b.temperature;
    e.fitness = candidate.fitness;
    const std::string response = call(b, e);
    auto& row = journal_.back();
    bool ok = true;
    try {
        candidate.critique = extract_critique(response);
        row.status = "critique";
    } catch (const ExtractionError& err) {
        candidate.critique.reset();
        row.status = std::string("malformed critique: ") + err.what();
        ok = false;
    }
    row.best = incumbent_.fitness;
    trace_.push_back({samples_, incumbent_.fitness});
    return ok;
}

void EvolutionEngine::refresh_critique(std::size_t member) {
    // A malformed critique gets one fresh evaluator call.
    if (!hybrid_evaluate(population_[member])) {
        hybrid_evaluate(population_[member]);
    }
}

std::optional<RuleIndividual> EvolutionEngine::attempt(const PromptBundle& bundle, Provenance origin) {
    JournalEntry e;
    e.generation = generation_;
    e.op = std::string(to_string(bundle.op));
    e.role = "Generator";
    e.temperature = bundle.temperature;
    const std::string response = call(bundle, e);
    const std::size_t row = journal_.size() - 1;

    std::optional<RuleIndividual> out;
    std::string status;
    try {
        const ExtractedRule ex = extract_individual(response);
        const RuleSpec rule = RuleSpec::expression(ex.source);
        if (!validate_rule(rule)) {
            status = "rejected: failed smoke validation";
        } else {
            RuleIndividual ind;
            ind.id = next_id_++;
            ind.description = ex.description;
            ind.source = to_source(rule.program());
            ind.fitness = evaluate_fitness(rule, training_, cfg_.threads);
            ind.origin = std::move(origin);
            journal_[row].fitness = ind.fitness;
            status = "accepted";
            out = std::move(ind);
        }
    } catch (const ExtractionError& err) {
        status = std::string("rejected: ") + err.what();
    } catch (const ParseError& err) {
        status = std::string("rejected: parse error ") + err.what();
    } catch (const RuleInvalid& err) {
        status = std::string("rejected: ") + err.what();
    }
    if (out) {
        consider_incumbent(*out);
    }
    journal_[row].status = status;
    journal_[row].best = incumbent_.fitness;
    trace_.push_back({samples_, incumbent_.fitness});
    return out;
}

void EvolutionEngine::init_population() {
    elite_ = RuleIndividual{};
    elite_.id = next_id_++;
    elite_.description = "Earliest due date: the job of the order due first goes first; among its machines, the one "
                         "that would finish it earliest.";
    elite_.source = to_source(parse_rule(builtin_source(BuiltinRule::Edd)));
    elite_.fitness = evaluate_fitness(RuleSpec::expression(elite_.source), training_, cfg_.threads);
    elite_.origin.temperature = cfg_.u_low;
    incumbent_ = elite_;
    population_.clear();
    generation_ = 0;

    // (candidate fitness, temperature) for choosing u0; the elite counts at u_low.
    double u_best_fitness = elite_.fitness;
    double u_best = cfg_.u_low;
    try {
        hybrid_evaluate(elite_);
        incumbent_.critique = elite_.critique;
        for (int p = 1; p <= cfg_.population; ++p) {
            const double u = cfg_.init_temperature(p);
            PromptBundle b;
            b.role = Role::Generator;
            b.op = Operator::Init;
            b.features = features_;
            b.parents = {summary(elite_, true)};
            b.temperature = u;
            std::optional<RuleIndividual> got;
            for (int a = 0; a <= cfg_.retries && !got; ++a) {
                got = attempt(b, Provenance{0, Operator::Init, {elite_.id}, u, false});
            }
            if (!got) {
                RuleIndividual copy = elite_;
                copy.id = next_id_++;
                copy.origin = Provenance{0, Operator::Init, {elite_.id}, u, true};
                got = std::move(copy);
            } else if (got->fitness <= u_best_fitness) {
                u_best_fitness = got->fitness;
                u_best = u;
            }
            population_.push_back(std::move(*got));
        }
    } catch (const BudgetStop&) {
        while (population_.size() < static_cast<std::size_t>(cfg_.population)) {
            RuleIndividual copy = elite_;
            copy.id = next_id_++;
            copy.origin = Provenance{0, Operator::Init, {elite_.id}, cfg_.u_low, true};
            population_.push_back(std::move(copy));
        }
    }
    u0_ = cfg_.evolution_temperature.value_or(u_best);
    initialized_ = true;
}

bool EvolutionEngine::evolve_generation() {
    if (!initialized_ || population_.empty()) {
        throw std::logic_error("evolve_generation before init_population");
    }
    if (budget_exhausted_) {
        return false;
    }
    ++generation_;
    std::vector<RuleIndividual> offspring;
    try {
        for (int slot = 0; slot < cfg_.population; ++slot) {
            const Strategy& st = cfg_.strategies[static_cast<std::size_t>(slot) % cfg_.strategies.size()];
            const auto picks = tournament_select(population_, st.parents, cfg_.tournament, rng_);
            if (st.needs_critique) {
                refresh_critique(picks.front());
            }
            PromptBundle b;
            b.role = Role::Generator;
            b.op = st.op;
            b.features = features_;
            b.temperature = u0_;
            std::vector<int> parent_ids;
            for (auto i : picks) {
                b.parents.push_back(summary(population_[i], st.needs_critique));
                parent_ids.push_back(population_[i].id);
            }
            std::optional<RuleIndividual> got;
            for (int a = 0; a <= cfg_.retries && !got; ++a) {
                got = attempt(b, Provenance{generation_, st.op, parent_ids, u0_, false});
            }
            if (!got) {
                RuleIndividual copy = population_[picks.front()];
                copy.id = next_id_++;
                copy.origin = Provenance{generation_, st.op, parent_ids, u0_, true};
                got = std::move(copy);
            }
            offspring.push_back(std::move(*got));
        }
    } catch (const BudgetStop&) {
        --generation_;
        return false;
    }
    population_ = std::move(offspring);
    return true;
}

EvolutionResult run_evolution(const EvolutionConfig& cfg, std::vector<Instance> training, Transport& transport) {
    EvolutionEngine engine(cfg, std::move(training), transport);
    engine.init_population();
    EvolutionResult r;
    for (int k = 0; k < cfg.generations && !engine.budget_exhausted(); ++k) {
        if (!engine.evolve_generation()) {
            break;
        }
        ++r.generations_completed;
    }
    r.best = engine.incumbent();
    r.evolution_temperature = engine.evolution_temperature();
    r.final_population = engine.population();
    r.trace = engine.trace();
    r.journal = engine.journal();
    r.samples = engine.samples();
    r.budget_exhausted = engine.budget_exhausted();
    return r;
}

std::string format_individual(const RuleIndividual& ind) {
    RuleFile f;
    f.name = "rule-" + std::to_string(ind.id);
    f.description = ind.description;
    f.fitness = ind.fitness;
    f.source = ind.source;
    return format_rule_file(f);
}

} // namespace fafsp
