#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fafsp {

enum class Stage { Processing, Assembly };
using JobKind = Stage;

std::string_view to_string(Stage stage);

struct Machine {
    int id = 0;
    Stage stage = Stage::Processing;

    bool operator==(const Machine&) const = default;
};

/// Qualification of a job on one machine together with its processing time.
/// A job is qualified on m iff it has an entry for m.
struct Eligibility {
    int machine = 0;
    double minutes = 0.0;

    bool operator==(const Eligibility&) const = default;
};

struct Job {
    int id = 0;
    JobKind kind = JobKind::Processing;
    // Derived from the order/product nesting by link_instance().
    int order_id = -1;
    int product_id = -1;
    std::vector<int> predecessors;
    // Sorted by machine id.
    std::vector<Eligibility> eligible;

    /// Processing time on machine m, or a negative value when not qualified.
    [[nodiscard]] double time_on(int machine) const;
    [[nodiscard]] bool qualified_on(int machine) const { return time_on(machine) >= 0.0; }
    [[nodiscard]] double mean_time() const;

    bool operator==(const Job&) const = default;
};

struct Product {
    int id = 0;
    int assembly_job = -1;
    std::vector<int> processing_jobs;

    bool operator==(const Product&) const = default;
};

struct Order {
    int id = 0;
    double arrival = 0.0;
    double due = 0.0;
    std::vector<Product> products;

    bool operator==(const Order&) const = default;
};

/// Dense setup matrix between jobs. Row "from", column "to". The virtual
/// start job (no predecessor on the machine) always costs zero.
class SetupMatrix {
  public:
    SetupMatrix() = default;
    explicit SetupMatrix(std::size_t jobs, double fill = 0.0) : n_(jobs), values_(jobs * jobs, fill) {}

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] double operator()(int from, int to) const {
        return from < 0 ? 0.0 : values_[static_cast<std::size_t>(from) * n_ + static_cast<std::size_t>(to)];
    }
    double& at(int from, int to) { return values_[static_cast<std::size_t>(from) * n_ + static_cast<std::size_t>(to)]; }
    [[nodiscard]] std::span<const double> values() const { return values_; }

    bool operator==(const SetupMatrix&) const = default;

  private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

/// A dynamic flexible assembly flow shop instance. Treated as immutable once
/// built; every consumer takes it by const reference.
struct Instance {
    std::vector<Machine> machines;
    std::vector<Order> orders;
    std::vector<Job> jobs;
    SetupMatrix setup;

    [[nodiscard]] const Job& job(int id) const { return jobs[static_cast<std::size_t>(id)]; }
    [[nodiscard]] const Order& order(int id) const { return orders[static_cast<std::size_t>(id)]; }
    [[nodiscard]] const Machine& machine(int id) const { return machines[static_cast<std::size_t>(id)]; }

    [[nodiscard]] std::size_t machine_count(Stage stage) const;

    // Indicator views of the nesting (B, A, O).
    [[nodiscard]] bool job_in_order(int order_id, int job_id) const { return job(job_id).order_id == order_id; }
    [[nodiscard]] bool is_assembly_of(int product_id, int job_id) const;
    [[nodiscard]] bool product_in_order(int order_id, int product_id) const;

    /// All job ids of an order in product order (processing jobs, then the
    /// product's assembly job).
    [[nodiscard]] std::vector<int> order_jobs(int order_id) const;

    bool operator==(const Instance&) const = default;
};

/// Fills Job::order_id, Job::product_id and Job::predecessors from the
/// Order -> Product -> Job nesting. Dangling ids are left for check_instance.
void link_instance(Instance& inst);

/// Structural validity. Empty iff every model invariant holds.
std::vector<std::string> check_instance(const Instance& inst);

} // namespace fafsp
