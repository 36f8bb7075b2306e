#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "fafsp/model.hpp"

namespace fafsp {

/// Raised for malformed instance documents and for instances that fail
/// check_instance. `where()` is "line L, column C" for syntax errors and a
/// field path such as "orders[2].products[0].assembly_job" otherwise.
class InstanceError : public std::runtime_error {
  public:
    InstanceError(std::string where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
    [[nodiscard]] const std::string& where() const { return where_; }

  private:
    std::string where_;
};

Instance parse_instance(const std::string& text);
Instance load_instance(const std::filesystem::path& path);

/// Canonical text: keys sorted, lists sorted by id, shortest round-trip
/// number formatting. Throws InstanceError when check_instance fails.
std::string serialize_instance(const Instance& inst);
void save_instance(const Instance& inst, const std::filesystem::path& path);

} // namespace fafsp
