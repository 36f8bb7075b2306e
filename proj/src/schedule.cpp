#include "fafsp/schedule.hpp"

#include <stdexcept>

#include "fafsp/text.hpp"

namespace fafsp {

namespace {
constexpr std::string_view kArcHeader = "job,machine,setup,start,completion";
constexpr std::string_view kOrderHeader = "order,completion,tardiness";
} // namespace

double total_tardiness(const Schedule& sched, std::size_t expected_orders) {
    if (sched.orders.size() != expected_orders) {
        throw std::logic_error("incomplete schedule: " + std::to_string(sched.orders.size()) + " of " +
                               std::to_string(expected_orders) + " orders delivered");
    }
    return total_tardiness(sched);
}

double total_tardiness(const Schedule& sched) {
    double sum = 0.0;
    for (std::size_t i = 0; i < sched.orders.size(); ++i) {
        if (sched.orders[i].order != static_cast<int>(i)) {
            throw std::logic_error("incomplete schedule: order " + std::to_string(i) + " has no outcome");
        }
        sum += sched.orders[i].tardiness;
    }
    return sum;
}

std::string format_schedule(const Schedule& sched) {
    std::string out(kArcHeader);
    out += '\n';
    for (const auto& a : sched.arcs) {
        out += std::to_string(a.job) + ',' + std::to_string(a.machine) + ',' + format_number(a.setup) + ',' +
               format_number(a.start) + ',' + format_number(a.completion) + '\n';
    }
    out += '\n';
    out += kOrderHeader;
    out += '\n';
    for (const auto& o : sched.orders) {
        out += std::to_string(o.order) + ',' + format_number(o.completion) + ',' + format_number(o.tardiness) + '\n';
    }
    return out;
}

Schedule parse_schedule(const std::string& text) {
    Schedule sched;
    enum class Section { None, Arcs, Orders } section = Section::None;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) {
            continue;
        }
        if (line == kArcHeader) {
            section = Section::Arcs;
            continue;
        }
        if (line == kOrderHeader) {
            section = Section::Orders;
            continue;
        }
        const auto fields = split(line, ',');
        try {
            if (section == Section::Arcs && fields.size() == 5) {
                sched.arcs.push_back({static_cast<int>(parse_number(fields[0])), static_cast<int>(parse_number(fields[1])),
                                      parse_number(fields[2]), parse_number(fields[3]), parse_number(fields[4])});
                continue;
            }
            if (section == Section::Orders && fields.size() == 3) {
                sched.orders.push_back(
                    {static_cast<int>(parse_number(fields[0])), parse_number(fields[1]), parse_number(fields[2])});
                continue;
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("schedule line " + std::to_string(line_no) + ": " + e.what());
        }
        throw std::invalid_argument("schedule line " + std::to_string(line_no) + ": unexpected content");
    }
    return sched;
}

} // namespace fafsp
