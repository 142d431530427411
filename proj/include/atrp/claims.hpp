#pragma once

#include <optional>
#include <vector>

namespace atrp {

/// One claim, with calendar dates already converted to years from the origin.
struct ClaimRecord {
    double occurrence = 0.0;
    double report = 0.0;
    std::optional<double> settlement;  // empty while the claim is open
    double indemnity = 0.0;
    double expense = 0.0;
    std::optional<int> injury_class;

    double reporting_delay() const { return report - occurrence; }
    std::optional<double> settlement_delay() const {
        if (!settlement) return std::nullopt;
        return *settlement - report;
    }
};

using ClaimSet = std::vector<ClaimRecord>;

}  // namespace atrp
