#pragma once

#include "shotline/common.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace shotline {

/// Shot accounting for one run. A query is issued only when its full cost
/// still fits in the total budget, so spent() never exceeds total().
class BudgetLedger {
public:
    BudgetLedger(long total, long high_shots, long low_shots, double gamma)
        : total_(total), high_(high_shots), low_(low_shots), gamma_(gamma) {
        require(high_shots >= 1, "high-shot count must be at least 1");
        require(low_shots >= 1, "low-shot count must be at least 1");
        require(low_shots <= high_shots, "low-shot count cannot exceed the high-shot count");
        require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
        require(total >= 0, "total budget must be nonnegative");
    }

    long total() const { return total_; }
    long spent() const { return spent_; }
    long remaining() const { return total_ - spent_; }
    long high_shots() const { return high_; }
    long low_shots() const { return low_; }
    double gamma() const { return gamma_; }
    double ratio() const { return static_cast<double>(low_) / static_cast<double>(high_); }

    /// floor(gamma * B). The product is nudged up by a few ulps so values
    /// like 0.29 * 100 land on the intended integer.
    long init_budget() const {
        const double raw = gamma_ * static_cast<double>(total_);
        return static_cast<long>(std::floor(raw * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())));
    }

    /// Number of initialization queries: floor(gamma * B / s_low). In vanilla
    /// mode s_low == s_bar.
    long init_count() const { return init_budget() / low_; }

    bool can_afford(long shots) const { return shots >= 1 && spent_ + shots <= total_; }

    void charge(long shots) {
        if (!can_afford(shots))
            throw std::logic_error("budget exceeded: spent " + std::to_string(spent_) + " + " +
                                   std::to_string(shots) + " > " + std::to_string(total_));
        spent_ += shots;
    }

private:
    long total_;
    long high_;
    long low_;
    double gamma_;
    long spent_ = 0;
};

}  // namespace shotline
