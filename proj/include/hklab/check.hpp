#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace hklab {

/// Outcome of one verified inequality instance.
///
/// `margin` is rhs - lhs (or, when `log_scale` is set, log(rhs) - log(lhs)).
/// A check passes iff margin >= -tolerance. Passes with log-margin above
/// `vacuous_log_margin` are tagged vacuous: the inequality held, but only
/// because of an astronomically large constant, so the instance carries
/// little information beyond validating formula assembly.
struct CheckReport {
    std::string statement;    // stable statement id, e.g. "caccioppoli"
    std::string instance;     // human-readable instance description
    std::uint64_t seed = 0;   // reproduces the instance bit-exactly
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
    bool log_scale = false;
    bool pass = false;
    bool skipped = false;     // precondition not met; counted separately
    std::string note;

    static constexpr double vacuous_log_margin = 500.0;

    bool vacuous() const { return pass && log_scale && margin > vacuous_log_margin; }
};

inline CheckReport make_report(std::string statement, std::string instance,
                               double lhs, double rhs, double tolerance,
                               bool log_scale = false, std::uint64_t seed = 0) {
    CheckReport r;
    r.statement = std::move(statement);
    r.instance = std::move(instance);
    r.seed = seed;
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = rhs - lhs;
    r.tolerance = tolerance;
    r.log_scale = log_scale;
    r.pass = r.margin >= -tolerance;
    return r;
}

struct CheckSummary {
    int total = 0;
    int passed = 0;
    int failed = 0;
    int skipped = 0;
    int vacuous = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    std::string worst_instance;
};

CheckSummary summarize(const std::vector<CheckReport>& reports);

}  // namespace hklab
