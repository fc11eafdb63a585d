#pragma once

#include <map>
#include <string>
#include <vector>

#include "cansub/points.hpp"

namespace cansub {

struct ClauseResult {
    bool applicable = false;
    bool pass = false;
    bool errored = false;
    std::string details;
    std::string value;    // computed quantity, when one is natural
    std::string expected; // its expected value
};

/// Per-clause verification of the level-one theorem on one module.
struct VerifyReport {
    long p = 0;
    int m = 0, e = 0, h = 0, d = -1;
    Rat deg;
    Rat w;
    bool bt1_ok = false;
    // insertion-ordered clause names for stable output
    std::vector<std::pair<std::string, ClauseResult>> clauses;
    std::map<std::string, double> timing_ms;

    const ClauseResult* find(const std::string& name) const;
    /// 0 = all applicable clauses pass, 1 = some applicable clause fails,
    /// 2 = some clause errored
    int exit_code() const;
};

struct VerifyOptions {
    int grid_points = 5;
    int max_h_points = 3;
    std::uint64_t seed = 1; // for the perturbed-start uniqueness check
};

VerifyReport verify_instance(const KisinModule& M, const VerifyOptions& opt = {});

} // namespace cansub
