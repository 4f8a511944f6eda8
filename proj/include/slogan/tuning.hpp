#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "slogan/audit.hpp"
#include "slogan/cohort.hpp"
#include "slogan/engine.hpp"

namespace slogan {

struct GridSpec {
    std::vector<double> lambdas;  // each <= 0
    std::vector<double> gammas;   // each >= 0
    Hyperparams base;             // k, seed, restarts, max_iter

    void validate() const;
};

// lambda in {-100, -90, ..., 0} x gamma in {0, 10, ..., 100}.
GridSpec default_grid(const Hyperparams& base);

// {"lambdas": [...], "gammas": [...]} or ranges {"lambda": {"min", "max", "step"}, "gamma": {...}}.
GridSpec parse_grid_spec(const std::string& json_text, const Hyperparams& base);
GridSpec load_grid_spec(const std::filesystem::path& path, const Hyperparams& base);

struct GridCell {
    double lambda = 0.0;
    double gamma = 0.0;
    AuditReport report;  // normalized_inertia filled against the grid baseline
};

struct GridSearchResult {
    Hyperparams best;
    AuditReport best_report;
    ClusteringResult best_result;
    // False when no cell flagged a cluster; the winner then maximizes the
    // largest unflagged cluster gap instead.
    bool any_flagged = false;
    std::vector<GridCell> cells;  // canonical order: lambda asc, then gamma asc
};

// Fits every (lambda, gamma) pair with the base seed/restarts and selects
// the one with the largest avg |Bias| over flagged clusters. Ties go to
// higher SIR, lower normalized inertia, smaller |lambda|, then smaller gamma.
// Cells run on `threads` workers (0 = hardware concurrency); the result does
// not depend on the thread count.
GridSearchResult grid_search(const Cohort& cohort, const GridSpec& grid, const BiasThresholds& thresholds,
                             unsigned threads = 1);

std::string grid_to_csv(const GridSearchResult& result);

}  // namespace slogan
