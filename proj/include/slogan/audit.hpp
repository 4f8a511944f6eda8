#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slogan/cohort.hpp"
#include "slogan/engine.hpp"

namespace slogan {

struct BiasThresholds {
    double acc_gap_min = 0.10;      // flag when the accuracy gap is at least this
    double severity_gap_max = 0.8;  // ... and the mean-severity gap at most this

    void validate() const;
    bool operator==(const BiasThresholds&) const = default;
};

enum class Method { kmeans, logan, slogan };

std::string to_string(Method m);
Method parse_method(const std::string& name);
// kmeans when lambda = gamma = 0, logan when only gamma = 0, slogan otherwise.
Method method_of(const Hyperparams& h) noexcept;

struct ClusterAudit {
    std::size_t cluster_id = 0;
    std::size_t size = 0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    std::optional<double> acc_a;
    std::optional<double> acc_b;
    std::optional<double> bias_score;    // |acc_a - acc_b| when both groups are present
    std::optional<double> severity_gap;  // |mean severity A - mean severity B|
    bool flagged = false;
};

struct CharacterizationRow {
    std::string attribute;
    std::string value;
    double p_most = 0.0;
    double p_least = 0.0;
    std::optional<double> delta_percent;  // absent means division by zero (N/A)
};

struct Characterization {
    std::size_t most_biased = 0;
    std::size_t least_biased = 0;
    std::vector<CharacterizationRow> rows;
};

struct AuditReport {
    Method method = Method::slogan;
    std::size_t n = 0;
    std::vector<ClusterAudit> clusters;
    std::size_t flagged_count = 0;
    double scr = 0.0;
    double sir = 0.0;
    double avg_abs_bias = 0.0;
    double max_abs_bias = 0.0;
    std::optional<double> normalized_inertia;
    double global_acc_a = 0.0;
    double global_acc_b = 0.0;
    double global_bias = 0.0;
    double global_severity_gap = 0.0;
    double objective = 0.0;
    double l_c = 0.0;
    double l_b = 0.0;
    double l_s = 0.0;
    Hyperparams hyperparams;
    BiasThresholds thresholds;
    std::optional<Characterization> characterization;

    std::size_t k() const noexcept { return clusters.size(); }
    // Largest bias score over all clusters with a defined score (0 if none).
    double max_cluster_gap() const noexcept;
};

// Permutation null: resample n instances with replacement, split them into
// pseudo-groups of the original |A| and |B| sizes, and record the accuracy
// gap and mean-severity gap. Each threshold is mean + 3 * sample std of its
// gap distribution; acc_gap_min is capped at 1.
BiasThresholds bootstrap_thresholds(const Cohort& cohort, std::size_t reps = 1000, std::uint64_t seed = 0);

AuditReport audit_clusters(const ClusteringResult& result, const Cohort& cohort,
                           const BiasThresholds& thresholds);

// result.l_c / baseline.l_c.
double normalized_inertia(const ClusteringResult& result, const ClusteringResult& baseline);

// Attribute prevalence deltas (in percent, relative to the least-biased
// cluster) between the most- and least-biased clusters.
Characterization characterize(const ClusteringResult& result, const Cohort& cohort,
                              const AuditReport& report);

}  // namespace slogan
