#include "slogan/audit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace slogan {
namespace {

// Group-wise accumulators. Severities are summed relative to a reference
// value so that a constant severity column yields exactly equal means.
struct GroupAccumulator {
    double reference = 0.0;
    std::size_t n[2] = {0, 0};
    std::size_t correct[2] = {0, 0};
    double sev_offset[2] = {0.0, 0.0};

    void add(int g, bool is_correct, double severity) {
        ++n[g];
        correct[g] += is_correct;
        sev_offset[g] += severity - reference;
    }
    void add(const Instance& inst) { add(inst.group == Group::A ? 0 : 1, inst.correct, inst.severity); }
    bool complete() const { return n[0] > 0 && n[1] > 0; }
    std::optional<double> acc(int g) const {
        if (n[g] == 0) return std::nullopt;
        return static_cast<double>(correct[g]) / static_cast<double>(n[g]);
    }
    double mean_severity(int g) const { return reference + sev_offset[g] / static_cast<double>(n[g]); }
    double severity_gap() const { return std::abs(mean_severity(0) - mean_severity(1)); }
    double acc_gap() const { return std::abs(*acc(0) - *acc(1)); }
};

// Absorbs rounding in gaps such as |0.6 - 0.5| against a 0.1 threshold.
constexpr double kFlagSlack = 1e-12;

void mean_and_std(const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

void BiasThresholds::validate() const {
    if (!(acc_gap_min >= 0.0 && acc_gap_min <= 1.0)) {
        throw ValidationError("acc_gap_min must lie in [0, 1]");
    }
    if (!(severity_gap_max >= 0.0) || !std::isfinite(severity_gap_max)) {
        throw ValidationError("severity_gap_max must be finite and non-negative");
    }
}

std::string to_string(Method m) {
    switch (m) {
        case Method::kmeans: return "kmeans";
        case Method::logan: return "logan";
        case Method::slogan: return "slogan";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    const std::string m = case_fold(name);
    if (m == "kmeans" || m == "k-means") return Method::kmeans;
    if (m == "logan") return Method::logan;
    if (m == "slogan") return Method::slogan;
    throw ValidationError("unknown method '" + name + "' (expected kmeans, logan or slogan)");
}

Method method_of(const Hyperparams& h) noexcept {
    if (h.lambda == 0.0 && h.gamma == 0.0) return Method::kmeans;
    if (h.gamma == 0.0) return Method::logan;
    return Method::slogan;
}

double AuditReport::max_cluster_gap() const noexcept {
    double best = 0.0;
    for (const auto& c : clusters) {
        if (c.bias_score) best = std::max(best, *c.bias_score);
    }
    return best;
}

BiasThresholds bootstrap_thresholds(const Cohort& cohort, std::size_t reps, std::uint64_t seed) {
    const std::size_t n = cohort.size();
    if (n < 4) throw ValidationError("bootstrap needs at least 4 instances");
    if (reps < 2) throw ValidationError("bootstrap needs at least 2 repetitions");
    const std::size_t n_a = cohort.group_size(Group::A);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> acc_gaps;
    std::vector<double> sev_gaps;
    acc_gaps.reserve(reps);
    sev_gaps.reserve(reps);
    const double reference = cohort[0].severity;
    for (std::size_t r = 0; r < reps; ++r) {
        // Draws are iid, so the first |A| of them form a uniformly random
        // size-preserving partition of the resample.
        GroupAccumulator acc{reference};
        for (std::size_t i = 0; i < n; ++i) {
            const Instance& drawn = cohort[pick(rng)];
            acc.add(i < n_a ? 0 : 1, drawn.correct, drawn.severity);
        }
        acc_gaps.push_back(acc.acc_gap());
        sev_gaps.push_back(acc.severity_gap());
    }
    double mean = 0.0, sd = 0.0;
    BiasThresholds t;
    mean_and_std(acc_gaps, mean, sd);
    t.acc_gap_min = std::min(1.0, mean + 3.0 * sd);
    mean_and_std(sev_gaps, mean, sd);
    t.severity_gap_max = mean + 3.0 * sd;
    return t;
}

AuditReport audit_clusters(const ClusteringResult& result, const Cohort& cohort,
                           const BiasThresholds& thresholds) {
    thresholds.validate();
    const std::size_t k = result.k();
    if (result.assignment.size() != cohort.size()) {
        throw ValidationError("clustering result does not match the cohort size");
    }

    const double reference = cohort[0].severity;
    std::vector<GroupAccumulator> per_cluster(k, GroupAccumulator{reference});
    GroupAccumulator global{reference};
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        if (result.assignment[i] >= k) throw ValidationError("cluster index out of range");
        per_cluster[result.assignment[i]].add(cohort[i]);
        global.add(cohort[i]);
    }

    AuditReport report;
    report.method = method_of(result.hyperparams);
    report.n = cohort.size();
    report.hyperparams = result.hyperparams;
    report.thresholds = thresholds;
    report.objective = result.objective;
    report.l_c = result.l_c;
    report.l_b = result.l_b;
    report.l_s = result.l_s;

    std::size_t flagged_instances = 0;
    double bias_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const GroupAccumulator& g = per_cluster[j];
        ClusterAudit c;
        c.cluster_id = j;
        c.n_a = g.n[0];
        c.n_b = g.n[1];
        c.size = c.n_a + c.n_b;
        c.acc_a = g.acc(0);
        c.acc_b = g.acc(1);
        if (g.complete()) {
            c.bias_score = g.acc_gap();
            c.severity_gap = g.severity_gap();
            c.flagged = *c.bias_score >= thresholds.acc_gap_min - kFlagSlack &&
                        *c.severity_gap <= thresholds.severity_gap_max + kFlagSlack;
        }
        if (c.flagged) {
            ++report.flagged_count;
            flagged_instances += c.size;
            bias_sum += *c.bias_score;
            report.max_abs_bias = std::max(report.max_abs_bias, *c.bias_score);
        }
        report.clusters.push_back(c);
    }
    report.scr = static_cast<double>(report.flagged_count) / static_cast<double>(k);
    report.sir = static_cast<double>(flagged_instances) / static_cast<double>(cohort.size());
    if (report.flagged_count > 0) report.avg_abs_bias = bias_sum / static_cast<double>(report.flagged_count);

    report.global_acc_a = *global.acc(0);
    report.global_acc_b = *global.acc(1);
    report.global_bias = global.acc_gap();
    report.global_severity_gap = global.severity_gap();
    return report;
}

double normalized_inertia(const ClusteringResult& result, const ClusteringResult& baseline) {
    if (result.k() != baseline.k() || result.assignment.size() != baseline.assignment.size()) {
        throw ValidationError("normalized inertia needs results with the same k on the same cohort");
    }
    if (!(baseline.l_c > 0.0)) throw ValidationError("baseline inertia is zero (degenerate cohort)");
    return result.l_c / baseline.l_c;
}

Characterization characterize(const ClusteringResult& result, const Cohort& cohort,
                              const AuditReport& report) {
    std::vector<const ClusterAudit*> scored;
    for (const auto& c : report.clusters) {
        if (c.bias_score) scored.push_back(&c);
    }
    if (scored.size() < 2) {
        throw ValidationError("characterization needs at least 2 clusters with a defined bias score");
    }
    // Ties: larger cluster first, then lower index.
    auto tie_less = [](const ClusterAudit* a, const ClusterAudit* b) {
        if (a->size != b->size) return a->size > b->size;
        return a->cluster_id < b->cluster_id;
    };
    const ClusterAudit* most = scored.front();
    const ClusterAudit* least = scored.front();
    for (const ClusterAudit* c : scored) {
        if (*c->bias_score > *most->bias_score ||
            (*c->bias_score == *most->bias_score && tie_less(c, most))) {
            most = c;
        }
        if (*c->bias_score < *least->bias_score ||
            (*c->bias_score == *least->bias_score && tie_less(c, least))) {
            least = c;
        }
    }

    // (attribute, value) -> member counts in most / least.
    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> counts;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        for (const auto& [attr, value] : cohort[i].attributes) {
            auto& slot = counts[{attr, value}];
            if (result.assignment[i] == most->cluster_id) ++slot.first;
            if (result.assignment[i] == least->cluster_id) ++slot.second;
        }
    }

    Characterization out;
    out.most_biased = most->cluster_id;
    out.least_biased = least->cluster_id;
    for (const auto& [key, slot] : counts) {
        CharacterizationRow row;
        row.attribute = key.first;
        row.value = key.second;
        row.p_most = static_cast<double>(slot.first) / static_cast<double>(most->size);
        row.p_least = static_cast<double>(slot.second) / static_cast<double>(least->size);
        if (row.p_most == 0.0 && row.p_least == 0.0) continue;
        if (row.p_least > 0.0) row.delta_percent = 100.0 * (row.p_most - row.p_least) / row.p_least;
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace slogan
