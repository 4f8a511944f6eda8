#include <cmath>

#include "slogan/engine.hpp"

namespace slogan {
namespace {

void check_assignment(const Cohort& cohort, const Assignment& assignment, std::size_t k) {
    if (assignment.size() != cohort.size()) {
        throw ValidationError("assignment has " + std::to_string(assignment.size()) +
                              " entries, cohort has " + std::to_string(cohort.size()));
    }
    for (std::size_t c : assignment) {
        if (c >= k) throw ValidationError("cluster index " + std::to_string(c) + " out of range");
    }
}

std::vector<ClusterStats> gather(const Cohort& cohort, const Assignment& assignment, std::size_t k) {
    std::vector<ClusterStats> stats(k);
    for (std::size_t i = 0; i < cohort.size(); ++i) stats[assignment[i]].add(cohort[i]);
    return stats;
}

}  // namespace

void Hyperparams::validate(std::size_t n) const {
    if (k < 2) throw ValidationError("k must be at least 2");
    if (k > n) {
        throw ValidationError("k = " + std::to_string(k) + " exceeds the number of instances (" +
                              std::to_string(n) + ")");
    }
    if (!std::isfinite(lambda) || lambda > 0.0) throw ValidationError("lambda must be finite and <= 0");
    if (!std::isfinite(gamma) || gamma < 0.0) throw ValidationError("gamma must be finite and >= 0");
    if (max_iter == 0) throw ValidationError("max_iter must be positive");
    if (restarts == 0) throw ValidationError("restarts must be positive");
}

void ClusterStats::add(const Instance& inst) noexcept {
    ++size;
    if (inst.group == Group::A) {
        ++n_a;
        correct_a += inst.correct;
        sev_a += inst.severity;
    } else {
        ++n_b;
        correct_b += inst.correct;
        sev_b += inst.severity;
    }
}

void ClusterStats::remove(const Instance& inst) noexcept {
    --size;
    if (inst.group == Group::A) {
        --n_a;
        correct_a -= inst.correct;
        sev_a = n_a == 0 ? 0.0 : sev_a - inst.severity;
    } else {
        --n_b;
        correct_b -= inst.correct;
        sev_b = n_b == 0 ? 0.0 : sev_b - inst.severity;
    }
}

double ClusterStats::bias() const noexcept {
    if (n_a == 0 || n_b == 0) return 0.0;
    return std::abs(static_cast<double>(correct_a) / static_cast<double>(n_a) -
                    static_cast<double>(correct_b) / static_cast<double>(n_b));
}

double ClusterStats::severity_gap_sq() const noexcept {
    const double gap = sev_a - sev_b;
    return gap * gap;
}

double clustering_cost(const Cohort& cohort, const Assignment& assignment, const Matrix& centroids) {
    check_assignment(cohort, assignment, centroids.rows());
    if (centroids.cols() != cohort.dim()) {
        throw ValidationError("centroid dimension " + std::to_string(centroids.cols()) +
                              " does not match embedding dimension " + std::to_string(cohort.dim()));
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        auto x = cohort.embedding(i);
        auto c = centroids.row(assignment[i]);
        for (std::size_t e = 0; e < x.size(); ++e) {
            const double diff = x[e] - c[e];
            cost += diff * diff;
        }
    }
    return cost;
}

double bias_term(const Cohort& cohort, const Assignment& assignment, std::size_t k) {
    check_assignment(cohort, assignment, k);
    double total = 0.0;
    for (const auto& s : gather(cohort, assignment, k)) total += s.bias();
    return total;
}

double severity_term(const Cohort& cohort, const Assignment& assignment, std::size_t k) {
    check_assignment(cohort, assignment, k);
    double total = 0.0;
    for (const auto& s : gather(cohort, assignment, k)) total += s.severity_gap_sq();
    return total;
}

double total_objective(const Cohort& cohort, const Assignment& assignment, const Matrix& centroids,
                       const Hyperparams& h) {
    const double l_c = clustering_cost(cohort, assignment, centroids);
    if (h.lambda == 0.0 && h.gamma == 0.0) return l_c;
    const std::size_t k = centroids.rows();
    return l_c + h.lambda * bias_term(cohort, assignment, k) +
           h.gamma * severity_term(cohort, assignment, k);
}

Matrix cluster_means(const Cohort& cohort, const Assignment& assignment, std::size_t k) {
    check_assignment(cohort, assignment, k);
    Matrix means(k, cohort.dim());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        auto row = means.row(assignment[i]);
        auto x = cohort.embedding(i);
        for (std::size_t e = 0; e < x.size(); ++e) row[e] += x[e];
        ++counts[assignment[i]];
    }
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) continue;
        for (double& v : means.row(j)) v /= static_cast<double>(counts[j]);
    }
    return means;
}

}  // namespace slogan
