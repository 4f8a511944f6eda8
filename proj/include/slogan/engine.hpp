#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "slogan/cohort.hpp"

namespace slogan {

// Dense row-major matrix; one row per centroid.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Assignment = std::vector<std::size_t>;

struct Hyperparams {
    std::size_t k = 5;
    double lambda = 0.0;  // bias-term weight, <= 0
    double gamma = 0.0;   // severity-term weight, >= 0
    std::size_t max_iter = 300;
    std::uint64_t seed = 0;
    std::size_t restarts = 10;

    // Throws ValidationError on sign, range or k > n violations.
    void validate(std::size_t n) const;

    bool operator==(const Hyperparams&) const = default;
};

// Accept/reject tolerance for objective comparisons.
inline constexpr double kObjectiveTolerance = 1e-9;

struct ClusteringResult {
    Assignment assignment;
    Matrix centroids;
    double objective = 0.0;
    double l_c = 0.0;
    double l_b = 0.0;
    double l_s = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    // Incrementally tracked objective after the seeding assignment, after
    // every assignment pass and after every centroid update, for the
    // winning restart.
    std::vector<double> trace;
    std::size_t restart = 0;
    Hyperparams hyperparams;

    std::size_t k() const noexcept { return centroids.rows(); }
};

// Sum over instances of squared distance to the assigned centroid.
double clustering_cost(const Cohort& cohort, const Assignment& assignment, const Matrix& centroids);

// Sum over clusters of |acc_A - acc_B|; clusters missing a group contribute 0.
double bias_term(const Cohort& cohort, const Assignment& assignment, std::size_t k);

// Sum over clusters of (severity sum of A members - severity sum of B members)^2.
double severity_term(const Cohort& cohort, const Assignment& assignment, std::size_t k);

double total_objective(const Cohort& cohort, const Assignment& assignment, const Matrix& centroids,
                       const Hyperparams& h);

// Member means; rows of empty clusters are left at zero.
Matrix cluster_means(const Cohort& cohort, const Assignment& assignment, std::size_t k);

// Distance-weighted farthest-point seeding (D^2 sampling) driven by
// std::mt19937_64 seeded with h.seed.
Matrix init_centroids(const Cohort& cohort, const Hyperparams& h);

// Per-cluster sufficient statistics for the bias and severity terms.
struct ClusterStats {
    std::size_t size = 0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    std::size_t correct_a = 0;
    std::size_t correct_b = 0;
    double sev_a = 0.0;
    double sev_b = 0.0;

    void add(const Instance& inst) noexcept;
    void remove(const Instance& inst) noexcept;
    double bias() const noexcept;
    double severity_gap_sq() const noexcept;
};

// Mutable solver state. Objective terms are tracked incrementally against
// the current (fixed) centroids.
struct SolverState {
    const Cohort* cohort = nullptr;
    Hyperparams h;
    Assignment assignment;
    Matrix centroids;
    std::vector<ClusterStats> stats;
    double l_c = 0.0;
    double l_b = 0.0;
    double l_s = 0.0;

    SolverState(const Cohort& c, const Hyperparams& hp, Assignment a, Matrix centers);

    double objective() const noexcept { return l_c + h.lambda * l_b + h.gamma * l_s; }
    // Exact change in objective if instance i moved to cluster `to`.
    double move_delta(std::size_t i, std::size_t to) const noexcept;
    void move(std::size_t i, std::size_t to) noexcept;
    // Recompute stats and terms from scratch.
    void rebuild();
};

// Moves the instance farthest from its current centroid (lowest index on
// ties, never the last member of a cluster) into each empty cluster and
// re-centers that cluster on it. Returns the number of repairs made.
std::size_t empty_cluster_repair(SolverState& state);

// One restart of the coordinate-descent solver from the given centroids.
ClusteringResult fit_from(const Cohort& cohort, const Hyperparams& h, Matrix initial_centroids);

// Best of h.restarts runs seeded with h.seed + r.
ClusteringResult fit(const Cohort& cohort, const Hyperparams& h);

}  // namespace slogan
