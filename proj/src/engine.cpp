#include <cmath>
#include <limits>
#include <random>

#include "slogan/engine.hpp"

namespace slogan {
namespace {

double squared_distance(std::span<const double> x, std::span<const double> c) noexcept {
    double d = 0.0;
    for (std::size_t e = 0; e < x.size(); ++e) {
        const double diff = x[e] - c[e];
        d += diff * diff;
    }
    return d;
}

Assignment nearest_assignment(const Cohort& cohort, const Matrix& centroids) {
    Assignment a(cohort.size(), 0);
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < centroids.rows(); ++j) {
            const double d = squared_distance(cohort.embedding(i), centroids.row(j));
            if (d < best) {
                best = d;
                a[i] = j;
            }
        }
    }
    return a;
}

}  // namespace

Matrix init_centroids(const Cohort& cohort, const Hyperparams& h) {
    const std::size_t n = cohort.size();
    if (h.k > n) {
        throw ValidationError("k = " + std::to_string(h.k) + " exceeds the number of instances (" +
                              std::to_string(n) + ")");
    }
    if (h.k == 0) throw ValidationError("k must be positive");

    std::mt19937_64 rng(h.seed);
    std::vector<std::size_t> chosen;
    chosen.reserve(h.k);
    std::vector<bool> taken(n, false);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());

    auto take = [&](std::size_t idx) {
        chosen.push_back(idx);
        taken[idx] = true;
        for (std::size_t i = 0; i < n; ++i) {
            min_d2[i] = std::min(min_d2[i], squared_distance(cohort.embedding(i), cohort.embedding(idx)));
        }
    };

    take(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    while (chosen.size() < h.k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += taken[i] ? 0.0 : min_d2[i];
        std::size_t pick = n;
        if (total > 0.0) {
            const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            double cum = 0.0;
            std::size_t last_positive = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i] || min_d2[i] <= 0.0) continue;
                last_positive = i;
                cum += min_d2[i];
                if (cum > u) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) pick = last_positive;
        } else {
            // Fewer distinct points than k: fall back to the lowest unused index.
            for (std::size_t i = 0; i < n && pick == n; ++i) {
                if (!taken[i]) pick = i;
            }
        }
        take(pick);
    }

    Matrix centroids(h.k, cohort.dim());
    for (std::size_t j = 0; j < h.k; ++j) {
        auto src = cohort.embedding(chosen[j]);
        std::copy(src.begin(), src.end(), centroids.row(j).begin());
    }
    return centroids;
}

SolverState::SolverState(const Cohort& c, const Hyperparams& hp, Assignment a, Matrix centers)
    : cohort(&c), h(hp), assignment(std::move(a)), centroids(std::move(centers)) {
    rebuild();
}

void SolverState::rebuild() {
    stats.assign(centroids.rows(), ClusterStats{});
    l_c = 0.0;
    for (std::size_t i = 0; i < cohort->size(); ++i) {
        stats[assignment[i]].add((*cohort)[i]);
        l_c += squared_distance(cohort->embedding(i), centroids.row(assignment[i]));
    }
    l_b = 0.0;
    l_s = 0.0;
    for (const auto& s : stats) {
        l_b += s.bias();
        l_s += s.severity_gap_sq();
    }
}

double SolverState::move_delta(std::size_t i, std::size_t to) const noexcept {
    const std::size_t from = assignment[i];
    if (from == to) return 0.0;
    const Instance& inst = (*cohort)[i];
    ClusterStats src = stats[from];
    ClusterStats dst = stats[to];
    src.remove(inst);
    dst.add(inst);
    const double d_c = squared_distance(cohort->embedding(i), centroids.row(to)) -
                       squared_distance(cohort->embedding(i), centroids.row(from));
    const double d_b = (src.bias() + dst.bias()) - (stats[from].bias() + stats[to].bias());
    const double d_s = (src.severity_gap_sq() + dst.severity_gap_sq()) -
                       (stats[from].severity_gap_sq() + stats[to].severity_gap_sq());
    return d_c + h.lambda * d_b + h.gamma * d_s;
}

void SolverState::move(std::size_t i, std::size_t to) noexcept {
    const std::size_t from = assignment[i];
    if (from == to) return;
    const Instance& inst = (*cohort)[i];
    const double old_b = stats[from].bias() + stats[to].bias();
    const double old_s = stats[from].severity_gap_sq() + stats[to].severity_gap_sq();
    l_c += squared_distance(cohort->embedding(i), centroids.row(to)) -
           squared_distance(cohort->embedding(i), centroids.row(from));
    stats[from].remove(inst);
    stats[to].add(inst);
    l_b += (stats[from].bias() + stats[to].bias()) - old_b;
    l_s += (stats[from].severity_gap_sq() + stats[to].severity_gap_sq()) - old_s;
    assignment[i] = to;
}

std::size_t empty_cluster_repair(SolverState& state) {
    std::size_t repairs = 0;
    const Cohort& cohort = *state.cohort;
    for (std::size_t j = 0; j < state.stats.size(); ++j) {
        if (state.stats[j].size != 0) continue;
        std::size_t far = cohort.size();
        double far_d = -1.0;
        for (std::size_t i = 0; i < cohort.size(); ++i) {
            if (state.stats[state.assignment[i]].size < 2) continue;
            const double d = squared_distance(cohort.embedding(i), state.centroids.row(state.assignment[i]));
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far == cohort.size()) break;  // unreachable while k <= n
        auto src = cohort.embedding(far);
        std::copy(src.begin(), src.end(), state.centroids.row(j).begin());
        state.move(far, j);
        ++repairs;
    }
    return repairs;
}

ClusteringResult fit_from(const Cohort& cohort, const Hyperparams& h, Matrix initial_centroids) {
    h.validate(cohort.size());
    if (initial_centroids.rows() != h.k || initial_centroids.cols() != cohort.dim()) {
        throw ValidationError("initial centroids must be k x d");
    }
    const std::size_t k = h.k;
    Assignment seeded = nearest_assignment(cohort, initial_centroids);
    SolverState state(cohort, h, std::move(seeded), std::move(initial_centroids));
    empty_cluster_repair(state);

    ClusteringResult result;
    result.hyperparams = h;
    double objective = state.objective();
    result.trace.push_back(objective);

    auto update_centroids = [&] {
        const double before = state.l_c;
        state.centroids = cluster_means(cohort, state.assignment, k);
        state.l_c = 0.0;
        for (std::size_t i = 0; i < cohort.size(); ++i) {
            state.l_c += squared_distance(cohort.embedding(i), state.centroids.row(state.assignment[i]));
        }
        objective += state.l_c - before;
        result.trace.push_back(objective);
    };

    while (result.iterations < h.max_iter) {
        update_centroids();
        ++result.iterations;
        bool moved = false;
        for (std::size_t i = 0; i < cohort.size(); ++i) {
            const std::size_t from = state.assignment[i];
            if (state.stats[from].size < 2) continue;
            std::size_t best = from;
            double best_delta = 0.0;
            for (std::size_t to = 0; to < k; ++to) {
                if (to == from) continue;
                const double delta = state.move_delta(i, to);
                if (delta < best_delta - kObjectiveTolerance) {
                    best_delta = delta;
                    best = to;
                }
            }
            if (best != from) {
                state.move(i, best);
                objective += best_delta;
                moved = true;
            }
        }
        result.trace.push_back(objective);
        if (!moved) {
            result.converged = true;
            break;
        }
    }
    if (!result.converged) update_centroids();

    result.assignment = std::move(state.assignment);
    result.centroids = std::move(state.centroids);
    result.l_c = clustering_cost(cohort, result.assignment, result.centroids);
    result.l_b = bias_term(cohort, result.assignment, k);
    result.l_s = severity_term(cohort, result.assignment, k);
    result.objective = result.l_c + h.lambda * result.l_b + h.gamma * result.l_s;
    if (!std::isfinite(result.objective)) throw Error("objective became non-finite");
    return result;
}

ClusteringResult fit(const Cohort& cohort, const Hyperparams& h) {
    h.validate(cohort.size());
    ClusteringResult best;
    for (std::size_t r = 0; r < h.restarts; ++r) {
        Hyperparams run = h;
        run.seed = h.seed + r;
        ClusteringResult res = fit_from(cohort, h, init_centroids(cohort, run));
        res.restart = r;
        if (r == 0 || res.objective < best.objective) best = std::move(res);
    }
    return best;
}

}  // namespace slogan
