#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "slogan/engine.hpp"

using namespace slogan;
using oracle::make_instance;

namespace {

Hyperparams params(std::size_t k, double lambda, double gamma, std::uint64_t seed = 0, std::size_t restarts = 1) {
    Hyperparams h;
    h.k = k;
    h.lambda = lambda;
    h.gamma = gamma;
    h.seed = seed;
    h.restarts = restarts;
    return h;
}

std::vector<double> row_vec(const Matrix& m, std::size_t r) { return {m.row(r).begin(), m.row(r).end()}; }

}  // namespace

TEST_CASE("init_centroids") {
    const Cohort c = oracle::random_cohort(12, 3, 5);

    SUBCASE("k = n yields a permutation of the points") {
        const Matrix m = init_centroids(c, params(12, 0, 0, 9));
        std::vector<std::vector<double>> got, want;
        for (std::size_t j = 0; j < m.rows(); ++j) got.push_back(row_vec(m, j));
        for (const auto& inst : c.instances()) want.push_back(inst.embedding);
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        CHECK(got == want);
    }
    SUBCASE("deterministic per seed") {
        CHECK(init_centroids(c, params(4, 0, 0, 77)) == init_centroids(c, params(4, 0, 0, 77)));
    }
    SUBCASE("duplicates have zero weight, so the far point is always chosen") {
        const Cohort d({make_instance("a", {0, 0}, Group::A, true, 0), make_instance("b", {0, 0}, Group::B, true, 0),
                        make_instance("c", {9, 9}, Group::A, true, 0)});
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const Matrix m = init_centroids(d, params(2, 0, 0, seed));
            const bool has_far = row_vec(m, 0) == std::vector<double>{9, 9} || row_vec(m, 1) == std::vector<double>{9, 9};
            CHECK(has_far);
            CHECK(row_vec(m, 0) != row_vec(m, 1));
        }
    }
    SUBCASE("k > n") { CHECK_THROWS_AS(init_centroids(c, params(13, 0, 0)), ValidationError); }
}

TEST_CASE("empty_cluster_repair") {
    SUBCASE("farther point seeds the empty cluster") {
        const Cohort c({make_instance("a", {0, 0}, Group::A, true, 1), make_instance("b", {3, 0}, Group::B, true, 2)});
        Matrix centers(2, 2);  // both at the origin
        SolverState s(c, params(2, 0, 0), {0, 0}, centers);
        CHECK(empty_cluster_repair(s) == 1);
        CHECK(s.assignment == Assignment{0, 1});
        CHECK(row_vec(s.centroids, 1) == std::vector<double>{3, 0});
        CHECK(s.stats[1].size == 1);
        CHECK(s.stats[1].sev_b == 2.0);
        CHECK(s.l_c == doctest::Approx(0.0));
    }
    SUBCASE("no empty cluster is the identity") {
        const Cohort c = oracle::random_cohort(10, 2, 3);
        const Matrix centers = init_centroids(c, params(3, 0, 0));
        SolverState s(c, params(3, 0, 0), Assignment{0, 1, 2, 0, 1, 2, 0, 1, 2, 0}, centers);
        const Assignment before = s.assignment;
        CHECK(empty_cluster_repair(s) == 0);
        CHECK(s.assignment == before);
        CHECK(s.centroids == centers);
    }
    SUBCASE("distance ties go to the lowest index") {
        const Cohort c({make_instance("a", {-1, 0}, Group::A, true, 0), make_instance("b", {1, 0}, Group::B, true, 0),
                        make_instance("c", {0, 0}, Group::A, true, 0)});
        SolverState s(c, params(2, 0, 0), {0, 0, 0}, Matrix(2, 2));
        empty_cluster_repair(s);
        CHECK(s.assignment == Assignment{1, 0, 0});
    }
}

TEST_CASE("SolverState move deltas match from-scratch objective differences") {
    const Cohort c = oracle::random_cohort(40, 3, 11);
    const Hyperparams h = params(4, -37.5, 12.0);
    const Matrix centers = init_centroids(c, h);
    Assignment a(c.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = i % 4;
    SolverState s(c, h, a, centers);
    for (std::size_t i = 0; i < c.size(); i += 3) {
        const std::size_t to = (s.assignment[i] + 1 + i % 3) % 4;
        const double before = total_objective(c, s.assignment, s.centroids, h);
        const double predicted = s.move_delta(i, to);
        s.move(i, to);
        const double after = total_objective(c, s.assignment, s.centroids, h);
        CHECK(predicted == doctest::Approx(after - before).epsilon(1e-9));
        CHECK(s.objective() == doctest::Approx(after).epsilon(1e-9));
    }
}

TEST_CASE("fit recovers two separated blobs") {
    // Blob scatter: each L-shaped triple around its mean contributes 4/3.
    std::vector<Instance> pts;
    const double xy[6][2] = {{0, 0}, {0, 1}, {1, 0}, {10, 10}, {10, 11}, {11, 10}};
    for (int i = 0; i < 6; ++i) {
        pts.push_back(make_instance("p" + std::to_string(i), {xy[i][0], xy[i][1]}, i % 2 ? Group::A : Group::B,
                                    i % 3 != 0, 1.0));
    }
    const Cohort c(pts);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ClusteringResult r = fit(c, params(2, 0, 0, seed, 3));
        CHECK(r.assignment[0] == r.assignment[1]);
        CHECK(r.assignment[1] == r.assignment[2]);
        CHECK(r.assignment[3] == r.assignment[4]);
        CHECK(r.assignment[4] == r.assignment[5]);
        CHECK(r.assignment[0] != r.assignment[3]);
        CHECK(r.l_c == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
        CHECK(r.converged);
    }
}

TEST_CASE("fit invariants on random cohorts") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const Cohort c = oracle::random_cohort(60, 3, 100 + seed);
        const double lambda = -10.0 * static_cast<double>(seed % 5);
        const double gamma = 3.0 * static_cast<double>(seed % 4);
        const Hyperparams h = params(3, lambda, gamma, seed, 3);
        const ClusteringResult r = fit(c, h);
        CAPTURE(seed);

        // Valid, non-empty clusters with mean centroids.
        std::vector<std::size_t> sizes(3, 0);
        for (auto j : r.assignment) ++sizes.at(j);
        CHECK(std::count(sizes.begin(), sizes.end(), 0u) == 0);
        CHECK(r.centroids == cluster_means(c, r.assignment, 3));

        // Decomposition against the independent oracle.
        const auto t = oracle::terms_with_means(c, r.assignment, 3);
        CHECK(r.l_c == doctest::Approx(t.l_c).epsilon(1e-9));
        CHECK(r.l_b == doctest::Approx(t.l_b).epsilon(1e-9));
        CHECK(r.l_s == doctest::Approx(t.l_s).epsilon(1e-9));
        CHECK(r.objective == doctest::Approx(r.l_c + lambda * r.l_b + gamma * r.l_s).epsilon(1e-9));
        CHECK(r.trace.back() == doctest::Approx(r.objective).epsilon(1e-9));

        for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] + 1e-9);
        if (r.converged) CHECK(oracle::best_single_move_gain(c, r, lambda, gamma) >= -1e-9 * (1 + std::abs(r.objective)));

        const ClusteringResult again = fit(c, h);
        CHECK(again.assignment == r.assignment);
        CHECK(again.centroids == r.centroids);
        CHECK(again.objective == r.objective);
        CHECK(again.trace == r.trace);
    }
}

TEST_CASE("lambda = gamma = 0 follows batch Lloyd") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Cohort c = oracle::random_cohort(120, 4, 300 + seed, 4);
        const Hyperparams h = params(4, 0, 0, seed);
        const Matrix init = init_centroids(c, h);
        const ClusteringResult r = fit_from(c, h, init);
        const auto ref = oracle::lloyd(c, init, h.max_iter);
        REQUIRE_FALSE(ref.emptied);
        CHECK(r.assignment == ref.assignments.back());
        CHECK(r.iterations == ref.assignments.size() - 1);
    }
}

TEST_CASE("fit reaches the brute-force optimum on small cohorts") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Cohort c = oracle::random_cohort(10, 2, 500 + seed, 2);
        const double lambda = -20.0 * static_cast<double>(seed);
        const double gamma = 0.5 * static_cast<double>(seed);
        const ClusteringResult r = fit(c, params(2, lambda, gamma, seed, 10));
        const auto bf = oracle::enumerate_k2(c, lambda, gamma);
        CHECK(bf.best_any <= r.objective + 1e-9);
        CHECK(bf.best_feasible <= r.objective + 1e-9);
        hits += r.objective <= bf.best_feasible + 1e-9;
    }
    CHECK(hits >= 4);
}

TEST_CASE("hyperparameter validation") {
    const Cohort c = oracle::random_cohort(5, 2, 1);
    CHECK_THROWS_AS(fit(c, params(6, 0, 0)), ValidationError);
    CHECK_THROWS_AS(fit(c, params(1, 0, 0)), ValidationError);
    CHECK_THROWS_AS(fit(c, params(2, 1.0, 0)), ValidationError);
    CHECK_THROWS_AS(fit(c, params(2, 0, -1.0)), ValidationError);
    Hyperparams h = params(2, 0, 0);
    h.restarts = 0;
    CHECK_THROWS_AS(fit(c, h), ValidationError);
}

TEST_CASE("severity_term is quadratically homogeneous") {
    const Cohort c = oracle::random_cohort(30, 2, 9);
    Assignment a(c.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = i % 3;
    for (double s : {0.5, 2.0, 7.0}) {
        std::vector<Instance> scaled = c.instances();
        for (auto& inst : scaled) inst.severity *= s;
        CHECK(severity_term(Cohort(scaled), a, 3) == doctest::Approx(s * s * severity_term(c, a, 3)).epsilon(1e-12));
    }
}
