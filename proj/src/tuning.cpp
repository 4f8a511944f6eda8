#include "slogan/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "slogan/report.hpp"

namespace slogan {
namespace {

using json = nlohmann::json;

constexpr double kTieEps = 1e-12;

std::vector<double> canonical(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<double> read_axis(const json& doc, const char* list_key, const char* range_key) {
    if (doc.contains(list_key)) return doc.at(list_key).get<std::vector<double>>();
    if (!doc.contains(range_key)) {
        throw ValidationError(std::string("grid file needs '") + list_key + "' or '" + range_key + "'");
    }
    const json& r = doc.at(range_key);
    const double lo = r.at("min").get<double>();
    const double hi = r.at("max").get<double>();
    const double step = r.at("step").get<double>();
    if (!(step > 0.0) || hi < lo) throw ValidationError(std::string("bad range for '") + range_key + "'");
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

// Returns -1 / 0 / 1 comparing a against b (1: a wins).
int compare_real(double a, double b) {
    if (a > b + kTieEps) return 1;
    if (b > a + kTieEps) return -1;
    return 0;
}

bool better(const GridCell& a, const GridCell& b, bool by_flagged) {
    const double sa = by_flagged ? a.report.avg_abs_bias : a.report.max_cluster_gap();
    const double sb = by_flagged ? b.report.avg_abs_bias : b.report.max_cluster_gap();
    if (int c = compare_real(sa, sb)) return c > 0;
    if (int c = compare_real(a.report.sir, b.report.sir)) return c > 0;
    if (int c = compare_real(*a.report.normalized_inertia, *b.report.normalized_inertia)) return c < 0;
    if (std::abs(a.lambda) != std::abs(b.lambda)) return std::abs(a.lambda) < std::abs(b.lambda);
    return a.gamma < b.gamma;
}

}  // namespace

void GridSpec::validate() const {
    if (lambdas.empty() || gammas.empty()) throw ValidationError("grid is empty");
    for (double l : lambdas) {
        if (!std::isfinite(l) || l > 0.0) throw ValidationError("grid lambdas must be finite and <= 0");
    }
    for (double g : gammas) {
        if (!std::isfinite(g) || g < 0.0) throw ValidationError("grid gammas must be finite and >= 0");
    }
}

GridSpec default_grid(const Hyperparams& base) {
    GridSpec g;
    g.base = base;
    for (int i = 0; i <= 10; ++i) {
        g.lambdas.push_back(-100.0 + 10.0 * i);
        g.gammas.push_back(10.0 * i);
    }
    return g;
}

GridSpec parse_grid_spec(const std::string& json_text, const Hyperparams& base) {
    GridSpec g;
    g.base = base;
    try {
        const json doc = json::parse(json_text);
        if (!doc.is_object()) throw ValidationError("grid file must hold a JSON object");
        g.lambdas = read_axis(doc, "lambdas", "lambda");
        g.gammas = read_axis(doc, "gammas", "gamma");
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed grid file: ") + e.what());
    }
    g.validate();
    return g;
}

GridSpec load_grid_spec(const std::filesystem::path& path, const Hyperparams& base) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open grid file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_grid_spec(ss.str(), base);
}

GridSearchResult grid_search(const Cohort& cohort, const GridSpec& grid, const BiasThresholds& thresholds,
                             unsigned threads) {
    grid.validate();
    thresholds.validate();
    Hyperparams base = grid.base;
    base.lambda = 0.0;
    base.gamma = 0.0;
    const ClusteringResult baseline = fit(cohort, base);

    const std::vector<double> lambdas = canonical(grid.lambdas);
    const std::vector<double> gammas = canonical(grid.gammas);
    const std::size_t cells = lambdas.size() * gammas.size();
    std::vector<GridCell> table(cells);
    std::vector<ClusteringResult> fits(cells);

    auto run_cell = [&](std::size_t idx) {
        Hyperparams h = base;
        h.lambda = lambdas[idx / gammas.size()];
        h.gamma = gammas[idx % gammas.size()];
        fits[idx] = (h.lambda == 0.0 && h.gamma == 0.0) ? baseline : fit(cohort, h);
        GridCell& cell = table[idx];
        cell.lambda = h.lambda;
        cell.gamma = h.gamma;
        cell.report = audit_clusters(fits[idx], cohort, thresholds);
        cell.report.normalized_inertia = normalized_inertia(fits[idx], baseline);
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells));
    if (threads <= 1) {
        for (std::size_t i = 0; i < cells; ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < cells; i = next++) {
                    try {
                        run_cell(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        workers.clear();
        if (failure) std::rethrow_exception(failure);
    }

    GridSearchResult out;
    out.any_flagged = std::any_of(table.begin(), table.end(),
                                  [](const GridCell& c) { return c.report.flagged_count > 0; });
    std::size_t best = 0;
    for (std::size_t i = 1; i < cells; ++i) {
        if (better(table[i], table[best], out.any_flagged)) best = i;
    }
    out.best = fits[best].hyperparams;
    out.best_report = table[best].report;
    out.best_result = std::move(fits[best]);
    out.cells = std::move(table);
    return out;
}

std::string grid_to_csv(const GridSearchResult& result) {
    std::ostringstream csv;
    csv << "lambda,gamma,scr,sir,avg_abs_bias,max_abs_bias,normalized_inertia,objective\n";
    for (const auto& c : result.cells) {
        const AuditReport& r = c.report;
        csv << format6(c.lambda) << ',' << format6(c.gamma) << ',' << format6(round6(r.scr)) << ','
            << format6(round6(r.sir)) << ',' << format6(round6(r.avg_abs_bias)) << ','
            << format6(round6(r.max_abs_bias)) << ',' << format6(round6(*r.normalized_inertia)) << ','
            << format6(round6(r.objective)) << '\n';
    }
    return csv.str();
}

}  // namespace slogan
