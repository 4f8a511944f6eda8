#include "slogan/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace slogan {
namespace {

using json = nlohmann::json;

json opt(const std::optional<double>& v) { return v ? json(round6(*v)) : json(nullptr); }

std::string pct(double fraction) { return format6(round6(fraction) * 100.0); }
std::string pct(const std::optional<double>& fraction) { return fraction ? pct(*fraction) : "-"; }

}  // namespace

double round6(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::strtod(buf, nullptr);
}

std::string format6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

json hyperparams_to_json(const Hyperparams& h) {
    return json{{"k", h.k},
                {"lambda", round6(h.lambda)},
                {"gamma", round6(h.gamma)},
                {"max_iter", h.max_iter},
                {"seed", h.seed},
                {"restarts", h.restarts}};
}

json report_to_json(const AuditReport& report) {
    json clusters = json::array();
    for (const auto& c : report.clusters) {
        clusters.push_back(json{{"cluster_id", c.cluster_id},
                                {"size", c.size},
                                {"n_a", c.n_a},
                                {"n_b", c.n_b},
                                {"acc_a", opt(c.acc_a)},
                                {"acc_b", opt(c.acc_b)},
                                {"bias_score", opt(c.bias_score)},
                                {"severity_gap", opt(c.severity_gap)},
                                {"flagged", c.flagged}});
    }
    json out{{"method", to_string(report.method)},
             {"n", report.n},
             {"k", report.k()},
             {"hyperparams", hyperparams_to_json(report.hyperparams)},
             {"thresholds",
              {{"acc_gap_min", round6(report.thresholds.acc_gap_min)},
               {"severity_gap_max", round6(report.thresholds.severity_gap_max)}}},
             {"flagged_count", report.flagged_count},
             {"scr", round6(report.scr)},
             {"sir", round6(report.sir)},
             {"avg_abs_bias", round6(report.avg_abs_bias)},
             {"max_abs_bias", round6(report.max_abs_bias)},
             {"normalized_inertia", opt(report.normalized_inertia)},
             {"global_acc_a", round6(report.global_acc_a)},
             {"global_acc_b", round6(report.global_acc_b)},
             {"global_bias", round6(report.global_bias)},
             {"global_severity_gap", round6(report.global_severity_gap)},
             {"objective", round6(report.objective)},
             {"l_c", round6(report.l_c)},
             {"l_b", round6(report.l_b)},
             {"l_s", round6(report.l_s)},
             {"clusters", clusters}};
    if (report.characterization) {
        json rows = json::array();
        for (const auto& r : report.characterization->rows) {
            rows.push_back(json{{"attribute", r.attribute},
                                {"value", r.value},
                                {"p_most", round6(r.p_most)},
                                {"p_least", round6(r.p_least)},
                                {"delta_percent", opt(r.delta_percent)}});
        }
        out["characterization"] = json{{"most_biased_cluster", report.characterization->most_biased},
                                       {"least_biased_cluster", report.characterization->least_biased},
                                       {"rows", rows}};
    } else {
        out["characterization"] = nullptr;
    }
    return out;
}

std::string report_to_markdown(const AuditReport& report) {
    std::ostringstream md;
    md << "# Local group bias audit (" << to_string(report.method) << ")\n\n";
    md << "k = " << report.k() << ", n = " << report.n << ", lambda = " << format6(report.hyperparams.lambda)
       << ", gamma = " << format6(report.hyperparams.gamma) << ", seed = " << report.hyperparams.seed
       << "\n\n";
    md << "Thresholds: accuracy gap >= " << pct(report.thresholds.acc_gap_min)
       << "%, mean severity gap <= " << format6(round6(report.thresholds.severity_gap_max)) << "\n\n";

    md << "| Metric | Value |\n|---|---|\n";
    md << "| Inertia | "
       << (report.normalized_inertia ? format6(round6(*report.normalized_inertia)) : std::string("-"))
       << " |\n";
    md << "| SCR (%) | " << pct(report.scr) << " |\n";
    md << "| SIR (%) | " << pct(report.sir) << " |\n";
    md << "| Avg \\|Bias\\| (%) | " << pct(report.avg_abs_bias) << " |\n";
    md << "| Max \\|Bias\\| (%) | " << pct(report.max_abs_bias) << " |\n";
    md << "| Global bias (%) | " << pct(report.global_bias) << " |\n\n";

    md << "## Clusters\n\n";
    md << "| Cluster | Size | Acc A (%) | Acc B (%) | \\|Bias\\| (%) | Severity gap | Flagged |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& c : report.clusters) {
        md << "| " << c.cluster_id << " | " << c.size << " | " << pct(c.acc_a) << " | " << pct(c.acc_b) << " | "
           << pct(c.bias_score) << " | "
           << (c.severity_gap ? format6(round6(*c.severity_gap)) : std::string("-")) << " | "
           << (c.flagged ? "yes" : "no") << " |\n";
    }
    md << "| Global | " << report.n << " | " << pct(report.global_acc_a) << " | " << pct(report.global_acc_b)
       << " | " << pct(report.global_bias) << " | " << format6(round6(report.global_severity_gap))
       << " | |\n";

    if (report.characterization) {
        const auto& ch = *report.characterization;
        md << "\n## Most vs least biased cluster\n\n";
        md << "Most biased: cluster " << ch.most_biased << "; least biased: cluster " << ch.least_biased
           << ".\n\n";
        md << "| Attribute | Value | Delta (%) |\n|---|---|---|\n";
        for (const auto& r : ch.rows) {
            md << "| " << r.attribute << " | " << r.value << " | "
               << (r.delta_percent ? format6(round6(*r.delta_percent)) : std::string("N/A")) << " |\n";
        }
    }
    return md.str();
}

std::string clusters_to_csv(const AuditReport& report) {
    auto cell = [](const std::optional<double>& v) { return v ? format6(round6(*v)) : std::string(); };
    std::ostringstream csv;
    csv << "cluster,size,acc_a,acc_b,bias_score,severity_gap,flagged\n";
    for (const auto& c : report.clusters) {
        csv << c.cluster_id << ',' << c.size << ',' << cell(c.acc_a) << ',' << cell(c.acc_b) << ','
            << cell(c.bias_score) << ',' << cell(c.severity_gap) << ',' << (c.flagged ? 1 : 0) << '\n';
    }
    csv << "global," << report.n << ',' << format6(round6(report.global_acc_a)) << ','
        << format6(round6(report.global_acc_b)) << ',' << format6(round6(report.global_bias)) << ','
        << format6(round6(report.global_severity_gap)) << ",\n";
    return csv.str();
}

}  // namespace slogan
