#include "slogan/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "slogan/audit.hpp"
#include "slogan/cohort.hpp"
#include "slogan/engine.hpp"
#include "slogan/report.hpp"
#include "slogan/synth.hpp"
#include "slogan/tuning.hpp"

namespace slogan::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    std::string input;
    std::string format;  // empty: infer from extension
    std::string attribute;
    std::string a_values;
    std::string method = "slogan";
    std::size_t k = 5;
    double lambda = -30.0;
    double gamma = 50.0;
    std::uint64_t seed = 0;
    std::size_t restarts = 10;
    std::size_t max_iter = 300;
    std::string thresholds = "0.1:0.8";
    std::string grid;
    std::string out;
    std::string methods = "kmeans,logan,slogan";
    unsigned threads = 1;
};

struct ResolvedThresholds {
    BiasThresholds values;
    std::string source;  // "explicit" or "bootstrap:<reps>"
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        if (!cur.empty()) parts.push_back(cur);
    }
    return parts;
}

double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw ValidationError("bad " + what + ": '" + s + "'");
    return v;
}

CohortFormat resolve_format(const std::string& flag, const std::string& path) {
    if (!flag.empty()) return parse_format(flag);
    const std::string ext = case_fold(fs::path(path).extension().string());
    return (ext == ".jsonl" || ext == ".ndjson") ? CohortFormat::jsonl : CohortFormat::csv;
}

std::string resolve_out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    return "slogan-out";
}

Cohort load_input(const RunConfig& cfg) {
    if (cfg.input.empty()) throw ValidationError("--input is required");
    if (!fs::exists(cfg.input)) throw Error("input file not found: '" + cfg.input + "'");
    Cohort cohort = load_cohort(cfg.input, resolve_format(cfg.format, cfg.input));
    if (!cfg.attribute.empty()) {
        const auto values = split(cfg.a_values, ',');
        if (values.empty()) throw ValidationError("--attribute needs --a-values");
        cohort = relabel_groups(cohort, cfg.attribute, {values.begin(), values.end()});
    } else if (!cfg.a_values.empty()) {
        throw ValidationError("--a-values needs --attribute");
    }
    return cohort;
}

ResolvedThresholds resolve_thresholds(const RunConfig& cfg, const Cohort& cohort) {
    ResolvedThresholds r;
    const std::string spec = case_fold(cfg.thresholds);
    if (spec.rfind("bootstrap", 0) == 0) {
        std::size_t reps = 1000;
        if (spec.size() > 9) {
            if (spec[9] != ':') throw ValidationError("--thresholds: expected bootstrap[:reps]");
            reps = static_cast<std::size_t>(parse_number(spec.substr(10), "bootstrap repetitions"));
        }
        r.values = bootstrap_thresholds(cohort, reps, cfg.seed);
        r.source = "bootstrap:" + std::to_string(reps);
    } else {
        const auto parts = split(spec, ':');
        if (parts.size() != 2) throw ValidationError("--thresholds: expected acc:sev or bootstrap[:reps]");
        r.values.acc_gap_min = parse_number(parts[0], "accuracy-gap threshold");
        r.values.severity_gap_max = parse_number(parts[1], "severity-gap threshold");
        r.values.validate();
        r.source = "explicit";
    }
    return r;
}

Hyperparams hyperparams_for(const RunConfig& cfg, Method method) {
    Hyperparams h;
    h.k = cfg.k;
    h.lambda = method == Method::kmeans ? 0.0 : cfg.lambda;
    h.gamma = method == Method::slogan ? cfg.gamma : 0.0;
    h.seed = cfg.seed;
    h.restarts = cfg.restarts;
    h.max_iter = cfg.max_iter;
    return h;
}

Hyperparams baseline_of(Hyperparams h) {
    h.lambda = 0.0;
    h.gamma = 0.0;
    return h;
}

void attach_characterization(AuditReport& report, const ClusteringResult& result, const Cohort& cohort) {
    std::size_t scored = 0;
    for (const auto& c : report.clusters) scored += c.bias_score.has_value();
    if (scored >= 2) report.characterization = characterize(result, cohort, report);
}

// Fit + audit + normalized inertia against the same-seed K-Means baseline.
AuditReport audited_run(const Cohort& cohort, const Hyperparams& h, Method method,
                        const BiasThresholds& thresholds, const ClusteringResult* baseline_in) {
    const ClusteringResult result = fit(cohort, h);
    std::optional<ClusteringResult> own_baseline;
    const ClusteringResult* baseline = baseline_in;
    if (!baseline) {
        if (method_of(h) == Method::kmeans) {
            baseline = &result;
        } else {
            own_baseline = fit(cohort, baseline_of(h));
            baseline = &*own_baseline;
        }
    }
    AuditReport report = audit_clusters(result, cohort, thresholds);
    report.method = method;
    report.normalized_inertia = normalized_inertia(result, *baseline);
    attach_characterization(report, result, cohort);
    return report;
}

json config_json(const RunConfig& cfg, const std::string& command, const ResolvedThresholds* thr) {
    json c{{"input", cfg.input},      {"format", cfg.format},   {"attribute", cfg.attribute},
           {"a_values", cfg.a_values}, {"method", cfg.method},   {"k", cfg.k},
           {"lambda", cfg.lambda},     {"gamma", cfg.gamma},     {"seed", cfg.seed},
           {"restarts", cfg.restarts}, {"max_iter", cfg.max_iter}, {"thresholds", cfg.thresholds}};
    if (command == "tune") c["grid"] = cfg.grid;
    if (command == "compare") c["methods"] = cfg.methods;
    json m{{"tool", "slogan"}, {"version", kVersion}, {"command", command}, {"config", c}, {"seed", cfg.seed}};
    if (!cfg.input.empty()) m["input_sha256"] = file_sha256(cfg.input);
    if (command == "tune" && !cfg.grid.empty()) m["grid_sha256"] = file_sha256(cfg.grid);
    if (thr) {
        m["resolved_thresholds"] = {{"source", thr->source},
                                    {"acc_gap_min", thr->values.acc_gap_min},
                                    {"severity_gap_max", thr->values.severity_gap_max}};
    }
    return m;
}

// All outputs are rendered before the directory is touched.
void write_outputs(const std::string& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    fs::create_directories(dir);
    for (const auto& [name, content] : files) {
        const fs::path path = fs::path(dir) / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out) throw Error("cannot write '" + path.string() + "'");
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_audit(const RunConfig& cfg, std::ostream& out) {
    const Method method = parse_method(cfg.method);
    const Cohort cohort = load_input(cfg);
    const ResolvedThresholds thr = resolve_thresholds(cfg, cohort);
    const AuditReport report = audited_run(cohort, hyperparams_for(cfg, method), method, thr.values, nullptr);

    const std::string dir = resolve_out_dir(cfg.out);
    write_outputs(dir, {{"report.json", dump(report_to_json(report))},
                        {"report.md", report_to_markdown(report)},
                        {"clusters.csv", clusters_to_csv(report)},
                        {"manifest.json", dump(config_json(cfg, "audit", &thr))}});
    out << to_string(method) << ": " << report.flagged_count << " of " << report.k()
        << " clusters flagged (SCR " << format6(round6(report.scr)) << ", SIR " << format6(round6(report.sir))
        << ", avg |Bias| " << format6(round6(report.avg_abs_bias)) << "); outputs in " << dir << "\n";
    return report.flagged_count > 0 ? kExitOk : kExitNothingFlagged;
}

int cmd_tune(const RunConfig& cfg, std::ostream& out) {
    const Cohort cohort = load_input(cfg);
    const ResolvedThresholds thr = resolve_thresholds(cfg, cohort);
    Hyperparams base = hyperparams_for(cfg, Method::kmeans);
    const GridSpec grid = cfg.grid.empty() ? default_grid(base) : load_grid_spec(cfg.grid, base);
    GridSearchResult result = grid_search(cohort, grid, thr.values, cfg.threads);
    attach_characterization(result.best_report, result.best_result, cohort);

    json best = report_to_json(result.best_report);
    best["selection"] = {{"lambda", round6(result.best.lambda)},
                         {"gamma", round6(result.best.gamma)},
                         {"any_flagged", result.any_flagged},
                         {"note", result.any_flagged ? "" : "no flagged clusters"}};
    const std::string dir = resolve_out_dir(cfg.out);
    write_outputs(dir, {{"grid.csv", grid_to_csv(result)},
                        {"best-report.json", dump(best)},
                        {"best-report.md", report_to_markdown(result.best_report)},
                        {"manifest.json", dump(config_json(cfg, "tune", &thr))}});
    out << "best lambda " << format6(result.best.lambda) << ", gamma " << format6(result.best.gamma)
        << " over " << result.cells.size() << " cells"
        << (result.any_flagged ? "" : " (no flagged clusters)") << "; outputs in " << dir << "\n";
    return result.any_flagged ? kExitOk : kExitNothingFlagged;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
    std::vector<Method> methods;
    for (const auto& name : split(cfg.methods, ',')) methods.push_back(parse_method(name));
    if (methods.empty()) throw ValidationError("--methods lists no method");
    const Cohort cohort = load_input(cfg);
    const ResolvedThresholds thr = resolve_thresholds(cfg, cohort);
    const ClusteringResult baseline = fit(cohort, hyperparams_for(cfg, Method::kmeans));

    std::vector<AuditReport> reports;
    json doc{{"methods", json::array()}};
    for (Method m : methods) {
        reports.push_back(audited_run(cohort, hyperparams_for(cfg, m), m, thr.values, &baseline));
        doc["methods"].push_back(report_to_json(reports.back()));
    }

    std::ostringstream md;
    md << "| Metric |";
    for (Method m : methods) md << ' ' << to_string(m) << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < methods.size(); ++i) md << "---|";
    md << '\n';
    auto row = [&](const char* label, auto value) {
        md << "| " << label << " |";
        for (const auto& r : reports) md << ' ' << value(r) << " |";
        md << '\n';
    };
    row("Inertia", [](const AuditReport& r) { return format6(round6(*r.normalized_inertia)); });
    row("SCR (%)", [](const AuditReport& r) { return format6(round6(r.scr) * 100.0); });
    row("SIR (%)", [](const AuditReport& r) { return format6(round6(r.sir) * 100.0); });
    row("\\|Bias\\| (%)", [](const AuditReport& r) { return format6(round6(r.avg_abs_bias) * 100.0); });
    row("Max \\|Bias\\| (%)", [](const AuditReport& r) { return format6(round6(r.max_abs_bias) * 100.0); });

    const std::string dir = resolve_out_dir(cfg.out);
    write_outputs(dir, {{"comparison.md", md.str()},
                        {"comparison.json", dump(doc)},
                        {"manifest.json", dump(config_json(cfg, "compare", &thr))}});
    out << md.str();
    return kExitOk;
}

int cmd_synth(const std::string& spec_path, std::uint64_t seed, const std::string& out_path,
              const std::string& format, std::ostream& out) {
    if (out_path.empty()) throw ValidationError("--out is required");
    const SyntheticSpec spec = load_synthetic_spec(spec_path);
    const SyntheticCohort synth = generate(spec, seed);
    const CohortFormat fmt = resolve_format(format, out_path);
    if (const fs::path parent = fs::path(out_path).parent_path(); !parent.empty()) fs::create_directories(parent);
    write_cohort(synth.cohort, out_path, fmt);
    out << "wrote " << synth.cohort.size() << " instances (" << spec.components.size()
        << " components, truth in attr_" << kTruthAttribute << ") to " << out_path << "\n";
    return kExitOk;
}

void add_run_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--input", cfg.input, "Cohort file (csv or jsonl)")->required();
    sub->add_option("--format", cfg.format, "csv or jsonl (default: by extension)");
    sub->add_option("--attribute", cfg.attribute, "Attribute used to re-derive groups");
    sub->add_option("--a-values", cfg.a_values, "Comma-separated attribute values forming group A");
    sub->add_option("--k", cfg.k, "Number of clusters")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    sub->add_option("--restarts", cfg.restarts, "Independent initializations")->capture_default_str();
    sub->add_option("--max-iter", cfg.max_iter, "Maximum assignment passes")->capture_default_str();
    sub->add_option("--thresholds", cfg.thresholds, "acc:sev pair or bootstrap[:reps]")->capture_default_str();
    sub->add_option("--out", cfg.out, std::string("Output directory (default: $") + kOutDirEnv + " or slogan-out)");
}

}  // namespace

std::string file_sha256(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Local group bias auditing with severity-constrained clustering", "slogan"};
    app.require_subcommand(1);

    RunConfig cfg;
    CLI::App* audit = app.add_subcommand("audit", "Fit one method and write an audit report");
    add_run_options(audit, cfg);
    audit->add_option("--method", cfg.method, "kmeans, logan or slogan")->capture_default_str();
    audit->add_option("--lambda", cfg.lambda, "Bias-term weight (<= 0)")->capture_default_str();
    audit->add_option("--gamma", cfg.gamma, "Severity-term weight (>= 0)")->capture_default_str();

    CLI::App* tune = app.add_subcommand("tune", "Grid-search lambda and gamma");
    add_run_options(tune, cfg);
    tune->add_option("--grid", cfg.grid, "Grid JSON file (default: -100..0 x 0..100 step 10)");
    tune->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();

    CLI::App* compare = app.add_subcommand("compare", "Compare kmeans, logan and slogan on one cohort");
    add_run_options(compare, cfg);
    compare->add_option("--lambda", cfg.lambda, "Bias-term weight (<= 0)")->capture_default_str();
    compare->add_option("--gamma", cfg.gamma, "Severity-term weight (>= 0)")->capture_default_str();
    compare->add_option("--methods", cfg.methods, "Comma-separated subset of kmeans,logan,slogan")
        ->capture_default_str();

    std::string spec_path, synth_out, synth_format;
    std::uint64_t synth_seed = 0;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic cohort with planted biases");
    synth->add_option("--spec", spec_path, "Synthetic spec JSON")->required();
    synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Output cohort file")->required();
    synth->add_option("--format", synth_format, "csv or jsonl (default: by extension)");

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
    }

    try {
        if (*audit) return cmd_audit(cfg, out);
        if (*tune) return cmd_tune(cfg, out);
        if (*compare) return cmd_compare(cfg, out);
        if (*synth) return cmd_synth(spec_path, synth_seed, synth_out, synth_format, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace slogan::cli
