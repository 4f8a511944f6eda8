#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "slogan/audit.hpp"
#include "slogan/cli.hpp"
#include "slogan/cohort.hpp"
#include "slogan/engine.hpp"
#include "slogan/report.hpp"
#include "slogan/synth.hpp"
#include "slogan/tuning.hpp"

namespace py = pybind11;
using namespace slogan;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::array_t<double> matrix_to_array(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) view(i, j) = m(i, j);
    }
    return out;
}

Group parse_group(const std::string& g) {
    if (g == "A" || g == "a") return Group::A;
    if (g == "B" || g == "b") return Group::B;
    throw ValidationError("group must be 'A' or 'B', got '" + g + "'");
}

Cohort cohort_from_arrays(const std::vector<std::string>& ids,
                          const py::array_t<double, py::array::c_style | py::array::forcecast>& embeddings,
                          const std::vector<std::string>& groups, const std::vector<bool>& correct,
                          const std::vector<double>& severity,
                          const std::vector<std::map<std::string, std::string>>& attributes) {
    if (embeddings.ndim() != 2) throw ValidationError("embeddings must be a 2-d array");
    const auto n = static_cast<std::size_t>(embeddings.shape(0));
    const auto d = static_cast<std::size_t>(embeddings.shape(1));
    if (ids.size() != n || groups.size() != n || correct.size() != n || severity.size() != n ||
        (!attributes.empty() && attributes.size() != n)) {
        throw ValidationError("all columns must have one entry per embedding row");
    }
    auto view = embeddings.unchecked<2>();
    std::vector<Instance> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Instance& inst = out[i];
        inst.id = ids[i];
        inst.embedding.resize(d);
        for (std::size_t e = 0; e < d; ++e) inst.embedding[e] = view(i, e);
        inst.group = parse_group(groups[i]);
        inst.correct = correct[i];
        inst.severity = severity[i];
        if (!attributes.empty()) {
            for (const auto& [k, v] : attributes[i]) inst.attributes.emplace(k, case_fold(v));
        }
    }
    return Cohort(std::move(out));
}

Hyperparams make_params(std::size_t k, double lambda, double gamma, std::uint64_t seed, std::size_t restarts,
                        std::size_t max_iter) {
    Hyperparams h;
    h.k = k;
    h.lambda = lambda;
    h.gamma = gamma;
    h.seed = seed;
    h.restarts = restarts;
    h.max_iter = max_iter;
    return h;
}

}  // namespace

PYBIND11_MODULE(_slogan, m) {
    m.doc() = "Severity-aware local group bias detection";

    // Translators run most-recent first, so the base class is registered first.
    auto base = py::register_exception<Error>(m, "SloganError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::class_<Cohort>(m, "Cohort")
        .def(py::init(&cohort_from_arrays), py::arg("ids"), py::arg("embeddings"), py::arg("groups"),
             py::arg("correct"), py::arg("severity"), py::arg("attributes") = std::vector<std::map<std::string, std::string>>{})
        .def("__len__", &Cohort::size)
        .def_property_readonly("dim", &Cohort::dim)
        .def_property_readonly("n_a", [](const Cohort& c) { return c.group_size(Group::A); })
        .def_property_readonly("n_b", [](const Cohort& c) { return c.group_size(Group::B); })
        .def_property_readonly("ids",
                               [](const Cohort& c) {
                                   std::vector<std::string> ids;
                                   for (const auto& i : c.instances()) ids.push_back(i.id);
                                   return ids;
                               })
        .def_property_readonly("attribute_schema", &Cohort::attribute_schema)
        .def("relabel", &relabel_groups, py::arg("attribute"), py::arg("a_values"),
             "Group A becomes the instances whose attribute value is in a_values");

    m.def(
        "load_cohort",
        [](const std::filesystem::path& path, const std::string& format) {
            std::string fmt = format;
            if (fmt.empty()) fmt = path.extension() == ".jsonl" ? "jsonl" : "csv";
            return load_cohort(path, parse_format(fmt));
        },
        py::arg("path"), py::arg("format") = "");
    m.def(
        "save_cohort",
        [](const Cohort& c, const std::filesystem::path& path, const std::string& format) {
            std::string fmt = format;
            if (fmt.empty()) fmt = path.extension() == ".jsonl" ? "jsonl" : "csv";
            write_cohort(c, path, parse_format(fmt));
        },
        py::arg("cohort"), py::arg("path"), py::arg("format") = "");

    py::class_<ClusteringResult>(m, "ClusteringResult")
        .def_readonly("assignment", &ClusteringResult::assignment)
        .def_property_readonly("centroids", [](const ClusteringResult& r) { return matrix_to_array(r.centroids); })
        .def_readonly("objective", &ClusteringResult::objective)
        .def_readonly("l_c", &ClusteringResult::l_c)
        .def_readonly("l_b", &ClusteringResult::l_b)
        .def_readonly("l_s", &ClusteringResult::l_s)
        .def_readonly("iterations", &ClusteringResult::iterations)
        .def_readonly("converged", &ClusteringResult::converged)
        .def_readonly("trace", &ClusteringResult::trace)
        .def_readonly("restart", &ClusteringResult::restart)
        .def_property_readonly("k", &ClusteringResult::k);

    m.def(
        "fit",
        [](const Cohort& c, std::size_t k, double lambda, double gamma, std::uint64_t seed, std::size_t restarts,
           std::size_t max_iter) {
            const Hyperparams h = make_params(k, lambda, gamma, seed, restarts, max_iter);
            py::gil_scoped_release release;
            return fit(c, h);
        },
        py::arg("cohort"), py::arg("k") = 5, py::arg("lam") = 0.0, py::arg("gamma") = 0.0, py::arg("seed") = 0,
        py::arg("restarts") = 10, py::arg("max_iter") = 300);

    py::class_<BiasThresholds>(m, "BiasThresholds")
        .def(py::init([](double acc, double sev) {
                 BiasThresholds t{acc, sev};
                 t.validate();
                 return t;
             }),
             py::arg("acc_gap_min") = 0.10, py::arg("severity_gap_max") = 0.8)
        .def_readonly("acc_gap_min", &BiasThresholds::acc_gap_min)
        .def_readonly("severity_gap_max", &BiasThresholds::severity_gap_max)
        .def("__eq__", &BiasThresholds::operator==)
        .def("__repr__", [](const BiasThresholds& t) {
            return "BiasThresholds(" + format6(t.acc_gap_min) + ", " + format6(t.severity_gap_max) + ")";
        });

    m.def("bootstrap_thresholds", &bootstrap_thresholds, py::arg("cohort"), py::arg("reps") = 1000,
          py::arg("seed") = 0);

    py::class_<AuditReport>(m, "AuditReport")
        .def_property_readonly("method", [](const AuditReport& r) { return to_string(r.method); })
        .def_readonly("flagged_count", &AuditReport::flagged_count)
        .def_readonly("scr", &AuditReport::scr)
        .def_readonly("sir", &AuditReport::sir)
        .def_readonly("avg_abs_bias", &AuditReport::avg_abs_bias)
        .def_readonly("max_abs_bias", &AuditReport::max_abs_bias)
        .def_readonly("normalized_inertia", &AuditReport::normalized_inertia)
        .def_readonly("global_bias", &AuditReport::global_bias)
        .def_property_readonly("flagged",
                               [](const AuditReport& r) {
                                   std::vector<bool> f;
                                   for (const auto& c : r.clusters) f.push_back(c.flagged);
                                   return f;
                               })
        .def("to_dict", [](const AuditReport& r) { return to_python(report_to_json(r)); })
        .def("to_markdown", &report_to_markdown);

    m.def(
        "audit",
        [](const ClusteringResult& result, const Cohort& c, const BiasThresholds& t, const ClusteringResult* baseline,
           bool characterize_clusters) {
            AuditReport rep = audit_clusters(result, c, t);
            if (baseline) rep.normalized_inertia = normalized_inertia(result, *baseline);
            if (characterize_clusters) rep.characterization = characterize(result, c, rep);
            return rep;
        },
        py::arg("result"), py::arg("cohort"), py::arg("thresholds") = BiasThresholds{},
        py::arg("baseline") = nullptr, py::arg("characterize") = false);

    py::class_<GridSearchResult>(m, "GridSearchResult")
        .def_property_readonly("best_lambda", [](const GridSearchResult& g) { return g.best.lambda; })
        .def_property_readonly("best_gamma", [](const GridSearchResult& g) { return g.best.gamma; })
        .def_readonly("best_report", &GridSearchResult::best_report)
        .def_readonly("best_result", &GridSearchResult::best_result)
        .def_readonly("any_flagged", &GridSearchResult::any_flagged)
        .def_property_readonly("cells", [](const GridSearchResult& g) {
            py::list out;
            for (const auto& c : g.cells) out.append(py::make_tuple(c.lambda, c.gamma, c.report));
            return out;
        })
        .def("to_csv", &grid_to_csv);

    m.def(
        "grid_search",
        [](const Cohort& c, std::vector<double> lambdas, std::vector<double> gammas, std::size_t k,
           std::uint64_t seed, std::size_t restarts, const BiasThresholds& t, unsigned threads) {
            GridSpec g = default_grid(make_params(k, 0, 0, seed, restarts, 300));
            if (!lambdas.empty()) g.lambdas = std::move(lambdas);
            if (!gammas.empty()) g.gammas = std::move(gammas);
            py::gil_scoped_release release;
            return grid_search(c, g, t, threads);
        },
        py::arg("cohort"), py::arg("lambdas") = std::vector<double>{}, py::arg("gammas") = std::vector<double>{},
        py::arg("k") = 5, py::arg("seed") = 0, py::arg("restarts") = 10, py::arg("thresholds") = BiasThresholds{},
        py::arg("threads") = 1);

    m.def(
        "generate_synthetic",
        [](const std::string& spec_json, std::uint64_t seed) {
            SyntheticCohort s = generate(parse_synthetic_spec(spec_json), seed);
            return py::make_tuple(std::move(s.cohort), std::move(s.truth));
        },
        py::arg("spec_json"), py::arg("seed") = 0, "Returns (cohort, truth component per instance)");
    m.def("recall_score", [](const std::vector<bool>& flagged, const std::vector<std::size_t>& assignment,
                             const std::vector<std::size_t>& truth, std::size_t planted) {
        const RecallScore s = recall_score(flagged, assignment, truth, planted);
        return py::make_tuple(s.recall, s.precision);
    });

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "slogan");
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line; returns (exit code, stdout, stderr)");
}
