#include "slogan/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace slogan {
namespace {

using json = nlohmann::json;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Index of the first cumulative weight exceeding u * total.
template <typename Weights>
std::size_t draw_categorical(const Weights& weights, double total, std::mt19937_64& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    double cum = 0.0;
    std::size_t last = 0;
    std::size_t i = 0;
    for (double w : weights) {
        if (w > 0.0) {
            last = i;
            cum += w;
            if (cum > u) return i;
        }
        ++i;
    }
    return last;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (n == 0) throw ValidationError("synthetic spec: n must be positive");
    if (dim == 0) throw ValidationError("synthetic spec: dim must be positive");
    if (components.empty()) throw ValidationError("synthetic spec: at least one component is required");
    double total = 0.0;
    for (std::size_t c = 0; c < components.size(); ++c) {
        const ComponentSpec& comp = components[c];
        const std::string where = "synthetic spec: component " + std::to_string(c) + ": ";
        if (!(comp.weight > 0.0) || !std::isfinite(comp.weight)) throw ValidationError(where + "weight must be positive");
        if (comp.mean.size() != dim) throw ValidationError(where + "mean must have dim entries");
        for (double m : comp.mean) {
            if (!std::isfinite(m)) throw ValidationError(where + "mean must be finite");
        }
        if (!(comp.spread > 0.0)) throw ValidationError(where + "spread must be positive");
        if (!is_probability(comp.acc_a) || !is_probability(comp.acc_b)) {
            throw ValidationError(where + "accuracies must lie in [0, 1]");
        }
        if (!(comp.sev_mean_a >= 0.0) || !(comp.sev_mean_b >= 0.0)) {
            throw ValidationError(where + "severity means must be non-negative");
        }
        if (!(comp.sev_std > 0.0)) throw ValidationError(where + "sev_std must be positive");
        if (!(comp.frac_a > 0.0 && comp.frac_a < 1.0)) throw ValidationError(where + "frac_a must lie in (0, 1)");
        total += comp.weight;
    }
    if (!std::isfinite(total)) throw ValidationError("synthetic spec: weights overflow");
    for (const auto& [name, dists] : attribute_decor) {
        if (name == kTruthAttribute) throw ValidationError("synthetic spec: attribute name is reserved: " + name);
        if (dists.size() != components.size()) {
            throw ValidationError("synthetic spec: attribute '" + name + "' needs one distribution per component");
        }
        for (const auto& dist : dists) {
            double mass = 0.0;
            for (const auto& [value, w] : dist) {
                if (!(w >= 0.0) || !std::isfinite(w)) {
                    throw ValidationError("synthetic spec: attribute '" + name + "' has a negative weight");
                }
                mass += w;
            }
            if (!(mass > 0.0)) throw ValidationError("synthetic spec: attribute '" + name + "' has zero mass");
        }
    }
}

SyntheticSpec parse_synthetic_spec(const std::string& json_text) {
    SyntheticSpec spec;
    try {
        const json doc = json::parse(json_text);
        spec.n = doc.at("n").get<std::size_t>();
        spec.dim = doc.at("dim").get<std::size_t>();
        for (const json& c : doc.at("components")) {
            ComponentSpec comp;
            comp.weight = c.value("weight", 1.0);
            comp.mean = c.at("mean").get<std::vector<double>>();
            comp.spread = c.value("spread", 1.0);
            comp.acc_a = c.at("acc_a").get<double>();
            comp.acc_b = c.at("acc_b").get<double>();
            comp.sev_mean_a = c.at("sev_mean_a").get<double>();
            comp.sev_mean_b = c.at("sev_mean_b").get<double>();
            comp.sev_std = c.value("sev_std", 1.0);
            comp.frac_a = c.value("frac_a", 0.5);
            spec.components.push_back(std::move(comp));
        }
        if (doc.contains("attribute_decor")) {
            for (const auto& [name, dists] : doc.at("attribute_decor").items()) {
                spec.attribute_decor[name] = dists.get<std::vector<std::map<std::string, double>>>();
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed synthetic spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open synthetic spec '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_synthetic_spec(ss.str());
}

SyntheticCohort generate(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> weights;
    double total = 0.0;
    for (const auto& c : spec.components) {
        weights.push_back(c.weight);
        total += c.weight;
    }

    std::vector<Instance> instances;
    std::vector<std::size_t> truth;
    instances.reserve(spec.n);
    truth.reserve(spec.n);
    char id[32];
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t c = draw_categorical(weights, total, rng);
        const ComponentSpec& comp = spec.components[c];
        Instance inst;
        std::snprintf(id, sizeof id, "s%06zu", i);
        inst.id = id;
        inst.embedding.resize(spec.dim);
        for (std::size_t e = 0; e < spec.dim; ++e) inst.embedding[e] = comp.mean[e] + comp.spread * normal(rng);
        inst.group = unit(rng) < comp.frac_a ? Group::A : Group::B;
        const bool in_a = inst.group == Group::A;
        inst.correct = unit(rng) < (in_a ? comp.acc_a : comp.acc_b);
        inst.severity = std::max(0.0, (in_a ? comp.sev_mean_a : comp.sev_mean_b) + comp.sev_std * normal(rng));
        for (const auto& [name, dists] : spec.attribute_decor) {
            const auto& dist = dists[c];
            double mass = 0.0;
            std::vector<double> w;
            for (const auto& [value, p] : dist) {
                w.push_back(p);
                mass += p;
            }
            auto it = dist.begin();
            std::advance(it, static_cast<long>(draw_categorical(w, mass, rng)));
            inst.attributes.emplace(name, case_fold(it->first));
        }
        inst.attributes.emplace(kTruthAttribute, std::to_string(c));
        instances.push_back(std::move(inst));
        truth.push_back(c);
    }
    return SyntheticCohort{Cohort(std::move(instances)), std::move(truth)};
}

RecallScore recall_score(const std::vector<bool>& flagged_clusters, const std::vector<std::size_t>& assignment,
                         const std::vector<std::size_t>& truth, std::size_t planted_component) {
    if (assignment.size() != truth.size()) throw ValidationError("assignment and truth labels differ in length");
    std::size_t planted = 0, captured = 0, flagged = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (assignment[i] >= flagged_clusters.size()) throw ValidationError("cluster index out of range");
        const bool in_flagged = flagged_clusters[assignment[i]];
        const bool is_planted = truth[i] == planted_component;
        planted += is_planted;
        flagged += in_flagged;
        captured += in_flagged && is_planted;
    }
    if (planted == 0) throw ValidationError("no planted instances");
    RecallScore s;
    s.recall = static_cast<double>(captured) / static_cast<double>(planted);
    s.precision = flagged == 0 ? 0.0 : static_cast<double>(captured) / static_cast<double>(flagged);
    return s;
}

}  // namespace slogan
