#include "slogan/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

namespace slogan {

char to_char(Group g) noexcept { return g == Group::A ? 'A' : 'B'; }

CohortFormat parse_format(const std::string& name) {
    const std::string f = case_fold(name);
    if (f == "csv") return CohortFormat::csv;
    if (f == "jsonl" || f == "json-lines" || f == "ndjson") return CohortFormat::jsonl;
    throw ValidationError("unknown cohort format '" + name + "' (expected csv or jsonl)");
}

std::string case_fold(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

Cohort::Cohort(std::vector<Instance> instances, std::set<std::string> attribute_schema)
    : instances_(std::move(instances)), schema_(std::move(attribute_schema)) {
    if (instances_.empty()) throw ValidationError("cohort is empty");
    dim_ = instances_.front().embedding.size();
    if (dim_ == 0) throw ValidationError("instance '" + instances_.front().id + "' has an empty embedding");

    const bool infer_schema = schema_.empty();
    std::unordered_set<std::string> ids;
    ids.reserve(instances_.size());
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        const Instance& inst = instances_[i];
        const std::string where = "row " + std::to_string(i + 1) + " (id '" + inst.id + "')";
        if (!ids.insert(inst.id).second) throw ValidationError(where + ": duplicate id");
        if (inst.embedding.size() != dim_) {
            throw ValidationError(where + ": embedding has " + std::to_string(inst.embedding.size()) +
                                  " entries, expected " + std::to_string(dim_));
        }
        for (double v : inst.embedding) {
            if (!std::isfinite(v)) throw ValidationError(where + ": non-finite embedding entry");
        }
        if (!std::isfinite(inst.severity) || inst.severity < 0.0) {
            throw ValidationError(where + ": severity must be finite and non-negative");
        }
        for (const auto& [key, value] : inst.attributes) {
            if (infer_schema) {
                schema_.insert(key);
            } else if (!schema_.count(key)) {
                throw ValidationError(where + ": attribute '" + key + "' is not in the schema");
            }
        }
        (inst.group == Group::A ? n_a_ : n_b_) += 1;
    }
    if (n_a_ == 0) throw ValidationError("group A is empty");
    if (n_b_ == 0) throw ValidationError("group B is empty");
}

Cohort relabel_groups(const Cohort& cohort, const std::string& attribute,
                      const std::set<std::string>& a_values) {
    if (!cohort.attribute_schema().count(attribute)) {
        throw ValidationError("unknown attribute '" + attribute + "'");
    }
    std::set<std::string> folded;
    for (const auto& v : a_values) folded.insert(case_fold(v));

    std::vector<Instance> out = cohort.instances();
    for (Instance& inst : out) {
        auto it = inst.attributes.find(attribute);
        inst.group = (it != inst.attributes.end() && folded.count(it->second)) ? Group::A : Group::B;
    }
    try {
        return Cohort(std::move(out), cohort.attribute_schema());
    } catch (const ValidationError& e) {
        throw ValidationError("relabel on '" + attribute + "': " + e.what());
    }
}

}  // namespace slogan
