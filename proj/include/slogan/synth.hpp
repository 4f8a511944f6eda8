#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "slogan/cohort.hpp"

namespace slogan {

struct ComponentSpec {
    double weight = 1.0;
    std::vector<double> mean;
    double spread = 1.0;  // isotropic standard deviation
    double acc_a = 1.0;
    double acc_b = 1.0;
    double sev_mean_a = 0.0;
    double sev_mean_b = 0.0;
    double sev_std = 1.0;
    double frac_a = 0.5;
};

struct SyntheticSpec {
    std::vector<ComponentSpec> components;
    std::size_t n = 0;
    std::size_t dim = 0;
    // attribute name -> one categorical distribution (value -> weight) per component.
    std::map<std::string, std::vector<std::map<std::string, double>>> attribute_decor;

    void validate() const;
};

SyntheticSpec parse_synthetic_spec(const std::string& json_text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

// Name of the attribute carrying the generating component index.
inline constexpr const char* kTruthAttribute = "truth_component";

struct SyntheticCohort {
    Cohort cohort;
    std::vector<std::size_t> truth;  // generating component per instance
};

SyntheticCohort generate(const SyntheticSpec& spec, std::uint64_t seed);

struct RecallScore {
    double recall = 0.0;
    double precision = 0.0;  // 0 when nothing is flagged
};

// Share of planted instances that land in flagged clusters, and share of
// flagged-cluster instances that are planted.
RecallScore recall_score(const std::vector<bool>& flagged_clusters, const std::vector<std::size_t>& assignment,
                         const std::vector<std::size_t>& truth, std::size_t planted_component);

}  // namespace slogan
