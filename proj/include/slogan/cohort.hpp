#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace slogan {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; the message carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    ParseError(std::size_t line, std::size_t row, const std::string& what)
        : Error("line " + std::to_string(line) + " (row " + std::to_string(row) + "): " + what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Data or parameter invariant violated.
class ValidationError : public Error {
public:
    using Error::Error;
};

enum class Group : unsigned char { A, B };

char to_char(Group g) noexcept;

struct Instance {
    std::string id;
    std::vector<double> embedding;
    Group group = Group::A;
    bool correct = false;
    double severity = 0.0;
    std::map<std::string, std::string> attributes;
};

enum class CohortFormat { csv, jsonl };

CohortFormat parse_format(const std::string& name);

// Validated, immutable collection of audited instances.
class Cohort {
public:
    // Throws ValidationError when any invariant fails. An empty schema is
    // replaced by the union of attribute keys found on the instances.
    Cohort(std::vector<Instance> instances, std::set<std::string> attribute_schema = {});

    std::size_t size() const noexcept { return instances_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    const std::vector<Instance>& instances() const noexcept { return instances_; }
    const Instance& operator[](std::size_t i) const { return instances_[i]; }
    const std::set<std::string>& attribute_schema() const noexcept { return schema_; }

    std::span<const double> embedding(std::size_t i) const noexcept {
        return instances_[i].embedding;
    }
    std::size_t group_size(Group g) const noexcept { return g == Group::A ? n_a_ : n_b_; }

private:
    std::vector<Instance> instances_;
    std::set<std::string> schema_;
    std::size_t dim_ = 0;
    std::size_t n_a_ = 0;
    std::size_t n_b_ = 0;
};

Cohort load_cohort(const std::filesystem::path& path, CohortFormat format);
Cohort read_cohort_csv(std::istream& in);
Cohort read_cohort_jsonl(std::istream& in);

void write_cohort(const Cohort& cohort, const std::filesystem::path& path, CohortFormat format);
void write_cohort_csv(const Cohort& cohort, std::ostream& out);
void write_cohort_jsonl(const Cohort& cohort, std::ostream& out);

// One-vs-rest binarization: instances whose `attribute` value is in
// `a_values` become group A, everyone else group B.
Cohort relabel_groups(const Cohort& cohort, const std::string& attribute,
                      const std::set<std::string>& a_values);

std::string case_fold(std::string s);

}  // namespace slogan
