#include "slogan/cohort.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <unordered_set>

namespace slogan {
namespace {

using json = nlohmann::json;

constexpr const char* kAttrPrefix = "attr_";
constexpr const char* kEmbPrefix = "emb_";

// RFC 4180 field split (no embedded newlines).
std::optional<std::vector<std::string>> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) return std::nullopt;
    fields.push_back(std::move(cur));
    return fields;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

Group parse_group(const std::string& s, std::size_t line, std::size_t row) {
    if (s == "A" || s == "a") return Group::A;
    if (s == "B" || s == "b") return Group::B;
    throw ParseError(line, row, "group must be A or B, got '" + s + "'");
}

bool parse_correct(const std::string& s, std::size_t line, std::size_t row) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw ParseError(line, row, "correct must be 0 or 1, got '" + s + "'");
}

double parse_field(const std::string& s, const std::string& column, std::size_t line,
                   std::size_t row) {
    auto v = parse_double(s);
    if (!v) throw ParseError(line, row, "column '" + column + "': not a number: '" + s + "'");
    if (!std::isfinite(*v)) throw ParseError(line, row, "column '" + column + "': non-finite value");
    return *v;
}

Cohort finish(std::vector<Instance> instances, std::set<std::string> schema) {
    if (instances.empty()) throw ValidationError("cohort file contains no instances");
    return Cohort(std::move(instances), std::move(schema));
}

}  // namespace

Cohort read_cohort_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    // Skip leading blank lines, then read the header.
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (!line.empty()) break;
    }
    if (line.empty()) throw ParseError(lineno, "missing header");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    auto header = split_csv(line);
    if (!header) throw ParseError(lineno, "unterminated quote in header");

    int col_id = -1, col_group = -1, col_correct = -1, col_sev = -1;
    std::vector<int> col_emb;
    std::vector<std::pair<int, std::string>> col_attr;
    std::set<std::string> schema;
    for (int c = 0; c < static_cast<int>(header->size()); ++c) {
        const std::string& name = (*header)[c];
        if (name == "id") col_id = c;
        else if (name == "group") col_group = c;
        else if (name == "correct") col_correct = c;
        else if (name == "severity") col_sev = c;
        else if (name.rfind(kEmbPrefix, 0) == 0) {
            auto idx = parse_double(name.substr(4));
            if (!idx || *idx != static_cast<double>(col_emb.size())) {
                throw ParseError(lineno, "embedding columns must be emb_0..emb_{d-1} in order, got '" +
                                             name + "'");
            }
            col_emb.push_back(c);
        } else if (name.rfind(kAttrPrefix, 0) == 0 && name.size() > 5) {
            std::string attr = name.substr(5);
            if (!schema.insert(attr).second) throw ParseError(lineno, "duplicate column '" + name + "'");
            col_attr.emplace_back(c, std::move(attr));
        } else {
            throw ParseError(lineno, "unexpected column '" + name + "'");
        }
    }
    for (auto [col, name] : {std::pair{col_id, "id"}, std::pair{col_group, "group"},
                             std::pair{col_correct, "correct"}, std::pair{col_sev, "severity"}}) {
        if (col < 0) throw ParseError(lineno, std::string("missing required column '") + name + "'");
    }
    if (col_emb.empty()) throw ParseError(lineno, "missing embedding columns emb_0..");

    std::vector<Instance> instances;
    std::unordered_set<std::string> seen;
    const std::size_t width = header->size();
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) continue;
        ++row;
        auto fields = split_csv(line);
        if (!fields) throw ParseError(lineno, row, "unterminated quote");
        if (fields->size() != width) {
            throw ParseError(lineno, row,
                             "expected " + std::to_string(width) + " fields, found " +
                                 std::to_string(fields->size()) + " (embedding dimension mismatch?)");
        }
        Instance inst;
        inst.id = (*fields)[col_id];
        if (inst.id.empty()) throw ParseError(lineno, row, "empty id");
        if (!seen.insert(inst.id).second) throw ParseError(lineno, row, "duplicate id '" + inst.id + "'");
        inst.group = parse_group((*fields)[col_group], lineno, row);
        inst.correct = parse_correct((*fields)[col_correct], lineno, row);
        inst.severity = parse_field((*fields)[col_sev], "severity", lineno, row);
        if (inst.severity < 0.0) throw ParseError(lineno, row, "severity must be non-negative");
        inst.embedding.reserve(col_emb.size());
        for (std::size_t e = 0; e < col_emb.size(); ++e) {
            inst.embedding.push_back(
                parse_field((*fields)[col_emb[e]], "emb_" + std::to_string(e), lineno, row));
        }
        for (const auto& [col, attr] : col_attr) {
            const std::string& v = (*fields)[col];
            if (!v.empty()) inst.attributes.emplace(attr, case_fold(v));
        }
        instances.push_back(std::move(inst));
    }
    return finish(std::move(instances), std::move(schema));
}

Cohort read_cohort_jsonl(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::size_t row = 0;
    std::size_t dim = 0;
    std::vector<Instance> instances;
    std::unordered_set<std::string> seen;
    std::set<std::string> schema;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        ++row;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, row, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(lineno, row, "expected a JSON object");
        for (const char* key : {"id", "group", "correct", "severity", "embedding"}) {
            if (!obj.contains(key)) throw ParseError(lineno, row, std::string("missing required key '") + key + "'");
        }
        Instance inst;
        try {
            const json& id = obj.at("id");
            inst.id = id.is_string() ? id.get<std::string>() : id.dump();
            inst.group = parse_group(obj.at("group").get<std::string>(), lineno, row);
            const json& corr = obj.at("correct");
            if (corr.is_boolean()) inst.correct = corr.get<bool>();
            else inst.correct = parse_correct(corr.dump(), lineno, row);
            inst.severity = obj.at("severity").get<double>();
            inst.embedding = obj.at("embedding").get<std::vector<double>>();
            if (obj.contains("attributes")) {
                for (const auto& [key, value] : obj.at("attributes").items()) {
                    if (value.is_null()) continue;
                    std::string v = value.is_string() ? value.get<std::string>() : value.dump();
                    inst.attributes.emplace(key, case_fold(v));
                    schema.insert(key);
                }
            }
        } catch (const json::exception& e) {
            throw ParseError(lineno, row, std::string("bad field type: ") + e.what());
        }
        if (inst.id.empty()) throw ParseError(lineno, row, "empty id");
        if (!seen.insert(inst.id).second) throw ParseError(lineno, row, "duplicate id '" + inst.id + "'");
        if (!std::isfinite(inst.severity) || inst.severity < 0.0) {
            throw ParseError(lineno, row, "severity must be finite and non-negative");
        }
        if (inst.embedding.empty()) throw ParseError(lineno, row, "empty embedding");
        if (row == 1) dim = inst.embedding.size();
        if (inst.embedding.size() != dim) {
            throw ParseError(lineno, row,
                             "embedding dimension mismatch: " + std::to_string(inst.embedding.size()) +
                                 " entries, expected " + std::to_string(dim));
        }
        instances.push_back(std::move(inst));
    }
    return finish(std::move(instances), std::move(schema));
}

Cohort load_cohort(const std::filesystem::path& path, CohortFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open cohort file '" + path.string() + "'");
    try {
        return format == CohortFormat::csv ? read_cohort_csv(in) : read_cohort_jsonl(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path.string() + ": " + e.what());
    }
}

void write_cohort_csv(const Cohort& cohort, std::ostream& out) {
    out << "id,group,correct,severity";
    for (std::size_t e = 0; e < cohort.dim(); ++e) out << ",emb_" << e;
    for (const auto& attr : cohort.attribute_schema()) out << ',' << csv_escape(kAttrPrefix + attr);
    out << '\n';
    for (const Instance& inst : cohort.instances()) {
        out << csv_escape(inst.id) << ',' << to_char(inst.group) << ',' << (inst.correct ? '1' : '0')
            << ',' << format_double(inst.severity);
        for (double v : inst.embedding) out << ',' << format_double(v);
        for (const auto& attr : cohort.attribute_schema()) {
            auto it = inst.attributes.find(attr);
            out << ',';
            if (it != inst.attributes.end()) out << csv_escape(it->second);
        }
        out << '\n';
    }
}

void write_cohort_jsonl(const Cohort& cohort, std::ostream& out) {
    for (const Instance& inst : cohort.instances()) {
        json obj;
        obj["id"] = inst.id;
        obj["group"] = std::string(1, to_char(inst.group));
        obj["correct"] = inst.correct ? 1 : 0;
        obj["severity"] = inst.severity;
        obj["embedding"] = inst.embedding;
        obj["attributes"] = json::object();
        for (const auto& [k, v] : inst.attributes) obj["attributes"][k] = v;
        out << obj.dump() << '\n';
    }
}

void write_cohort(const Cohort& cohort, const std::filesystem::path& path, CohortFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write cohort file '" + path.string() + "'");
    if (format == CohortFormat::csv) write_cohort_csv(cohort, out);
    else write_cohort_jsonl(cohort, out);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace slogan
