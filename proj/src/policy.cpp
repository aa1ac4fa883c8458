#include "pth/policy.hpp"

#include "pth/util.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pth {

using nlohmann::json;
using nlohmann::ordered_json;

std::string category_name(PolicyCategory c) {
    switch (c) {
        case PolicyCategory::Recommended: return "Recommended";
        case PolicyCategory::Legacy: return "Legacy";
        case PolicyCategory::NotListed: return "NotListed";
    }
    return "?";
}

std::optional<PolicyCategory> category_from_name(const std::string& name) {
    if (name == "Recommended") return PolicyCategory::Recommended;
    if (name == "Legacy") return PolicyCategory::Legacy;
    if (name == "NotListed") return PolicyCategory::NotListed;
    return std::nullopt;
}

std::string element_kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::Protocol: return "Protocol";
        case ElementKind::CipherSuite: return "CipherSuite";
        case ElementKind::Curve: return "Curve";
        case ElementKind::CertificateKey: return "CertificateKey";
    }
    return "?";
}

PolicyError::PolicyError(PolicyErrorKind kind, std::string path, std::string detail,
                         int entry_index, std::string field)
    : std::runtime_error(path + ": " + detail +
                         (entry_index >= 0 ? " (entry " + std::to_string(entry_index) +
                                                 (field.empty() ? "" : ", field '" + field + "'") +
                                                 ")"
                                           : "")),
      kind(kind),
      path(std::move(path)),
      entry_index(entry_index),
      field(std::move(field)) {}

namespace {

json load_json_array(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PolicyError(PolicyErrorKind::MissingFile, path, "file not found");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw PolicyError(PolicyErrorKind::MalformedJson, path,
                          "invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_array())
        throw PolicyError(PolicyErrorKind::SchemaViolation, path, "top level must be an array");
    return doc;
}

// category accepts exactly "R" or "L" in rule files.
PolicyCategory parse_rule_category(const json& entry, const std::string& path, int index) {
    if (!entry.contains("category") || !entry["category"].is_string())
        throw PolicyError(PolicyErrorKind::SchemaViolation, path, "missing string category",
                          index, "category");
    std::string c = entry["category"].get<std::string>();
    if (c == "R") return PolicyCategory::Recommended;
    if (c == "L") return PolicyCategory::Legacy;
    throw PolicyError(PolicyErrorKind::SchemaViolation, path,
                      "category must be \"R\" or \"L\", got \"" + c + "\"", index, "category");
}

std::string require_string(const json& entry, const char* field, const std::string& path,
                           int index) {
    if (!entry.contains(field) || !entry[field].is_string() ||
        entry[field].get<std::string>().empty())
        throw PolicyError(PolicyErrorKind::SchemaViolation, path,
                          std::string("missing non-empty string ") + field, index, field);
    return entry[field].get<std::string>();
}

int require_positive_int(const json& entry, const char* field, const std::string& path,
                         int index) {
    if (!entry.contains(field) || !entry[field].is_number_integer())
        throw PolicyError(PolicyErrorKind::SchemaViolation, path,
                          std::string("missing integer ") + field, index, field);
    int v = entry[field].get<int>();
    if (v <= 0)
        throw PolicyError(PolicyErrorKind::SchemaViolation, path,
                          std::string(field) + " must be positive", index, field);
    return v;
}

std::string read_sidecar_label(const std::string& cipher_path) {
    std::filesystem::path sidecar =
        std::filesystem::path(cipher_path).parent_path() / "guide_version.json";
    std::ifstream in(sidecar);
    if (!in) return "";
    try {
        json doc = json::parse(in);
        return doc.value("label", "");
    } catch (const json::exception&) {
        return ""; // sidecar is optional metadata, never fatal
    }
}

} // namespace

PolicyRuleSet load_rule_set(const std::string& cipher_path, const std::string& key_path,
                            const std::string& curve_path) {
    PolicyRuleSet rules;

    json ciphers = load_json_array(cipher_path);
    for (size_t i = 0; i < ciphers.size(); ++i) {
        const json& entry = ciphers[i];
        if (!entry.is_object())
            throw PolicyError(PolicyErrorKind::SchemaViolation, cipher_path,
                              "entry must be an object", static_cast<int>(i));
        CipherSuiteRule rule;
        rule.cipher_suite = require_string(entry, "cipher_suite", cipher_path, i);
        if (!entry.contains("tls") || !entry["tls"].is_number())
            throw PolicyError(PolicyErrorKind::SchemaViolation, cipher_path,
                              "missing numeric tls", static_cast<int>(i), "tls");
        auto version = tls_version_from_decimal(entry["tls"].get<double>());
        if (!version)
            throw PolicyError(PolicyErrorKind::SchemaViolation, cipher_path,
                              "tls must be one of 1.0, 1.1, 1.2, 1.3", static_cast<int>(i),
                              "tls");
        rule.tls = *version;
        rule.category = parse_rule_category(entry, cipher_path, i);
        for (const auto& existing : rules.cipher_rules) {
            if (iequals(existing.cipher_suite, rule.cipher_suite) && existing.tls == rule.tls)
                throw PolicyError(PolicyErrorKind::DuplicateRule, cipher_path,
                                  "duplicate rule for (" + rule.cipher_suite + ", " +
                                      tls_version_name(rule.tls) + ")",
                                  static_cast<int>(i));
        }
        rules.cipher_rules.push_back(std::move(rule));
    }

    json keys = load_json_array(key_path);
    for (size_t i = 0; i < keys.size(); ++i) {
        const json& entry = keys[i];
        if (!entry.is_object())
            throw PolicyError(PolicyErrorKind::SchemaViolation, key_path,
                              "entry must be an object", static_cast<int>(i));
        KeyRule rule;
        rule.key = require_string(entry, "key", key_path, i);
        rule.min_length = require_positive_int(entry, "min_length", key_path, i);
        rule.max_length = require_positive_int(entry, "max_length", key_path, i);
        if (rule.min_length > rule.max_length)
            throw PolicyError(PolicyErrorKind::SchemaViolation, key_path,
                              "min_length " + std::to_string(rule.min_length) +
                                  " exceeds max_length " + std::to_string(rule.max_length),
                              static_cast<int>(i), "min_length");
        rule.category = parse_rule_category(entry, key_path, i);
        for (const auto& existing : rules.key_rules) {
            if (iequals(existing.key, rule.key) && rule.min_length <= existing.max_length &&
                existing.min_length <= rule.max_length)
                throw PolicyError(PolicyErrorKind::DuplicateRule, key_path,
                                  "overlapping length range for algorithm " + rule.key,
                                  static_cast<int>(i));
        }
        rules.key_rules.push_back(std::move(rule));
    }

    json curves = load_json_array(curve_path);
    for (size_t i = 0; i < curves.size(); ++i) {
        const json& entry = curves[i];
        if (!entry.is_object())
            throw PolicyError(PolicyErrorKind::SchemaViolation, curve_path,
                              "entry must be an object", static_cast<int>(i));
        CurveRule rule;
        rule.elliptic_curve = require_string(entry, "elliptic_curve", curve_path, i);
        rule.category = parse_rule_category(entry, curve_path, i);
        for (const auto& existing : rules.curve_rules) {
            if (iequals(existing.elliptic_curve, rule.elliptic_curve))
                throw PolicyError(PolicyErrorKind::DuplicateRule, curve_path,
                                  "duplicate curve " + rule.elliptic_curve,
                                  static_cast<int>(i));
        }
        rules.curve_rules.push_back(std::move(rule));
    }

    rules.source.cipher_path = cipher_path;
    rules.source.key_path = key_path;
    rules.source.curve_path = curve_path;
    rules.source.loaded_at = iso8601_now();
    rules.source.guide_version = read_sidecar_label(cipher_path);
    return rules;
}

PolicyRuleSet load_rule_set_dir(const std::string& dir) {
    std::filesystem::path base(dir);
    return load_rule_set((base / "cipher_suites.json").string(),
                         (base / "certificate_key.json").string(),
                         (base / "elliptic_curves.json").string());
}

namespace {

const char* category_letter(PolicyCategory c) {
    return c == PolicyCategory::Recommended ? "R" : "L";
}

} // namespace

ordered_json cipher_rules_to_json(const PolicyRuleSet& rules) {
    ordered_json out = ordered_json::array();
    for (const auto& r : rules.cipher_rules) {
        out.push_back({{"cipher_suite", r.cipher_suite},
                       {"tls", tls_version_to_decimal(r.tls)},
                       {"category", category_letter(r.category)}});
    }
    return out;
}

ordered_json key_rules_to_json(const PolicyRuleSet& rules) {
    ordered_json out = ordered_json::array();
    for (const auto& r : rules.key_rules) {
        out.push_back({{"key", r.key},
                       {"min_length", r.min_length},
                       {"max_length", r.max_length},
                       {"category", category_letter(r.category)}});
    }
    return out;
}

ordered_json curve_rules_to_json(const PolicyRuleSet& rules) {
    ordered_json out = ordered_json::array();
    for (const auto& r : rules.curve_rules) {
        out.push_back(
            {{"elliptic_curve", r.elliptic_curve}, {"category", category_letter(r.category)}});
    }
    return out;
}

PolicyEngine::PolicyEngine(PolicyRuleSet rules) : rules_(std::move(rules)) {
    for (size_t i = 0; i < rules_.cipher_rules.size(); ++i) {
        const auto& r = rules_.cipher_rules[i];
        cipher_index_[{to_lower(r.cipher_suite), r.tls}] = i;
        auto [it, inserted] = protocol_best_.try_emplace(r.tls, r.category);
        if (!inserted && r.category == PolicyCategory::Recommended)
            it->second = PolicyCategory::Recommended;
    }
    for (size_t i = 0; i < rules_.key_rules.size(); ++i)
        key_index_[to_lower(rules_.key_rules[i].key)].push_back(i);
    for (size_t i = 0; i < rules_.curve_rules.size(); ++i)
        curve_index_[to_lower(rules_.curve_rules[i].elliptic_curve)] = i;
}

ComplianceVerdict PolicyEngine::classify_cipher_suite(const std::string& name,
                                                      TlsVersion version) const {
    ComplianceVerdict v;
    v.element_kind = ElementKind::CipherSuite;
    v.element_id = name + "@" + tls_version_name(version);
    auto it = cipher_index_.find({to_lower(name), version});
    if (it == cipher_index_.end()) return v;
    const auto& rule = rules_.cipher_rules[it->second];
    v.category = rule.category;
    v.matched_rule = ordered_json{{"cipher_suite", rule.cipher_suite},
                                  {"tls", tls_version_to_decimal(rule.tls)},
                                  {"category", category_letter(rule.category)}};
    return v;
}

ComplianceVerdict PolicyEngine::classify_key(const std::string& algorithm,
                                             int length_bits) const {
    ComplianceVerdict v;
    v.element_kind = ElementKind::CertificateKey;
    v.element_id = algorithm + "-" + std::to_string(length_bits);
    auto it = key_index_.find(to_lower(algorithm));
    if (it == key_index_.end()) return v;
    for (size_t idx : it->second) {
        const auto& rule = rules_.key_rules[idx];
        if (length_bits >= rule.min_length && length_bits <= rule.max_length) {
            v.category = rule.category;
            v.matched_rule = ordered_json{{"key", rule.key},
                                          {"min_length", rule.min_length},
                                          {"max_length", rule.max_length},
                                          {"category", category_letter(rule.category)}};
            return v;
        }
    }
    return v;
}

ComplianceVerdict PolicyEngine::classify_curve(const std::string& name) const {
    ComplianceVerdict v;
    v.element_kind = ElementKind::Curve;
    v.element_id = name;
    auto it = curve_index_.find(to_lower(trim(name)));
    if (it == curve_index_.end()) return v;
    const auto& rule = rules_.curve_rules[it->second];
    v.category = rule.category;
    v.matched_rule = ordered_json{{"elliptic_curve", rule.elliptic_curve},
                                  {"category", category_letter(rule.category)}};
    return v;
}

ComplianceVerdict PolicyEngine::classify_protocol(TlsVersion version) const {
    ComplianceVerdict v;
    v.element_kind = ElementKind::Protocol;
    v.element_id = tls_version_name(version);
    auto it = protocol_best_.find(version);
    if (it == protocol_best_.end()) return v;
    v.category = it->second;
    v.matched_rule = ordered_json{{"derived_from", "cipher_suites"},
                                  {"tls", tls_version_to_decimal(version)},
                                  {"category", category_letter(it->second)}};
    return v;
}

ComplianceReport PolicyEngine::evaluate_scan(const TlsScanResult& scan) const {
    ComplianceReport report;
    report.present = true;
    report.target = scan.target;
    for (const auto& p : scan.protocols) {
        if (!p.offered) continue;
        report.verdicts.push_back(classify_protocol(p.version));
    }
    for (const auto& c : scan.cipher_suites)
        report.verdicts.push_back(classify_cipher_suite(c.suite_name, c.protocol_version));
    for (const auto& name : scan.curves) report.verdicts.push_back(classify_curve(name));
    if (scan.certificate)
        report.verdicts.push_back(
            classify_key(scan.certificate->key_algorithm, scan.certificate->key_length_bits));
    report.vulnerability_checks = scan.vulnerability_checks;
    report.failed_facets = scan.failed_facets;

    std::sort(report.verdicts.begin(), report.verdicts.end(),
              [](const ComplianceVerdict& a, const ComplianceVerdict& b) {
                  if (a.element_kind != b.element_kind) return a.element_kind < b.element_kind;
                  return a.element_id < b.element_id;
              });
    return report;
}

} // namespace pth
