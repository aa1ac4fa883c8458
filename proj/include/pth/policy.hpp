// Cryptographic policy engine: loads the three rule files (cipher suites,
// certificate keys, elliptic curves) and classifies scanned elements as
// Recommended, Legacy or NotListed.

#pragma once

#include "pth/tls_scan.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pth {

enum class PolicyCategory { Recommended, Legacy, NotListed };

std::string category_name(PolicyCategory c);
std::optional<PolicyCategory> category_from_name(const std::string& name);

struct CipherSuiteRule {
    std::string cipher_suite; // IANA name
    TlsVersion tls;
    PolicyCategory category; // Recommended or Legacy only
    bool operator==(const CipherSuiteRule&) const = default;
};

struct KeyRule {
    std::string key; // algorithm identifier, e.g. "EC", "RSA"
    int min_length = 0;
    int max_length = 0;
    PolicyCategory category;
    bool operator==(const KeyRule&) const = default;
};

struct CurveRule {
    std::string elliptic_curve;
    PolicyCategory category;
    bool operator==(const CurveRule&) const = default;
};

struct RuleSetSource {
    std::string cipher_path;
    std::string key_path;
    std::string curve_path;
    std::string loaded_at;
    std::string guide_version; // free-text label from the optional sidecar
};

struct PolicyRuleSet {
    std::vector<CipherSuiteRule> cipher_rules;
    std::vector<KeyRule> key_rules;
    std::vector<CurveRule> curve_rules;
    RuleSetSource source;
};

enum class ElementKind { Protocol, CipherSuite, Curve, CertificateKey };
std::string element_kind_name(ElementKind k);

struct ComplianceVerdict {
    ElementKind element_kind;
    std::string element_id;
    PolicyCategory category = PolicyCategory::NotListed;
    // The rule object that fired, absent exactly when NotListed.
    std::optional<nlohmann::ordered_json> matched_rule;

    bool operator==(const ComplianceVerdict&) const = default;
};

struct ComplianceReport {
    bool present = false; // false when the CCN module did not run
    std::string target;
    std::vector<ComplianceVerdict> verdicts; // sorted by (kind, element_id)
    std::vector<VulnerabilityCheck> vulnerability_checks;
    std::vector<std::string> failed_facets;

    bool operator==(const ComplianceReport&) const = default;
};

enum class PolicyErrorKind { MissingFile, MalformedJson, SchemaViolation, DuplicateRule };

class PolicyError : public std::runtime_error {
public:
    PolicyError(PolicyErrorKind kind, std::string path, std::string detail,
                int entry_index = -1, std::string field = "");

    PolicyErrorKind kind;
    std::string path;
    int entry_index; // -1 when not entry-specific
    std::string field;
};

// Loads and validates the three rule files. An optional sidecar
// (guide_version.json, {"label": ...}) next to the cipher file supplies the
// guide version label.
PolicyRuleSet load_rule_set(const std::string& cipher_path, const std::string& key_path,
                            const std::string& curve_path);

// Convenience: load <dir>/cipher_suites.json etc.
PolicyRuleSet load_rule_set_dir(const std::string& dir);

// Re-serialize in the rule-file schema (used for round-trip checks and
// operator tooling).
nlohmann::ordered_json cipher_rules_to_json(const PolicyRuleSet& rules);
nlohmann::ordered_json key_rules_to_json(const PolicyRuleSet& rules);
nlohmann::ordered_json curve_rules_to_json(const PolicyRuleSet& rules);

// Classification over an immutable rule set. Name matching is
// case-insensitive; no aliasing beyond that.
class PolicyEngine {
public:
    explicit PolicyEngine(PolicyRuleSet rules);

    const PolicyRuleSet& rules() const { return rules_; }

    ComplianceVerdict classify_cipher_suite(const std::string& name, TlsVersion version) const;
    ComplianceVerdict classify_key(const std::string& algorithm, int length_bits) const;
    ComplianceVerdict classify_curve(const std::string& name) const;
    // Protocol verdicts derive from cipher rules: best category among rules
    // whose tls field equals the version, NotListed when none reference it.
    ComplianceVerdict classify_protocol(TlsVersion version) const;

    // One verdict per scanned element plus pass-through vulnerability
    // checks; deterministic (kind, element_id) ordering.
    ComplianceReport evaluate_scan(const TlsScanResult& scan) const;

private:
    PolicyRuleSet rules_;
    std::map<std::pair<std::string, TlsVersion>, size_t> cipher_index_;
    std::map<std::string, std::vector<size_t>> key_index_;
    std::map<std::string, size_t> curve_index_;
    std::map<TlsVersion, PolicyCategory> protocol_best_;
};

} // namespace pth
