// TLS scan facets and the pluggable scan adapter. Five facets (protocols,
// ciphers, curves, certificate, vulnerability checks) run independently and
// merge into one TlsScanResult. Facet data arrives either from per-facet
// fixture files or from external commands that print the same neutral
// fragment JSON (see docs/scan_fragments.md).

#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pth {

enum class TlsVersion { Ssl2, Ssl3, V1_0, V1_1, V1_2, V1_3 };

std::string tls_version_name(TlsVersion v);
std::optional<TlsVersion> tls_version_from_name(const std::string& name);
// Accepts the rule-file decimal encoding (1.0, 1.1, 1.2, 1.3).
std::optional<TlsVersion> tls_version_from_decimal(double value);
double tls_version_to_decimal(TlsVersion v);

enum class ScanFacet { Protocols, Ciphers, Curves, Certificate, Vulnerabilities };
inline constexpr ScanFacet kAllFacets[] = {ScanFacet::Protocols, ScanFacet::Ciphers,
                                           ScanFacet::Curves, ScanFacet::Certificate,
                                           ScanFacet::Vulnerabilities};
std::string facet_name(ScanFacet f);

struct ProtocolStatus {
    TlsVersion version;
    bool offered = false;
    bool operator==(const ProtocolStatus&) const = default;
};

struct CipherEntry {
    TlsVersion protocol_version;
    std::string suite_name;
    bool operator==(const CipherEntry&) const = default;
};

struct CertificateInfo {
    std::string key_algorithm;
    int key_length_bits = 0;
    std::string subject;
    std::string not_after;
    bool operator==(const CertificateInfo&) const = default;
};

struct VulnerabilityCheck {
    std::string check_id;
    std::string status; // ok | vulnerable | unknown
    std::string detail;
    bool operator==(const VulnerabilityCheck&) const = default;
};

struct TlsScanResult {
    std::string target;
    std::vector<ProtocolStatus> protocols;
    std::vector<CipherEntry> cipher_suites;
    std::vector<std::string> curves;
    std::optional<CertificateInfo> certificate;
    std::vector<VulnerabilityCheck> vulnerability_checks;

    // Scan metadata, not facet data.
    std::vector<std::string> failed_facets;
    std::vector<std::string> warnings;

    bool operator==(const TlsScanResult&) const = default;

    // Cross-facet consistency notes, e.g. a cipher entry referencing a
    // protocol version that is not offered. Only meaningful when both
    // facets are populated.
    std::vector<std::string> consistency_issues() const;
};

enum class ScanAdapterMode { External, FixtureFile };

struct ScanAdapterConfig {
    ScanAdapterMode mode = ScanAdapterMode::FixtureFile;
    // External mode: command template per facet, "{url}" substituted.
    std::map<ScanFacet, std::string> commands;
    // FixtureFile mode: fragment file per facet.
    std::map<ScanFacet, std::string> fixture_paths;
    int timeout_s = 60;
};

class ScanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AdapterParseError : public ScanError {
public:
    AdapterParseError(ScanFacet facet, const std::string& detail)
        : ScanError(facet_name(facet) + ": " + detail), facet(facet) {}
    ScanFacet facet;
};

class AllFacetsFailed : public ScanError {
public:
    using ScanError::ScanError;
};

// Parse one neutral fragment. The fragment may only populate its own
// facet's section; anything else is an AdapterParseError.
TlsScanResult parse_fragment(ScanFacet facet, const std::string& raw);

// Runs the requested facets concurrently and merges fragments in fixed
// facet order. A failing facet is recorded in failed_facets and its
// section stays empty; only all facets failing is an error.
TlsScanResult run_scan(const std::string& target, const ScanAdapterConfig& config,
                       const std::set<ScanFacet>& facets);

} // namespace pth
