#include "pth/tls_scan.hpp"

#include "pth/url.hpp"
#include "pth/util.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

namespace pth {

using nlohmann::json;

std::string tls_version_name(TlsVersion v) {
    switch (v) {
        case TlsVersion::Ssl2: return "SSL2";
        case TlsVersion::Ssl3: return "SSL3";
        case TlsVersion::V1_0: return "1.0";
        case TlsVersion::V1_1: return "1.1";
        case TlsVersion::V1_2: return "1.2";
        case TlsVersion::V1_3: return "1.3";
    }
    return "?";
}

std::optional<TlsVersion> tls_version_from_name(const std::string& name) {
    std::string n = to_lower(trim(name));
    if (n == "ssl2" || n == "sslv2") return TlsVersion::Ssl2;
    if (n == "ssl3" || n == "sslv3") return TlsVersion::Ssl3;
    if (n == "1.0" || n == "tls1.0") return TlsVersion::V1_0;
    if (n == "1.1" || n == "tls1.1") return TlsVersion::V1_1;
    if (n == "1.2" || n == "tls1.2") return TlsVersion::V1_2;
    if (n == "1.3" || n == "tls1.3") return TlsVersion::V1_3;
    return std::nullopt;
}

std::optional<TlsVersion> tls_version_from_decimal(double value) {
    int tenths = static_cast<int>(std::lround(value * 10.0));
    switch (tenths) {
        case 10: return TlsVersion::V1_0;
        case 11: return TlsVersion::V1_1;
        case 12: return TlsVersion::V1_2;
        case 13: return TlsVersion::V1_3;
        default: return std::nullopt;
    }
}

double tls_version_to_decimal(TlsVersion v) {
    switch (v) {
        case TlsVersion::V1_0: return 1.0;
        case TlsVersion::V1_1: return 1.1;
        case TlsVersion::V1_2: return 1.2;
        case TlsVersion::V1_3: return 1.3;
        default: return 0.0;
    }
}

std::string facet_name(ScanFacet f) {
    switch (f) {
        case ScanFacet::Protocols: return "protocols";
        case ScanFacet::Ciphers: return "ciphers";
        case ScanFacet::Curves: return "curves";
        case ScanFacet::Certificate: return "certificate";
        case ScanFacet::Vulnerabilities: return "vulnerabilities";
    }
    return "?";
}

std::vector<std::string> TlsScanResult::consistency_issues() const {
    std::vector<std::string> issues;
    if (protocols.empty() || cipher_suites.empty()) return issues;
    for (const auto& entry : cipher_suites) {
        bool offered = false;
        for (const auto& p : protocols) {
            if (p.version == entry.protocol_version && p.offered) {
                offered = true;
                break;
            }
        }
        if (!offered)
            issues.push_back("cipher suite " + entry.suite_name + " references protocol " +
                             tls_version_name(entry.protocol_version) +
                             " which is not offered");
    }
    if (certificate && certificate->key_length_bits <= 0)
        issues.push_back("certificate key length must be positive");
    return issues;
}

namespace {

// Section key each facet is allowed to populate.
std::string section_key(ScanFacet f) {
    switch (f) {
        case ScanFacet::Protocols: return "protocols";
        case ScanFacet::Ciphers: return "cipher_suites";
        case ScanFacet::Curves: return "curves";
        case ScanFacet::Certificate: return "certificate";
        case ScanFacet::Vulnerabilities: return "vulnerability_checks";
    }
    return "?";
}

TlsVersion require_version(ScanFacet facet, const json& value, const char* field) {
    std::optional<TlsVersion> v;
    if (value.is_string()) v = tls_version_from_name(value.get<std::string>());
    else if (value.is_number()) v = tls_version_from_decimal(value.get<double>());
    if (!v) throw AdapterParseError(facet, std::string("invalid ") + field);
    return *v;
}

} // namespace

TlsScanResult parse_fragment(ScanFacet facet, const std::string& raw) {
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw AdapterParseError(facet, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw AdapterParseError(facet, "fragment must be a JSON object");

    const std::string allowed = section_key(facet);
    static const std::array<std::string, 5> known = {"protocols", "cipher_suites", "curves",
                                                     "certificate", "vulnerability_checks"};
    for (const auto& key : known) {
        if (key != allowed && doc.contains(key))
            throw AdapterParseError(facet, "fragment contains section '" + key +
                                               "' outside its facet");
    }
    if (!doc.contains(allowed)) throw AdapterParseError(facet, "missing section '" + allowed + "'");

    TlsScanResult fragment;
    const json& section = doc[allowed];
    try {
        switch (facet) {
            case ScanFacet::Protocols:
                for (const auto& item : section) {
                    ProtocolStatus p;
                    p.version = require_version(facet, item.at("version"), "version");
                    p.offered = item.at("offered").get<bool>();
                    fragment.protocols.push_back(p);
                }
                break;
            case ScanFacet::Ciphers:
                for (const auto& item : section) {
                    CipherEntry c;
                    c.protocol_version =
                        require_version(facet, item.at("protocol_version"), "protocol_version");
                    c.suite_name = item.at("suite_name").get<std::string>();
                    if (c.suite_name.empty())
                        throw AdapterParseError(facet, "empty suite_name");
                    fragment.cipher_suites.push_back(std::move(c));
                }
                break;
            case ScanFacet::Curves:
                for (const auto& item : section)
                    fragment.curves.push_back(item.get<std::string>());
                break;
            case ScanFacet::Certificate: {
                if (section.is_null()) break;
                CertificateInfo cert;
                cert.key_algorithm = section.at("key_algorithm").get<std::string>();
                cert.key_length_bits = section.at("key_length_bits").get<int>();
                cert.subject = section.value("subject", "");
                cert.not_after = section.value("not_after", "");
                if (cert.key_length_bits <= 0)
                    throw AdapterParseError(facet, "key_length_bits must be positive");
                fragment.certificate = std::move(cert);
                break;
            }
            case ScanFacet::Vulnerabilities:
                for (const auto& item : section) {
                    VulnerabilityCheck v;
                    v.check_id = item.at("check_id").get<std::string>();
                    v.status = item.value("status", "unknown");
                    v.detail = item.value("detail", "");
                    if (v.status != "ok" && v.status != "vulnerable" && v.status != "unknown")
                        throw AdapterParseError(facet, "invalid status '" + v.status + "'");
                    fragment.vulnerability_checks.push_back(std::move(v));
                }
                break;
        }
    } catch (const json::exception& e) {
        throw AdapterParseError(facet, std::string("schema error: ") + e.what());
    }
    return fragment;
}

namespace {

std::string read_file_or_throw(ScanFacet facet, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw AdapterParseError(facet, "cannot open fixture file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string substitute_url(std::string templ, const std::string& url) {
    size_t pos;
    while ((pos = templ.find("{url}")) != std::string::npos)
        templ.replace(pos, 5, url);
    return templ;
}

std::string run_command(ScanFacet facet, const std::string& command, int timeout_s) {
    // timeout(1) bounds the external tool; its own exit code 124 means the
    // deadline fired.
    std::string wrapped = "timeout " + std::to_string(timeout_s) + " " + command;
    FILE* pipe = popen(wrapped.c_str(), "r");
    if (!pipe) throw AdapterParseError(facet, "failed to spawn: " + command);
    std::string output;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
    int rc = pclose(pipe);
    if (rc != 0) {
        int exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
        if (exit_code == 124)
            throw AdapterParseError(facet, "command timed out after " +
                                               std::to_string(timeout_s) + "s");
        throw AdapterParseError(facet,
                                "command exited with status " + std::to_string(exit_code));
    }
    return output;
}

void merge_into(TlsScanResult& result, const TlsScanResult& fragment) {
    for (const auto& p : fragment.protocols) result.protocols.push_back(p);
    for (const auto& c : fragment.cipher_suites) result.cipher_suites.push_back(c);
    for (const auto& c : fragment.curves) result.curves.push_back(c);
    if (fragment.certificate) result.certificate = fragment.certificate;
    for (const auto& v : fragment.vulnerability_checks) result.vulnerability_checks.push_back(v);
}

} // namespace

TlsScanResult run_scan(const std::string& target, const ScanAdapterConfig& config,
                       const std::set<ScanFacet>& facets) {
    if (facets.empty()) throw ScanError("no facets requested");
    auto url = Url::parse(target);
    if (!url || url->scheme != "https")
        throw ScanError("TLS scan requires an https target, got: " + target);
    if (config.mode == ScanAdapterMode::External) {
        for (ScanFacet f : facets) {
            auto it = config.commands.find(f);
            if (it == config.commands.end() || trim(it->second).empty())
                throw ScanError("external mode: no command configured for facet " +
                                facet_name(f));
        }
    }

    struct FacetOutcome {
        std::optional<TlsScanResult> fragment;
        std::string error;
    };
    std::map<ScanFacet, FacetOutcome> outcomes;
    std::vector<std::pair<ScanFacet, std::future<TlsScanResult>>> tasks;

    for (ScanFacet f : kAllFacets) {
        if (!facets.count(f)) continue;
        tasks.emplace_back(f, std::async(std::launch::async, [&, f]() -> TlsScanResult {
            std::string raw;
            if (config.mode == ScanAdapterMode::FixtureFile) {
                auto it = config.fixture_paths.find(f);
                if (it == config.fixture_paths.end())
                    throw AdapterParseError(f, "no fixture file configured");
                raw = read_file_or_throw(f, it->second);
            } else {
                raw = run_command(f, substitute_url(config.commands.at(f), target),
                                  config.timeout_s);
            }
            return parse_fragment(f, raw);
        }));
    }

    for (auto& [facet, future] : tasks) {
        FacetOutcome outcome;
        try {
            outcome.fragment = future.get();
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
        outcomes[facet] = std::move(outcome);
    }

    // Merge in fixed facet order so concurrency never changes the result.
    TlsScanResult result;
    result.target = target;
    size_t failures = 0;
    for (ScanFacet f : kAllFacets) {
        auto it = outcomes.find(f);
        if (it == outcomes.end()) continue;
        if (it->second.fragment) {
            merge_into(result, *it->second.fragment);
        } else {
            ++failures;
            result.failed_facets.push_back(facet_name(f));
            result.warnings.push_back("facet " + facet_name(f) + " failed: " +
                                      it->second.error);
        }
    }
    if (failures == facets.size())
        throw AllFacetsFailed("all requested TLS scan facets failed for " + target);
    for (auto& issue : result.consistency_issues()) result.warnings.push_back(issue);
    return result;
}

} // namespace pth
