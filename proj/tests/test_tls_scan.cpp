#include "pth/tls_scan.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

using namespace pth;
namespace fs = std::filesystem;

namespace {
const fs::path kFragmentDir =
    fs::path(PTHWEB_SOURCE_DIR) / "tests" / "data" / "scan_fragments";

ScanAdapterConfig fixture_config() {
    ScanAdapterConfig config;
    config.mode = ScanAdapterMode::FixtureFile;
    for (ScanFacet f : kAllFacets)
        config.fixture_paths[f] = (kFragmentDir / (facet_name(f) + ".json")).string();
    return config;
}

const std::set<ScanFacet> kEveryFacet(std::begin(kAllFacets), std::end(kAllFacets));
} // namespace

TEST_CASE("tls version parsing") {
    CHECK(tls_version_from_decimal(1.2) == TlsVersion::V1_2);
    CHECK(tls_version_from_decimal(1.1) == TlsVersion::V1_1);
    CHECK_FALSE(tls_version_from_decimal(2.5).has_value());
    CHECK(tls_version_from_name("SSL3") == TlsVersion::Ssl3);
    CHECK(tls_version_from_name("tls1.3") == TlsVersion::V1_3);
    CHECK(tls_version_name(TlsVersion::V1_0) == "1.0");
}

TEST_CASE("parse_fragment accepts its own section only") {
    auto fragment =
        parse_fragment(ScanFacet::Protocols, R"({"protocols":[{"version":"1.2","offered":true}]})");
    REQUIRE(fragment.protocols.size() == 1);
    CHECK(fragment.protocols[0].version == TlsVersion::V1_2);
    CHECK(fragment.protocols[0].offered);

    auto ciphers = parse_fragment(
        ScanFacet::Ciphers,
        R"({"cipher_suites":[{"protocol_version":1.2,"suite_name":"TLS_ECDHE_RSA_WITH_AES_256_GCM_SHA384"}]})");
    REQUIRE(ciphers.cipher_suites.size() == 1);
    CHECK(ciphers.cipher_suites[0].suite_name == "TLS_ECDHE_RSA_WITH_AES_256_GCM_SHA384");

    // A curves fragment smuggling a certificate section is rejected.
    CHECK_THROWS_AS(
        parse_fragment(ScanFacet::Curves,
                       R"({"curves":[],"certificate":{"key_algorithm":"EC","key_length_bits":256}})"),
        AdapterParseError);
    CHECK_THROWS_AS(parse_fragment(ScanFacet::Curves, "not json"), AdapterParseError);
    CHECK_THROWS_AS(parse_fragment(ScanFacet::Certificate,
                                   R"({"certificate":{"key_algorithm":"EC","key_length_bits":0}})"),
                    AdapterParseError);
}

TEST_CASE("fixture-file scan merges the five facets") {
    TlsScanResult result = run_scan("https://t.example", fixture_config(), kEveryFacet);
    CHECK(result.target == "https://t.example");
    REQUIRE(result.protocols.size() == 3);
    REQUIRE(result.cipher_suites.size() == 1);
    CHECK(result.cipher_suites[0].suite_name == "TLS_ECDHE_RSA_WITH_AES_256_GCM_SHA384");
    REQUIRE(result.curves.size() == 1);
    CHECK(result.curves[0] == "brainpoolp256r1");
    REQUIRE(result.certificate.has_value());
    CHECK(result.certificate->key_length_bits == 256);
    CHECK(result.vulnerability_checks.size() == 2);
    CHECK(result.failed_facets.empty());
    CHECK(result.consistency_issues().empty());
}

TEST_CASE("single-facet scan leaves other sections empty") {
    TlsScanResult result =
        run_scan("https://t.example", fixture_config(), {ScanFacet::Certificate});
    CHECK(result.certificate.has_value());
    CHECK(result.protocols.empty());
    CHECK(result.cipher_suites.empty());
    CHECK(result.curves.empty());
    CHECK(result.vulnerability_checks.empty());
}

TEST_CASE("facet failure is partial, not fatal") {
    ScanAdapterConfig config = fixture_config();
    config.fixture_paths[ScanFacet::Curves] = "/nonexistent/curves.json";
    TlsScanResult result = run_scan("https://t.example", config, kEveryFacet);
    REQUIRE(result.failed_facets.size() == 1);
    CHECK(result.failed_facets[0] == "curves");
    CHECK(result.curves.empty());
    CHECK(result.certificate.has_value()); // other facets unaffected
}

TEST_CASE("all facets failing is an error") {
    ScanAdapterConfig config;
    config.mode = ScanAdapterMode::FixtureFile;
    for (ScanFacet f : kAllFacets) config.fixture_paths[f] = "/nonexistent/nope.json";
    CHECK_THROWS_AS(run_scan("https://t.example", config, kEveryFacet), AllFacetsFailed);
}

TEST_CASE("external mode validates command templates up front") {
    ScanAdapterConfig config;
    config.mode = ScanAdapterMode::External;
    config.commands[ScanFacet::Protocols] = "echo {url}";
    // Remaining facets have no command.
    CHECK_THROWS_AS(run_scan("https://t.example", config, kEveryFacet), ScanError);
}

TEST_CASE("external mode runs commands and parses their output") {
    ScanAdapterConfig config;
    config.mode = ScanAdapterMode::External;
    config.commands[ScanFacet::Curves] = "echo '{\"curves\":[\"x25519\"]}' # {url}";
    TlsScanResult result = run_scan("https://t.example", config, {ScanFacet::Curves});
    REQUIRE(result.curves.size() == 1);
    CHECK(result.curves[0] == "x25519");

    SUBCASE("nonzero exit is a facet failure") {
        config.commands[ScanFacet::Curves] = "false";
        config.commands[ScanFacet::Certificate] =
            "echo '{\"certificate\":{\"key_algorithm\":\"EC\",\"key_length_bits\":256}}'";
        TlsScanResult partial = run_scan("https://t.example", config,
                                         {ScanFacet::Curves, ScanFacet::Certificate});
        CHECK(partial.failed_facets == std::vector<std::string>{"curves"});
        CHECK(partial.certificate.has_value());
    }
}

TEST_CASE("external command timeout marks the facet failed") {
    ScanAdapterConfig config;
    config.mode = ScanAdapterMode::External;
    config.timeout_s = 1;
    config.commands[ScanFacet::Curves] = "sleep 5";
    config.commands[ScanFacet::Certificate] =
        "echo '{\"certificate\":{\"key_algorithm\":\"EC\",\"key_length_bits\":256}}'";
    TlsScanResult result = run_scan("https://t.example", config,
                                    {ScanFacet::Curves, ScanFacet::Certificate});
    REQUIRE(result.failed_facets == std::vector<std::string>{"curves"});
    bool timed_out = false;
    for (const auto& w : result.warnings)
        if (w.find("timed out") != std::string::npos) timed_out = true;
    CHECK(timed_out);
    CHECK(result.certificate.has_value());
}

TEST_CASE("https precondition") {
    CHECK_THROWS_AS(run_scan("http://t.example", fixture_config(), kEveryFacet), ScanError);
}

TEST_CASE("repeated fixture scans are identical and facet-order independent") {
    TlsScanResult first = run_scan("https://t.example", fixture_config(), kEveryFacet);
    TlsScanResult second = run_scan("https://t.example", fixture_config(), kEveryFacet);
    CHECK(first == second);

    // Any subset permutation: merge order is fixed by facet, not by
    // completion order; spot-check with shuffled request sets.
    std::vector<ScanFacet> facets(std::begin(kAllFacets), std::end(kAllFacets));
    std::mt19937 rng(7);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(facets.begin(), facets.end(), rng);
        std::set<ScanFacet> as_set(facets.begin(), facets.end());
        CHECK(run_scan("https://t.example", fixture_config(), as_set) == first);
    }
}

TEST_CASE("consistency issues flag ciphers under non-offered protocols") {
    TlsScanResult result;
    result.protocols.push_back({TlsVersion::V1_2, true});
    result.cipher_suites.push_back({TlsVersion::V1_1, "TLS_SOMETHING"});
    auto issues = result.consistency_issues();
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].find("TLS_SOMETHING") != std::string::npos);
}
