#include "pth/xss_scanner.hpp"

#include "pth/fixture_server.hpp"
#include "pth/http_client.hpp"
#include "support/fixture_helpers.hpp"

#include <doctest.h>

#include <set>

using namespace pth;
using pth::testing::crawl_and_derive;
using pth::testing::point_for_path;

TEST_CASE("marker suffixes are deterministic and well formed") {
    CHECK(marker_suffix("seed") == marker_suffix("seed"));
    CHECK(marker_suffix("seed") != marker_suffix("seed2"));
    CHECK(marker_suffix("x").size() == 8);
    for (char c : marker_suffix("anything"))
        CHECK((std::isalnum(static_cast<unsigned char>(c)) != 0));
}

TEST_CASE("corpus file loads and matches the built-in set") {
    auto corpus = load_xss_corpus(std::string(PTHWEB_SOURCE_DIR) +
                                  "/data/payloads/xss_payloads.json");
    CHECK(corpus == builtin_xss_corpus());
}

TEST_CASE("reflection probing classifies contexts") {
    FixtureServer server(default_fixture_spec());
    HttpClient client;
    DerivedPoints derived = crawl_and_derive(server.base_url(), client);
    ProbeOptions options;

    SUBCASE("raw body echo") {
        auto reflections =
            probe_reflection(point_for_path(derived, "/search", "q"), options, client);
        REQUIRE(reflections.size() == 1);
        CHECK(reflections[0].context == XssContext::HtmlBody);
        CHECK(reflections[0].snippet.find("pthXSS") != std::string::npos);
    }
    SUBCASE("escaped echo is EncodedOnly") {
        auto reflections =
            probe_reflection(point_for_path(derived, "/safe-search", "q"), options, client);
        REQUIRE(reflections.size() == 1);
        CHECK(reflections[0].context == XssContext::EncodedOnly);
    }
    SUBCASE("attribute echo that strips angle brackets but keeps quotes") {
        auto reflections =
            probe_reflection(point_for_path(derived, "/attr", "q"), options, client);
        REQUIRE(reflections.size() == 1);
        CHECK(reflections[0].context == XssContext::AttributeValue);
    }
    SUBCASE("script-string echo") {
        auto reflections =
            probe_reflection(point_for_path(derived, "/js", "q"), options, client);
        REQUIRE(reflections.size() == 1);
        CHECK(reflections[0].context == XssContext::ScriptBlock);
    }
    SUBCASE("parameter that is never echoed") {
        auto reflections =
            probe_reflection(point_for_path(derived, "/slow", "id"), options, client);
        CHECK(reflections.empty());
    }
}

TEST_CASE("verification emits findings only for unescaped reflections") {
    FixtureServer server(default_fixture_spec());
    HttpClient client;
    DerivedPoints derived = crawl_and_derive(server.base_url(), client);
    ProbeOptions options;
    const auto& corpus = builtin_xss_corpus();

    SUBCASE("html body gets the script-tag payload") {
        auto finding = verify_xss(point_for_path(derived, "/search", "q"),
                                  XssContext::HtmlBody, corpus, options, client);
        REQUIRE(finding.has_value());
        CHECK(finding->confirmed);
        CHECK(finding->payload.find("<script>") != std::string::npos);
        // The evidence snippet carries the payload's active portion verbatim.
        CHECK(finding->evidence.find(finding->payload) != std::string::npos);
    }
    SUBCASE("attribute context falls through to the quote-breaking payload") {
        auto finding = verify_xss(point_for_path(derived, "/attr", "q"),
                                  XssContext::AttributeValue, corpus, options, client);
        REQUIRE(finding.has_value());
        // The tag-based payload cannot survive the angle-bracket strip; the
        // attribute-event payload can.
        CHECK(finding->payload.find("onfocus=") != std::string::npos);
        CHECK(finding->payload.find("<svg") == std::string::npos);
    }
    SUBCASE("script block payload") {
        auto finding = verify_xss(point_for_path(derived, "/js", "q"),
                                  XssContext::ScriptBlock, corpus, options, client);
        REQUIRE(finding.has_value());
        CHECK(finding->payload.find("();//") != std::string::npos);
    }
    SUBCASE("escaping endpoint defeats every payload") {
        auto finding = verify_xss(point_for_path(derived, "/safe-search", "q"),
                                  XssContext::HtmlBody, corpus, options, client);
        CHECK_FALSE(finding.has_value());
    }
}

TEST_CASE("fixture scan finds exactly the seeded XSS endpoints") {
    FixtureServer server(default_fixture_spec());
    HttpClient client;
    DerivedPoints derived = crawl_and_derive(server.base_url(), client);

    XssOptions options;
    options.workers = 2;
    XssScanOutcome outcome =
        scan_xss(derived.points, builtin_xss_corpus(), options, client);

    std::set<std::string> found_paths;
    for (const auto& finding : outcome.findings) {
        CHECK(finding.confirmed);
        CHECK(finding.severity == "Medium");
        CHECK(finding.context != XssContext::EncodedOnly);
        found_paths.insert(Url::parse(finding.point.page_url)->path);
    }
    CHECK(found_paths == std::set<std::string>{"/search", "/attr", "/js"});
    CHECK(outcome.findings.size() == 3); // one finding per (point, context)
}

TEST_CASE("scan output is independent of the worker count") {
    FixtureServer server(default_fixture_spec());
    HttpClient client;
    DerivedPoints derived = crawl_and_derive(server.base_url(), client);

    XssOptions serial;
    serial.workers = 1;
    auto first = scan_xss(derived.points, builtin_xss_corpus(), serial, client);

    XssOptions parallel;
    parallel.workers = 8;
    auto second = scan_xss(derived.points, builtin_xss_corpus(), parallel, client);

    REQUIRE(first.findings.size() == second.findings.size());
    for (size_t i = 0; i < first.findings.size(); ++i) {
        CHECK(first.findings[i] == second.findings[i]); // byte-identical payloads too
    }
}

TEST_CASE("empty point list yields empty findings") {
    HttpClient client;
    XssOptions options;
    auto outcome = scan_xss({}, builtin_xss_corpus(), options, client);
    CHECK(outcome.findings.empty());
}
