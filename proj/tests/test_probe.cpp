#include "pth/probe.hpp"

#include "support/fake_fetcher.hpp"

#include <doctest.h>

#include <random>

using namespace pth;
using pth::testing::FakeFetcher;

namespace {

PageRecord make_page(const std::string& url, const std::string& body = "") {
    PageRecord page;
    page.url = url;
    page.status = 200;
    page.content_type = "text/html";
    page.body = body;
    return page;
}

Form login_form() {
    Form form;
    form.source_url = "https://t.example/login";
    form.action = "https://t.example/login";
    form.method = "POST";
    form.fields = {{"username", FieldKind::Text, "guest"},
                   {"password", FieldKind::Password, ""},
                   {"comment", FieldKind::Text, "hi"},
                   {"user_token", FieldKind::Hidden, "tok-old"}};
    return form;
}

} // namespace

TEST_CASE("derive_injection_points: forms, url params and untestable pages") {
    std::vector<PageRecord> pages = {
        make_page("https://t.example/login"),
        make_page("https://t.example/filter?category=Accessories&sort=asc"),
        make_page("https://t.example/bare"),
    };
    std::vector<Form> forms = {login_form()};

    DerivedPoints derived = derive_injection_points(pages, forms);

    // Hidden fields are never probed; three visible fields + two params,
    // ordered by (page_url, form index, parameter).
    REQUIRE(derived.points.size() == 5);
    CHECK(derived.points[0].parameter == "category");
    CHECK(derived.points[0].source == PointSource::UrlParam);
    CHECK(derived.points[0].baseline_value == "Accessories");
    CHECK(derived.points[1].parameter == "sort");
    CHECK(derived.points[2].parameter == "comment");
    CHECK(derived.points[2].source == PointSource::FormField);
    CHECK(derived.points[2].method == "POST");
    CHECK(derived.points[3].parameter == "password");
    CHECK(derived.points[4].parameter == "username");

    REQUIRE(derived.untestable.size() == 1);
    CHECK(derived.untestable[0].url == "https://t.example/bare");

    // Deterministic across runs.
    DerivedPoints again = derive_injection_points(pages, forms);
    CHECK(again.points.size() == derived.points.size());
    for (size_t i = 0; i < derived.points.size(); ++i)
        CHECK(again.points[i] == derived.points[i]);
}

TEST_CASE("send_probe substitutes the payload into a GET url parameter") {
    FakeFetcher fetcher;
    InjectionPoint point;
    point.source = PointSource::UrlParam;
    point.page_url = "https://t.example/filter?category=Accessories&sort=asc";
    point.parameter = "category";
    point.baseline_value = "Accessories";
    point.method = "GET";

    ProbeOptions options;
    auto exchange = send_probe(point, "abc", options, fetcher);
    CHECK(exchange.method == "GET");
    CHECK(exchange.url == "https://t.example/filter?category=abc&sort=asc");
}

TEST_CASE("GET form points encode fields in the query string") {
    FakeFetcher fetcher;
    InjectionPoint point;
    point.source = PointSource::FormField;
    point.page_url = "https://t.example/searchpage";
    Form form;
    form.source_url = point.page_url;
    form.action = "https://t.example/do-search?stale=1";
    form.method = "GET";
    form.fields = {{"q", FieldKind::Text, "demo"}, {"lang", FieldKind::Select, "en"}};
    point.form = form;
    point.parameter = "q";
    point.baseline_value = "demo";
    point.method = "GET";

    ProbeOptions options;
    auto exchange = send_probe(point, "abc", options, fetcher);
    // Form submission replaces the action's own query string.
    CHECK(exchange.url == "https://t.example/do-search?q=abc&lang=en");
    CHECK(exchange.method == "GET");
}

TEST_CASE("send_probe substitutes credentials but never the probed parameter") {
    FakeFetcher fetcher;
    InjectionPoint point;
    point.source = PointSource::FormField;
    point.page_url = "https://t.example/login";
    point.form = login_form();
    point.form->fields[3].kind = FieldKind::Text; // no hidden refresh in this case
    point.parameter = "comment";
    point.baseline_value = "hi";
    point.method = "POST";

    ProbeOptions options;
    options.credentials = Credentials{"admin", "pw"};
    send_probe(point, "PAYLOAD", options, fetcher);

    auto posts = fetcher.post_log();
    REQUIRE(posts.size() == 1);
    const FormFields& sent = posts[0];
    REQUIRE(sent.size() == 4);
    CHECK(sent[0] == std::pair<std::string, std::string>{"username", "admin"});
    CHECK(sent[1] == std::pair<std::string, std::string>{"password", "pw"});
    CHECK(sent[2] == std::pair<std::string, std::string>{"comment", "PAYLOAD"});

    // Probing the username itself: the payload wins over the credential.
    point.parameter = "username";
    point.baseline_value = "guest";
    send_probe(point, "INJ", options, fetcher);
    auto posts2 = fetcher.post_log();
    const FormFields& sent2 = posts2[1];
    CHECK(sent2[0] == std::pair<std::string, std::string>{"username", "INJ"});
    CHECK(sent2[1] == std::pair<std::string, std::string>{"password", "pw"});
}

TEST_CASE("credential pattern matching") {
    CHECK(matches_user_pattern("username"));
    CHECK(matches_user_pattern("LoginName"));
    CHECK(matches_user_pattern("email_address"));
    CHECK_FALSE(matches_user_pattern("comment"));
    CHECK(matches_password_pattern("anything", FieldKind::Password));
    CHECK(matches_password_pattern("passwd", FieldKind::Text));
    CHECK(matches_password_pattern("user_pwd", FieldKind::Text));
    CHECK_FALSE(matches_password_pattern("comment", FieldKind::Text));
}

TEST_CASE("csrf refresh pulls fresh hidden values before each submission") {
    // The form page serves a rotating token; submissions must carry the
    // latest one.
    int render_count = 0;
    FakeFetcher fetcher;
    fetcher.set_handler([&](const std::string& url, const FormFields* fields) -> HttpResponse {
        HttpResponse response;
        response.status = 200;
        response.content_type = "text/html";
        if (!fields) {
            ++render_count;
            response.body = "<form action=\"/login\" method=\"post\">"
                            "<input type=\"text\" name=\"comment\" value=\"hi\">"
                            "<input type=\"hidden\" name=\"user_token\" value=\"tok-" +
                            std::to_string(render_count) + "\"></form>";
        } else {
            response.body = "submitted";
        }
        (void)url;
        return response;
    });

    InjectionPoint point;
    point.source = PointSource::FormField;
    point.page_url = "https://t.example/login";
    Form form;
    form.source_url = point.page_url;
    form.action = "https://t.example/login";
    form.method = "POST";
    form.fields = {{"comment", FieldKind::Text, "hi"},
                   {"user_token", FieldKind::Hidden, "tok-crawl"}};
    point.form = form;
    point.parameter = "comment";
    point.baseline_value = "hi";
    point.method = "POST";

    ProbeOptions options; // csrf_refresh defaults on
    send_probe(point, "one", options, fetcher);
    send_probe(point, "two", options, fetcher);

    auto posts = fetcher.post_log();
    REQUIRE(posts.size() == 2);
    CHECK(posts[0][1] == std::pair<std::string, std::string>{"user_token", "tok-1"});
    CHECK(posts[1][1] == std::pair<std::string, std::string>{"user_token", "tok-2"});

    SUBCASE("refresh failure surfaces as CsrfRefreshFailed") {
        fetcher.set_handler([](const std::string&, const FormFields* fields) {
            HttpResponse response;
            response.status = 200;
            response.body = fields ? "submitted" : "<p>form is gone</p>";
            return response;
        });
        CHECK_THROWS_AS(send_probe(point, "x", options, fetcher), CsrfRefreshFailed);
    }

    SUBCASE("refresh can be disabled") {
        options.csrf_refresh = false;
        send_probe(point, "three", options, fetcher);
        CHECK(fetcher.post_log().back()[1] ==
              std::pair<std::string, std::string>{"user_token", "tok-crawl"});
    }
}

TEST_CASE("capture_baseline needs three good samples") {
    FakeFetcher fetcher;
    fetcher.add_page("https://t.example/p?id=1", "<p>stable page body</p>");

    InjectionPoint point;
    point.source = PointSource::UrlParam;
    point.page_url = "https://t.example/p?id=1";
    point.parameter = "id";
    point.baseline_value = "1";

    ProbeOptions options;
    BaselineProfile profile = capture_baseline(point, options, fetcher);
    CHECK(profile.samples == 3);
    CHECK(profile.status == 200);
    CHECK(profile.body_signature.size() > 0);
    CHECK(fetcher.fetch_log().size() == 3);

    FakeFetcher broken;
    broken.add_error("https://t.example/p?id=1", "connection refused");
    CHECK_THROWS_AS(capture_baseline(point, options, broken), FetchError);
}

TEST_CASE("body signature damps timestamps and long digit runs") {
    std::string a = "<p>row</p> generated 2026-08-09T12:00:01Z id 123456789";
    std::string b = "<p>row</p> generated 2026-08-09T12:00:02Z id 987654321";
    CHECK(body_signature(a) == body_signature(b));
    CHECK(similarity(a, b) == 1.0);

    // Short numbers stay significant.
    CHECK(body_signature("val 42") != body_signature("val 43"));
}

TEST_CASE("similarity formula and properties") {
    CHECK(similarity("x", "x") == 1.0);
    CHECK(similarity("", "") == 1.0);
    CHECK(similarity("", "a") == 0.0);
    CHECK(similarity("a b c d", "a b") == doctest::Approx(2.0 * 2 / 6));
    // Tag boundaries split tokens.
    CHECK(similarity("<b>hi</b>", "hi") == doctest::Approx(2.0 * 1 / 4));

    std::mt19937 rng(99);
    auto random_text = [&] {
        std::string s;
        int words = static_cast<int>(rng() % 12);
        for (int i = 0; i < words; ++i) {
            int len = 1 + static_cast<int>(rng() % 6);
            for (int j = 0; j < len; ++j) s += static_cast<char>('a' + rng() % 26);
            s += rng() % 4 ? " " : "<";
        }
        return s;
    };
    for (int i = 0; i < 200; ++i) {
        std::string a = random_text(), b = random_text();
        double ab = similarity(a, b);
        CHECK(ab == similarity(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(similarity(a, a) == 1.0);
    }
}

TEST_CASE("send_probe does not mutate the point") {
    FakeFetcher fetcher;
    fetcher.add_page("https://t.example/p?id=1", "x");
    InjectionPoint point;
    point.source = PointSource::UrlParam;
    point.page_url = "https://t.example/p?id=1";
    point.parameter = "id";
    point.baseline_value = "1";
    InjectionPoint copy = point;
    ProbeOptions options;
    send_probe(point, "zzz", options, fetcher);
    CHECK(point == copy);
}
