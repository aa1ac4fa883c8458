#include "pth/http_client.hpp"

#include <doctest.h>
#include <httplib.h>

#include <thread>

using namespace pth;

namespace {

// Small local server for client round trips.
struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    LocalServer() {
        server.Get("/hello", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("hi", "text/plain");
        });
        server.Get("/set-cookie", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Set-Cookie", "session=abc123; Path=/");
            res.set_content("cookie set", "text/plain");
        });
        server.Get("/need-cookie", [](const httplib::Request& req, httplib::Response& res) {
            std::string cookie = req.get_header_value("Cookie");
            res.set_content(cookie.find("session=abc123") != std::string::npos ? "have-cookie"
                                                                               : "no-cookie",
                            "text/plain");
        });
        server.Post("/echo-form", [](const httplib::Request& req, httplib::Response& res) {
            res.set_content(req.body, "text/plain");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        thread.join();
    }
    std::string url(const std::string& path) {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }
};

} // namespace

TEST_CASE("GET round trip with latency measurement") {
    LocalServer server;
    HttpClient client;
    auto response = client.get(server.url("/hello"));
    CHECK(response.ok());
    CHECK(response.status == 200);
    CHECK(response.body == "hi");
    CHECK(response.latency_ms >= 0.0);
}

TEST_CASE("cookies are retained for the session and replayed") {
    LocalServer server;
    HttpClient client;
    CHECK(client.get(server.url("/set-cookie")).ok());
    auto response = client.get(server.url("/need-cookie"));
    CHECK(response.body == "have-cookie");

    HttpClient fresh;
    CHECK(fresh.get(server.url("/need-cookie")).body == "no-cookie");
}

TEST_CASE("form POST preserves field order and encodes values") {
    LocalServer server;
    HttpClient client;
    auto response = client.post_form(server.url("/echo-form"),
                                     {{"b", "2 &x"}, {"a", "1"}, {"user_token", "t"}});
    CHECK(response.body == "b=2%20%26x&a=1&user_token=t");
}

TEST_CASE("transport failure reports an error, not a status") {
    HttpClient client{HttpClientConfig{.timeout_s = 1}};
    auto response = client.get("http://127.0.0.1:1/unreachable");
    CHECK_FALSE(response.ok());
    CHECK(response.status == 0);
    CHECK_FALSE(response.error.empty());
}

TEST_CASE("cookie jar parses attributes away") {
    CookieJar jar;
    jar.store_from_header("h.example", "k=v; Path=/; HttpOnly");
    jar.store_from_header("h.example", "k2=v2");
    CHECK(jar.header_for("h.example") == "k=v; k2=v2");
    CHECK(jar.header_for("other.example").empty());
}

TEST_CASE("rate gate spaces requests per host") {
    HostRateGate gate(30);
    auto start = std::chrono::steady_clock::now();
    gate.acquire("a.example");
    gate.acquire("a.example");
    gate.acquire("a.example");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    CHECK(elapsed >= 55); // two 30ms gaps, scheduler slack allowed

    // Different hosts do not wait on each other.
    HostRateGate gate2(200);
    auto start2 = std::chrono::steady_clock::now();
    gate2.acquire("a.example");
    gate2.acquire("b.example");
    auto elapsed2 = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start2)
                        .count();
    CHECK(elapsed2 < 150);
}
