#include "pth/fixture_server.hpp"

#include "pth/html.hpp"
#include "pth/util.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <mutex>
#include <random>
#include <regex>
#include <set>
#include <thread>

namespace pth {

std::string fixture_vuln_name(FixtureVuln v) {
    switch (v) {
        case FixtureVuln::None: return "none";
        case FixtureVuln::SqliError: return "sqli_error";
        case FixtureVuln::SqliBoolean: return "sqli_boolean";
        case FixtureVuln::SqliTime: return "sqli_time";
        case FixtureVuln::XssReflected: return "xss_reflected";
        case FixtureVuln::XssEscaped: return "xss_escaped";
    }
    return "?";
}

FixtureSpec default_fixture_spec() {
    FixtureSpec spec;
    spec.endpoints = {
        {"/about", FixtureVuln::None, std::nullopt, 0, "", "", "", false, 0},
        {"/products", FixtureVuln::SqliError, std::nullopt, 0, "category", "Accessories", "",
         false, 0},
        {"/login", FixtureVuln::SqliBoolean,
         FixtureForm{{"uid"}, ""}, 0, "", "", "", false, 0},
        {"/slow", FixtureVuln::SqliTime, std::nullopt, 0, "id", "7", "", false, 0},
        {"/search", FixtureVuln::XssReflected, std::nullopt, 0, "q", "demo", "body", false, 0},
        {"/safe-search", FixtureVuln::XssEscaped, std::nullopt, 0, "q", "demo", "", false, 0},
        {"/attr", FixtureVuln::XssReflected, std::nullopt, 0, "q", "demo", "attr", false, 0},
        {"/js", FixtureVuln::XssReflected, std::nullopt, 0, "q", "demo", "script", false, 0},
        {"/token-form", FixtureVuln::None,
         FixtureForm{{"username", "password", "comment"}, "rotating"}, 0, "", "", "", false,
         0},
        {"/flaky", FixtureVuln::None, std::nullopt, 0, "id", "7", "", true, 0},
        {"/noisy", FixtureVuln::None, std::nullopt, 0, "id", "7", "", false, 40},
    };
    return spec;
}

namespace {

const char* kSqlErrorText =
    "You have an error in your SQL syntax; check the manual that corresponds "
    "to your MySQL server version for the right syntax to use near &#39;&#39; at line 1";

std::string page(const std::string& heading, const std::string& inner) {
    return "<html><body>\n<h2>" + heading + "</h2>\n" + inner + "\n</body></html>\n";
}

std::string sql_error_page(const std::string& heading) {
    return page(heading, std::string("<p>Database error</p>\n<pre>") + kSqlErrorText + "</pre>");
}

bool has_unbalanced_quotes(const std::string& value) {
    size_t singles = std::count(value.begin(), value.end(), '\'');
    size_t doubles = std::count(value.begin(), value.end(), '"');
    return (singles % 2 == 1) || (doubles % 2 == 1);
}

// Matches the quote-breaker shapes the error-based payload set uses; the
// flaky endpoint keys off these so that marker/canary probes never consume
// its single error.
bool looks_like_quote_breaker(const std::string& value) {
    if (value.empty()) return false;
    char last = value.back();
    return last == '\'' || last == '"' || value.find("')--") != std::string::npos;
}

// Interprets an injected predicate the way WHERE name='<value>' would.
// Returns whether the simulated query yields the admin row.
bool boolean_row_shown(const std::string& value) {
    static const std::regex predicate(R"(^(.*)' AND '([^']*)'='([^']*)$)",
                                      std::regex::icase);
    std::smatch m;
    if (std::regex_match(value, m, predicate))
        return m[1].str() == "admin" && m[2].str() == m[3].str();
    return value == "admin";
}

// SLEEP(n) / pg_sleep(n) / WAITFOR DELAY '0:0:n' → induced delay seconds.
std::optional<double> sleep_seconds(const std::string& value) {
    static const std::regex pattern(
        R"((?:sleep\s*\(\s*([0-9]*\.?[0-9]+)\s*\))|(?:waitfor\s+delay\s+'0:0:([0-9]*\.?[0-9]+)'))",
        std::regex::icase);
    std::smatch m;
    if (!std::regex_search(value, m, pattern)) return std::nullopt;
    std::string seconds = m[1].matched ? m[1].str() : m[2].str();
    return std::min(std::stod(seconds), 8.0);
}

std::string strip_chars(const std::string& value, const std::string& chars) {
    std::string out;
    for (char c : value)
        if (chars.find(c) == std::string::npos) out += c;
    return out;
}

std::string strip_sequence(std::string value, const std::string& seq) {
    size_t pos;
    while ((pos = value.find(seq)) != std::string::npos) value.erase(pos, seq.size());
    return value;
}

std::string random_noise_block(int tokens) {
    thread_local std::mt19937 rng{std::random_device{}()};
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz";
    std::string out = "<p class=\"noise\">";
    for (int i = 0; i < tokens; ++i) {
        out += ' ';
        for (int j = 0; j < 6; ++j) out += alphabet[rng() % 26];
    }
    out += "</p>";
    return out;
}

} // namespace

struct FixtureServer::Impl {
    FixtureSpec spec;
    std::unique_ptr<httplib::Server> server;
    std::thread thread;
    int port = 0;
    bool https = false;

    std::mutex state_mutex;
    std::set<std::string> valid_tokens;
    std::atomic<uint64_t> token_counter{0};
    std::atomic<uint64_t> serial_counter{0};
    std::vector<TokenLogEntry> log;
    std::atomic<int> stale_count{0};
    std::set<std::string> flaky_fired; // endpoint paths that spent their error

    std::string issue_token() {
        std::string token = "tok-" + std::to_string(++token_counter);
        std::lock_guard<std::mutex> lock(state_mutex);
        valid_tokens.insert(token);
        log.push_back({"render", token, false});
        return token;
    }

    bool consume_token(const std::string& token) {
        std::lock_guard<std::mutex> lock(state_mutex);
        bool fresh = valid_tokens.erase(token) > 0;
        log.push_back({"submit", token, fresh});
        if (!fresh) ++stale_count;
        return fresh;
    }

    bool fire_flaky_once(const std::string& path) {
        std::lock_guard<std::mutex> lock(state_mutex);
        return flaky_fired.insert(path).second;
    }

    std::string index_page() const {
        std::string items;
        for (const auto& e : spec.endpoints) {
            std::string href = e.path;
            if (!e.param.empty()) href += "?" + e.param + "=" + e.sample;
            items += "<li><a href=\"" + href + "\">" + e.path.substr(1) + "</a></li>\n";
        }
        return page("Fixture site", "<ul>\n" + items + "</ul>");
    }

    void register_endpoint(const FixtureEndpoint& endpoint) {
        auto handle_get = [this, endpoint](const httplib::Request& req,
                                           httplib::Response& res) {
            if (endpoint.latency_base_ms > 0)
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(endpoint.latency_base_ms));
            std::string value = req.get_param_value(endpoint.param.c_str());

            if (endpoint.noise_tokens > 0) {
                res.set_content(page("Archive", "<p>Archive shard online.</p>\n" +
                                                    random_noise_block(endpoint.noise_tokens)),
                                "text/html");
                return;
            }

            if (endpoint.flaky_error_once) {
                if (looks_like_quote_breaker(value) && fire_flaky_once(endpoint.path)) {
                    res.set_content(sql_error_page("Ledger"), "text/html");
                    return;
                }
                res.set_content(page("Ledger", "<p>Ledger entry verified.</p>"), "text/html");
                return;
            }

            switch (endpoint.vulnerability) {
                case FixtureVuln::SqliError:
                    if (has_unbalanced_quotes(value)) {
                        res.set_content(sql_error_page("Products"), "text/html");
                    } else {
                        res.set_content(
                            page("Products", "<p>Category: " + html_escape(value) +
                                                 "</p>\n<ul><li>Belt</li><li>Cap</li>"
                                                 "<li>Scarf</li></ul>"),
                            "text/html");
                    }
                    return;
                case FixtureVuln::SqliTime: {
                    auto delay = sleep_seconds(value);
                    if (delay)
                        std::this_thread::sleep_for(
                            std::chrono::duration<double>(*delay));
                    // Per-request timestamp and serial: dynamic noise that
                    // the scanner's token normalization must absorb.
                    res.set_content(
                        page("Record", "<p>Record located in archive.</p>\n<p>rendered " +
                                           iso8601_now() + " serial " +
                                           std::to_string(1000000000 +
                                                          ++serial_counter) +
                                           "</p>"),
                        "text/html");
                    return;
                }
                case FixtureVuln::XssReflected:
                    if (endpoint.xss_context == "attr") {
                        res.set_content(
                            page("Filter", "<input type=\"text\" name=\"q\" value=\"" +
                                               strip_chars(value, "<>") +
                                               "\">\n<p>Refine your query.</p>"),
                            "text/html");
                    } else if (endpoint.xss_context == "script") {
                        res.set_content(
                            page("Viewer", "<script>var query = '" +
                                               strip_sequence(value, "</") +
                                               "';</script>\n<p>Interactive viewer.</p>"),
                            "text/html");
                    } else {
                        res.set_content(page("Search", "<p>Results for " + value +
                                                           "</p>\n<p>No documents matched.</p>"),
                                        "text/html");
                    }
                    return;
                case FixtureVuln::XssEscaped:
                    res.set_content(page("Search", "<p>Results for " + html_escape(value) +
                                                       "</p>\n<p>No documents matched.</p>"),
                                    "text/html");
                    return;
                case FixtureVuln::None:
                case FixtureVuln::SqliBoolean:
                    res.set_content(page("Info", "<p>Static information page.</p>"),
                                    "text/html");
                    return;
            }
        };

        auto form_page = [this, endpoint]() {
            std::string inner = "<form method=\"post\" action=\"" + endpoint.path + "\">\n";
            for (const auto& field : endpoint.form->fields) {
                std::string type = field == "password" ? "password" : "text";
                std::string value = field == "uid" ? "admin"
                                    : field == "username" ? "guest"
                                    : field == "comment" ? "hello"
                                                         : "";
                inner += "<input type=\"" + type + "\" name=\"" + field + "\" value=\"" +
                         value + "\">\n";
            }
            if (endpoint.form->csrf == "rotating")
                inner += "<input type=\"hidden\" name=\"user_token\" value=\"" +
                         issue_token() + "\">\n";
            else if (endpoint.form->csrf == "static")
                inner += "<input type=\"hidden\" name=\"user_token\" value=\"tok-static\">\n";
            inner += "<input type=\"submit\" value=\"Send\">\n</form>";
            return page("Form", inner);
        };

        auto handle_post = [this, endpoint](const httplib::Request& req,
                                            httplib::Response& res) {
            if (endpoint.latency_base_ms > 0)
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(endpoint.latency_base_ms));
            if (endpoint.form && endpoint.form->csrf == "rotating") {
                std::string token = req.get_param_value("user_token");
                if (!consume_token(token)) {
                    res.status = 403;
                    res.set_content(page("Form", "<p>Stale token rejected.</p>"),
                                    "text/html");
                    return;
                }
            }
            if (endpoint.vulnerability == FixtureVuln::SqliBoolean) {
                std::string value = req.get_param_value("uid");
                std::string rows;
                if (boolean_row_shown(value))
                    rows = "<tr><td>admin</td><td>Administrator</td>"
                           "<td>admin@fixture.local</td><td>active</td>"
                           "<td>clearance-5</td><td>theme-dark</td><td>tz-utc</td>"
                           "<td>quota-high</td><td>badge-gold</td><td>desk-12</td></tr>\n";
                res.set_content(page("Directory lookup",
                                     "<table>\n" + rows + "</table>"),
                                "text/html");
                return;
            }
            res.set_content(page("Form", "<p>Comment received.</p>"), "text/html");
        };

        if (endpoint.form) {
            server->Get(endpoint.path, [form_page](const httplib::Request&,
                                                   httplib::Response& res) {
                res.set_content(form_page(), "text/html");
            });
            server->Post(endpoint.path, handle_post);
        } else {
            server->Get(endpoint.path, handle_get);
        }
    }
};

FixtureServer::FixtureServer(FixtureSpec spec, std::string cert_path, std::string key_path)
    : impl_(std::make_unique<Impl>()) {
    impl_->spec = std::move(spec);
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    if (!cert_path.empty()) {
        impl_->server =
            std::make_unique<httplib::SSLServer>(cert_path.c_str(), key_path.c_str());
        impl_->https = true;
    }
#endif
    if (!impl_->server) impl_->server = std::make_unique<httplib::Server>();
    if (!impl_->server->is_valid())
        throw PortInUse("fixture server failed to initialize (bad cert paths?)");

    // Default socket options include SO_REUSEPORT, which would let two
    // fixture instances share a port instead of failing loudly.
    impl_->server->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
                   reinterpret_cast<const void*>(&yes), sizeof(yes));
    });

    impl_->server->Get("/", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(impl_->index_page(), "text/html");
    });
    for (const auto& endpoint : impl_->spec.endpoints) impl_->register_endpoint(endpoint);

    if (impl_->spec.port == 0) {
        impl_->port = impl_->server->bind_to_any_port("127.0.0.1");
        if (impl_->port <= 0) throw PortInUse("failed to bind fixture server");
    } else {
        if (!impl_->server->bind_to_port("127.0.0.1", impl_->spec.port))
            throw PortInUse("port " + std::to_string(impl_->spec.port) + " in use");
        impl_->port = impl_->spec.port;
    }
    impl_->thread = std::thread([this] { impl_->server->listen_after_bind(); });
    impl_->server->wait_until_ready();
}

FixtureServer::~FixtureServer() { stop(); }

int FixtureServer::port() const { return impl_->port; }

std::string FixtureServer::base_url() const {
    return (impl_->https ? std::string("https://") : std::string("http://")) + "127.0.0.1:" +
           std::to_string(impl_->port);
}

nlohmann::ordered_json FixtureServer::manifest() const {
    nlohmann::ordered_json endpoints = nlohmann::ordered_json::array();
    for (const auto& e : impl_->spec.endpoints) {
        endpoints.push_back({{"path", e.path},
                             {"vulnerability", fixture_vuln_name(e.vulnerability)}});
    }
    return {{"base_url", base_url()}, {"endpoints", endpoints}};
}

std::vector<TokenLogEntry> FixtureServer::token_log() const {
    std::lock_guard<std::mutex> lock(impl_->state_mutex);
    return impl_->log;
}

int FixtureServer::stale_rejections() const { return impl_->stale_count.load(); }

void FixtureServer::reset() {
    std::lock_guard<std::mutex> lock(impl_->state_mutex);
    impl_->valid_tokens.clear();
    impl_->log.clear();
    impl_->stale_count = 0;
    impl_->flaky_fired.clear();
}

void FixtureServer::stop() {
    if (impl_->server) impl_->server->stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

} // namespace pth
