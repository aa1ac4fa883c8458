// Deliberately vulnerable HTTP(S) server used as detection ground truth.
// Every endpoint's behavior is declarative and deterministic (modulo the
// rotating CSRF token and intentional sleeps), and the server publishes a
// manifest of what it seeded so test suites can demand exact agreement.

#pragma once

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pth {

enum class FixtureVuln { None, SqliError, SqliBoolean, SqliTime, XssReflected, XssEscaped };
std::string fixture_vuln_name(FixtureVuln v);

struct FixtureForm {
    std::vector<std::string> fields; // visible field names
    std::string csrf;                // "", "static" or "rotating"
};

struct FixtureEndpoint {
    std::string path;
    FixtureVuln vulnerability = FixtureVuln::None;
    std::optional<FixtureForm> form;
    int latency_base_ms = 0;
    std::string param;       // query parameter for GET endpoints
    std::string sample;      // sample value used in the index link
    std::string xss_context; // "body", "attr" or "script" for XssReflected
    bool flaky_error_once = false;
    int noise_tokens = 0;    // random tokens per render (defeats normalization)
};

struct FixtureSpec {
    int port = 0; // 0 = pick any free port
    std::vector<FixtureEndpoint> endpoints;
};

// The endpoint set the acceptance suite scans: one endpoint per detection
// technique plus safe/escaped/untestable counterparts, all linked from the
// index page.
FixtureSpec default_fixture_spec();

class PortInUse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TokenLogEntry {
    std::string kind;  // "render" or "submit"
    std::string token;
    bool fresh = false; // submit only
};

class FixtureServer {
public:
    // Binds and starts serving; pass cert/key paths for HTTPS.
    explicit FixtureServer(FixtureSpec spec, std::string cert_path = "",
                           std::string key_path = "");
    ~FixtureServer();

    FixtureServer(const FixtureServer&) = delete;
    FixtureServer& operator=(const FixtureServer&) = delete;

    int port() const;
    std::string base_url() const;

    // Seeded (endpoint, technique) ground truth.
    nlohmann::ordered_json manifest() const;

    std::vector<TokenLogEntry> token_log() const;
    int stale_rejections() const;

    // Clears per-session state (flaky trigger, tokens, logs) between runs.
    void reset();

    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace pth
