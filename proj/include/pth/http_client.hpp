// Real HTTP(S) client behind the Fetcher contract: session cookie jar,
// per-host politeness gate, configurable timeout and user agent.

#pragma once

#include "pth/http.hpp"

#include <chrono>
#include <map>
#include <mutex>
#include <string>

namespace pth {

// Name=value cookies per host, replayed on subsequent requests. Attribute
// handling (path/expiry) is deliberately minimal; session fixtures only
// need the value to come back.
class CookieJar {
public:
    void store_from_header(const std::string& host, const std::string& set_cookie);
    std::string header_for(const std::string& host) const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::map<std::string, std::string>> cookies_;
};

// Serializes request starts per host so concurrent probe tasks cannot burst.
class HostRateGate {
public:
    explicit HostRateGate(int delay_ms = 0) : delay_ms_(delay_ms) {}

    void set_delay_ms(int delay_ms) { delay_ms_ = delay_ms; }
    // Blocks until this host's next slot.
    void acquire(const std::string& host);

private:
    int delay_ms_;
    std::mutex mutex_;
    std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
};

struct HttpClientConfig {
    int timeout_s = 10;
    std::string user_agent = "pthweb/0.1";
    int politeness_delay_ms = 0;
    bool follow_redirects = false;  // crawler handles Location itself
    bool insecure_tls = false;      // accept self-signed certs (lab targets)
};

class HttpClient : public Fetcher {
public:
    explicit HttpClient(HttpClientConfig config = {});

    HttpResponse get(const std::string& url) override;
    HttpResponse post_form(const std::string& url, const FormFields& fields) override;

    CookieJar& cookies() { return jar_; }
    const HttpClientConfig& config() const { return config_; }

private:
    HttpResponse perform(const std::string& method, const std::string& url,
                         const FormFields* fields);

    HttpClientConfig config_;
    CookieJar jar_;
    HostRateGate gate_;
};

} // namespace pth
