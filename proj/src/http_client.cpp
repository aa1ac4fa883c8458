#include "pth/http_client.hpp"

#include "pth/url.hpp"
#include "pth/util.hpp"

#include <httplib.h>

#include <thread>

namespace pth {

void CookieJar::store_from_header(const std::string& host, const std::string& set_cookie) {
    // Only the name=value pair before the first ";" matters here.
    std::string pair = trim(split(set_cookie, ';').front());
    size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0) return;
    std::string name = trim(pair.substr(0, eq));
    std::string value = trim(pair.substr(eq + 1));
    std::lock_guard<std::mutex> lock(mutex_);
    cookies_[to_lower(host)][name] = value;
}

std::string CookieJar::header_for(const std::string& host) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cookies_.find(to_lower(host));
    if (it == cookies_.end()) return "";
    std::string out;
    for (const auto& [name, value] : it->second) {
        if (!out.empty()) out += "; ";
        out += name + "=" + value;
    }
    return out;
}

void CookieJar::clear() {
    std::lock_guard<std::mutex> lock(mutex_);
    cookies_.clear();
}

void HostRateGate::acquire(const std::string& host) {
    if (delay_ms_ <= 0) return;
    std::chrono::steady_clock::time_point wait_until;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto now = std::chrono::steady_clock::now();
        auto& slot = next_slot_[host];
        if (slot < now) slot = now;
        wait_until = slot;
        slot += std::chrono::milliseconds(delay_ms_);
    }
    std::this_thread::sleep_until(wait_until);
}

HttpClient::HttpClient(HttpClientConfig config)
    : config_(std::move(config)), gate_(config_.politeness_delay_ms) {}

HttpResponse HttpClient::get(const std::string& url) {
    return perform("GET", url, nullptr);
}

HttpResponse HttpClient::post_form(const std::string& url, const FormFields& fields) {
    return perform("POST", url, &fields);
}

HttpResponse HttpClient::perform(const std::string& method, const std::string& url,
                                 const FormFields* fields) {
    HttpResponse out;
    auto parsed = Url::parse(url);
    if (!parsed) {
        out.error = "invalid url: " + url;
        return out;
    }

    gate_.acquire(parsed->host);

    httplib::Client client(parsed->origin());
    client.set_connection_timeout(config_.timeout_s, 0);
    client.set_read_timeout(config_.timeout_s, 0);
    client.set_write_timeout(config_.timeout_s, 0);
    client.set_follow_location(config_.follow_redirects);
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    if (config_.insecure_tls) client.enable_server_certificate_verification(false);
#endif

    httplib::Headers headers{{"User-Agent", config_.user_agent}};
    std::string cookie = jar_.header_for(parsed->host);
    if (!cookie.empty()) headers.emplace("Cookie", cookie);

    auto start = std::chrono::steady_clock::now();
    httplib::Result result;
    if (method == "POST") {
        // Build the body by hand to preserve field order.
        std::string body;
        if (fields) {
            for (const auto& [k, v] : *fields) {
                if (!body.empty()) body += "&";
                body += url_encode_component(k) + "=" + url_encode_component(v);
            }
        }
        result = client.Post(parsed->path_and_query(), headers, body,
                             "application/x-www-form-urlencoded");
    } else {
        result = client.Get(parsed->path_and_query(), headers);
    }
    auto elapsed = std::chrono::steady_clock::now() - start;
    out.latency_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();

    if (!result) {
        out.error = httplib::to_string(result.error());
        return out;
    }
    out.status = result->status;
    out.body = result->body;
    out.content_type = result->get_header_value("Content-Type");
    auto range = result->headers.equal_range("Set-Cookie");
    for (auto it = range.first; it != range.second; ++it)
        jar_.store_from_header(parsed->host, it->second);
    return out;
}

} // namespace pth
