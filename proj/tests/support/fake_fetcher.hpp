// Scripted Fetcher double: canned responses keyed by normalized URL, with
// a fetch log for scope/once-only assertions.

#pragma once

#include "pth/http.hpp"
#include "pth/url.hpp"

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace pth::testing {

class FakeFetcher : public Fetcher {
public:
    void add_page(const std::string& url, std::string body, int status = 200,
                  std::string content_type = "text/html") {
        HttpResponse response;
        response.status = status;
        response.body = std::move(body);
        response.content_type = std::move(content_type);
        pages_[normalize(url)] = std::move(response);
    }

    void add_error(const std::string& url, const std::string& error) {
        HttpResponse response;
        response.error = error;
        pages_[normalize(url)] = std::move(response);
    }

    // Dynamic handler takes precedence when set; gets (url, form or null).
    using Handler = std::function<HttpResponse(const std::string&, const FormFields*)>;
    void set_handler(Handler handler) { handler_ = std::move(handler); }

    HttpResponse get(const std::string& url) override { return serve(url, nullptr); }

    HttpResponse post_form(const std::string& url, const FormFields& fields) override {
        return serve(url, &fields);
    }

    std::vector<std::string> fetch_log() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return log_;
    }

    std::vector<FormFields> post_log() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return posts_;
    }

private:
    static std::string normalize(const std::string& url) {
        auto parsed = Url::parse(url);
        return parsed ? parsed->normalized() : url;
    }

    HttpResponse serve(const std::string& url, const FormFields* fields) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            log_.push_back(normalize(url));
            if (fields) posts_.push_back(*fields);
        }
        if (handler_) return handler_(url, fields);
        auto it = pages_.find(normalize(url));
        if (it != pages_.end()) return it->second;
        HttpResponse missing;
        missing.status = 404;
        missing.content_type = "text/html";
        missing.body = "<html><body>not found</body></html>";
        return missing;
    }

    std::map<std::string, HttpResponse> pages_;
    Handler handler_;
    mutable std::mutex mutex_;
    std::vector<std::string> log_;
    std::vector<FormFields> posts_;
};

} // namespace pth::testing
