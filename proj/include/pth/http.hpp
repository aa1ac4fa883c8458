// HTTP fetch contract consumed by the crawler and probe layers. The real
// client lives in http_client.hpp; tests inject doubles.

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace pth {

using FormFields = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
    int status = 0;           // 0 when transport failed
    std::string body;
    std::string content_type;
    double latency_ms = 0.0;
    std::string error;        // non-empty when the request never completed

    bool ok() const { return error.empty() && status > 0; }
};

class Fetcher {
public:
    virtual ~Fetcher() = default;

    virtual HttpResponse get(const std::string& url) = 0;
    virtual HttpResponse post_form(const std::string& url, const FormFields& fields) = 0;
};

} // namespace pth
