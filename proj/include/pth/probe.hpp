// Probe layer: turns crawled pages and forms into injection points, builds
// and sends probe requests (payload substitution, credential substitution,
// fresh CSRF tokens), and measures response baselines and similarity.

#pragma once

#include "pth/crawler.hpp"
#include "pth/http.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pth {

enum class PointSource { FormField, UrlParam };

struct InjectionPoint {
    PointSource source = PointSource::UrlParam;
    std::string page_url;
    std::optional<Form> form;   // present iff source == FormField
    std::string parameter;
    std::string baseline_value;
    std::string method = "GET";

    bool operator==(const InjectionPoint&) const = default;

    // Stable identity used for ordering and dedup.
    std::string id() const;
};

struct UntestablePage {
    std::string url;
    std::string reason;
    bool operator==(const UntestablePage&) const = default;
};

struct DerivedPoints {
    std::vector<InjectionPoint> points;
    std::vector<UntestablePage> untestable;
};

struct Credentials {
    std::string user;
    std::string password;
};

struct ProbeOptions {
    std::optional<Credentials> credentials;
    int timeout_s = 10;
    bool csrf_refresh = true;
    int baseline_samples = 3; // median over at least 3
};

struct HttpExchange {
    std::string method;
    std::string url;
    std::string body_summary; // form body or query string actually sent
    int status = 0;
    double latency_ms = 0.0;
    std::string body;
    std::string error; // transport failure
    bool ok() const { return error.empty() && status > 0; }
};

class FetchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CsrfRefreshFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Token multiset of a body after noise normalization (long digit runs and
// ISO-timestamp-shaped tokens are dropped).
using BodySignature = std::map<std::string, int>;

struct BaselineProfile {
    int status = 0;
    BodySignature body_signature; // of the last sample
    std::string last_body;        // raw, for error-signature subtraction
    double latency_median_ms = 0.0;
    int samples = 0;
    // Normalized similarity of the first and last benign sample; below the
    // TRUE threshold the endpoint is too unstable for boolean differencing.
    double self_similarity = 1.0;
};

// One point per non-hidden, non-submit form field plus one per URL query
// parameter; pages with neither are reported untestable. Ordering is
// (page_url, form index, parameter) and stable across runs.
DerivedPoints derive_injection_points(const std::vector<PageRecord>& pages,
                                      const std::vector<Form>& forms);

// Sends one probe with payload_value in the probed parameter. Sibling
// fields carry their defaults, credential-pattern fields carry the
// configured credentials, hidden fields carry freshly re-fetched values
// when csrf_refresh is on. Never mutates the point.
HttpExchange send_probe(const InjectionPoint& point, const std::string& payload_value,
                        const ProbeOptions& options, Fetcher& fetcher);

// Three benign probes; median latency plus the token signature of the
// last body. Throws FetchError if any sample fails outright.
BaselineProfile capture_baseline(const InjectionPoint& point, const ProbeOptions& options,
                                 Fetcher& fetcher);

// Normalized token multiset similarity: 2*|intersection| / (|A|+|B|),
// symmetric, 1.0 for identical inputs.
double similarity(const std::string& a, const std::string& b);
double signature_similarity(const BodySignature& a, const BodySignature& b);
BodySignature body_signature(const std::string& body);

// Credential-pattern matching (exposed for tests).
bool matches_user_pattern(const std::string& field_name);
bool matches_password_pattern(const std::string& field_name, FieldKind kind);

} // namespace pth
