// Same-domain breadth-first crawler: collects pages, anchors and forms.
// Scope is an exact-host match on the start URL; nothing outside it is
// ever fetched.

#pragma once

#include "pth/http.hpp"
#include "pth/url.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace pth {

struct CrawlConfig {
    int max_pages = 200;
    int max_depth = 5;
    int request_timeout_s = 10;
    std::string user_agent = "pthweb/0.1";
    int politeness_delay_ms = 0;
};

struct PageRecord {
    std::string url; // normalized absolute URL
    int status = 0;
    std::string content_type;
    std::string body;
    int depth = 0;
    std::string fetched_at;
    std::string fetch_error; // non-empty when the fetch itself failed
};

enum class FieldKind { Text, Hidden, Password, Select, Textarea, Checkbox, Radio, Other };
std::string field_kind_name(FieldKind k);

struct FormField {
    std::string name;
    FieldKind kind = FieldKind::Text;
    std::string default_value;
    bool operator==(const FormField&) const = default;
};

struct Form {
    std::string source_url;
    std::string action; // resolved absolute URL
    std::string method = "GET";
    std::vector<FormField> fields;
    bool operator==(const Form&) const = default;
};

class StartUnreachable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// True iff candidate's host equals root's host (case-insensitive) and its
// scheme is http or https.
bool is_in_scope(const Url& candidate, const Url& root);

// Anchor hrefs resolved against the page URL, http(s) only, deduplicated
// by normalized form, first-appearance order.
std::vector<std::string> extract_links(const PageRecord& page);

// All forms with their probe-relevant fields. Buttons and submit inputs
// are dropped; unnamed fields are dropped; hidden inputs keep their
// current values.
std::vector<Form> extract_forms(const PageRecord& page);

// BFS from start. Each in-scope URL is fetched at most once (normalized
// dedup); output is sorted by (depth, normalized url). Individual page
// fetch failures are recorded in the PageRecord, only a failing start URL
// throws.
std::vector<PageRecord> crawl(const std::string& start, const CrawlConfig& config,
                              Fetcher& fetcher);

} // namespace pth
