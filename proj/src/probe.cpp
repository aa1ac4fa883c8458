#include "pth/probe.hpp"

#include "pth/util.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <regex>

namespace pth {

std::string InjectionPoint::id() const {
    std::string form_part;
    if (form) form_part = form->method + " " + form->action;
    return page_url + "|" + form_part + "|" + parameter;
}

DerivedPoints derive_injection_points(const std::vector<PageRecord>& pages,
                                      const std::vector<Form>& forms) {
    DerivedPoints out;

    // Forms grouped per page, preserving extraction order as form index.
    std::map<std::string, std::vector<const Form*>> forms_by_page;
    for (const auto& form : forms) forms_by_page[form.source_url].push_back(&form);

    struct Keyed {
        std::string page_url;
        size_t form_index;
        InjectionPoint point;
    };
    std::vector<Keyed> keyed;
    // URL parameters sort after any form on the same page.
    constexpr size_t kUrlParamIndex = std::numeric_limits<size_t>::max();

    for (const auto& page : pages) {
        size_t before = keyed.size();

        auto it = forms_by_page.find(page.url);
        if (it != forms_by_page.end()) {
            for (size_t form_index = 0; form_index < it->second.size(); ++form_index) {
                const Form* form = it->second[form_index];
                for (const auto& field : form->fields) {
                    if (field.kind == FieldKind::Hidden) continue; // CSRF carriers
                    InjectionPoint point;
                    point.source = PointSource::FormField;
                    point.page_url = page.url;
                    point.form = *form;
                    point.parameter = field.name;
                    point.baseline_value = field.default_value;
                    point.method = form->method;
                    keyed.push_back({page.url, form_index, std::move(point)});
                }
            }
        }

        auto url = Url::parse(page.url);
        if (url && !url->query.empty()) {
            for (const auto& [name, value] : parse_query(url->query)) {
                if (name.empty()) continue;
                InjectionPoint point;
                point.source = PointSource::UrlParam;
                point.page_url = page.url;
                point.parameter = name;
                point.baseline_value = value;
                point.method = "GET";
                keyed.push_back({page.url, kUrlParamIndex, std::move(point)});
            }
        }

        if (keyed.size() == before)
            out.untestable.push_back({page.url, "no forms and no query parameters"});
    }

    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.page_url != b.page_url) return a.page_url < b.page_url;
        if (a.form_index != b.form_index) return a.form_index < b.form_index;
        return a.point.parameter < b.point.parameter;
    });
    for (auto& entry : keyed) out.points.push_back(std::move(entry.point));
    return out;
}

bool matches_user_pattern(const std::string& field_name) {
    std::string n = to_lower(field_name);
    return n.find("user") != std::string::npos || n.find("uname") != std::string::npos ||
           n.find("login") != std::string::npos || n.find("email") != std::string::npos;
}

bool matches_password_pattern(const std::string& field_name, FieldKind kind) {
    if (kind == FieldKind::Password) return true;
    std::string n = to_lower(field_name);
    return n.find("pass") != std::string::npos || n.find("pwd") != std::string::npos;
}

namespace {

// Fresh hidden-field values from a re-fetch of the form page. The matching
// form is found by action+method+non-hidden field names.
std::map<std::string, std::string> refresh_hidden_values(const InjectionPoint& point,
                                                         Fetcher& fetcher) {
    HttpResponse response = fetcher.get(point.page_url);
    if (!response.ok())
        throw CsrfRefreshFailed("form page re-fetch failed: " + point.page_url);
    PageRecord record;
    record.url = point.page_url;
    record.body = response.body;
    for (const auto& candidate : extract_forms(record)) {
        if (candidate.action != point.form->action || candidate.method != point.form->method)
            continue;
        std::map<std::string, std::string> hidden;
        for (const auto& field : candidate.fields)
            if (field.kind == FieldKind::Hidden) hidden[field.name] = field.default_value;
        return hidden;
    }
    throw CsrfRefreshFailed("form no longer present on " + point.page_url);
}

bool form_has_hidden(const Form& form) {
    return std::any_of(form.fields.begin(), form.fields.end(),
                       [](const FormField& f) { return f.kind == FieldKind::Hidden; });
}

} // namespace

HttpExchange send_probe(const InjectionPoint& point, const std::string& payload_value,
                        const ProbeOptions& options, Fetcher& fetcher) {
    HttpExchange exchange;

    if (point.source == PointSource::UrlParam) {
        auto url = Url::parse(point.page_url);
        if (!url) throw FetchError("invalid point URL: " + point.page_url);
        auto params = parse_query(url->query);
        for (auto& [name, value] : params)
            if (name == point.parameter) value = payload_value;
        url->query = build_query(params);
        exchange.method = "GET";
        exchange.url = url->str();
        exchange.body_summary = url->query;
        HttpResponse response = fetcher.get(exchange.url);
        exchange.status = response.status;
        exchange.latency_ms = response.latency_ms;
        exchange.body = response.body;
        exchange.error = response.error;
        return exchange;
    }

    const Form& form = *point.form;
    std::map<std::string, std::string> hidden_overrides;
    if (options.csrf_refresh && form_has_hidden(form))
        hidden_overrides = refresh_hidden_values(point, fetcher);

    FormFields fields;
    for (const auto& field : form.fields) {
        std::string value = field.default_value;
        if (field.name == point.parameter && field.kind != FieldKind::Hidden) {
            // The probed parameter always carries the payload, even if its
            // name looks like a credential field.
            value = payload_value;
        } else if (field.kind == FieldKind::Hidden) {
            auto it = hidden_overrides.find(field.name);
            if (it != hidden_overrides.end()) value = it->second;
        } else if (options.credentials &&
                   matches_password_pattern(field.name, field.kind)) {
            value = options.credentials->password;
        } else if (options.credentials && matches_user_pattern(field.name)) {
            value = options.credentials->user;
        }
        fields.emplace_back(field.name, value);
    }

    exchange.method = form.method;
    if (form.method == "POST") {
        exchange.url = form.action;
        exchange.body_summary = build_query(fields);
        HttpResponse response = fetcher.post_form(form.action, fields);
        exchange.status = response.status;
        exchange.latency_ms = response.latency_ms;
        exchange.body = response.body;
        exchange.error = response.error;
    } else {
        auto url = Url::parse(form.action);
        if (!url) throw FetchError("invalid form action: " + form.action);
        url->query = build_query(fields); // GET forms replace the action query
        exchange.url = url->str();
        exchange.body_summary = url->query;
        HttpResponse response = fetcher.get(exchange.url);
        exchange.status = response.status;
        exchange.latency_ms = response.latency_ms;
        exchange.body = response.body;
        exchange.error = response.error;
    }
    return exchange;
}

BaselineProfile capture_baseline(const InjectionPoint& point, const ProbeOptions& options,
                                 Fetcher& fetcher) {
    BaselineProfile profile;
    int samples = std::max(3, options.baseline_samples);
    std::vector<double> latencies;
    BodySignature first_signature;
    for (int i = 0; i < samples; ++i) {
        HttpExchange exchange = send_probe(point, point.baseline_value, options, fetcher);
        if (!exchange.ok())
            throw FetchError("baseline probe failed for " + point.page_url + " [" +
                             point.parameter + "]: " + exchange.error);
        latencies.push_back(exchange.latency_ms);
        if (i == 0) first_signature = body_signature(exchange.body);
        if (i == samples - 1) {
            profile.status = exchange.status;
            profile.last_body = exchange.body;
            profile.body_signature = body_signature(exchange.body);
        }
    }
    std::sort(latencies.begin(), latencies.end());
    profile.latency_median_ms = latencies[latencies.size() / 2];
    profile.samples = samples;
    profile.self_similarity = signature_similarity(first_signature, profile.body_signature);
    return profile;
}

namespace {

bool is_noise_token(const std::string& token) {
    // Long digit runs (ids, counters) and ISO-timestamp shapes change per
    // request without meaning anything for content comparison.
    if (token.size() >= 8 &&
        std::all_of(token.begin(), token.end(),
                    [](unsigned char c) { return std::isdigit(c); }))
        return true;
    static const std::regex iso_ts(
        R"(^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2})?(\.\d+)?(Z|[+-]\d{2}:?\d{2})?)?$)");
    return std::regex_match(token, iso_ts);
}

} // namespace

BodySignature body_signature(const std::string& body) {
    BodySignature signature;
    std::string token;
    auto flush = [&] {
        if (!token.empty() && !is_noise_token(token)) ++signature[token];
        token.clear();
    };
    for (char c : body) {
        // Whitespace and tag boundaries split tokens; the angle brackets
        // themselves are dropped.
        if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '>')
            flush();
        else
            token += c;
    }
    flush();
    return signature;
}

double signature_similarity(const BodySignature& a, const BodySignature& b) {
    size_t total_a = 0, total_b = 0;
    for (const auto& [token, count] : a) total_a += count;
    for (const auto& [token, count] : b) total_b += count;
    if (total_a == 0 && total_b == 0) return 1.0;
    if (total_a == 0 || total_b == 0) return 0.0;

    size_t common = 0;
    for (const auto& [token, count] : a) {
        auto it = b.find(token);
        if (it != b.end()) common += std::min(count, it->second);
    }
    return 2.0 * static_cast<double>(common) / static_cast<double>(total_a + total_b);
}

double similarity(const std::string& a, const std::string& b) {
    if (a == b) return 1.0;
    return signature_similarity(body_signature(a), body_signature(b));
}

} // namespace pth
