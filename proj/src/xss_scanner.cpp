#include "pth/xss_scanner.hpp"

#include "pth/html.hpp"
#include "pth/util.hpp"
#include "pth/worker_pool.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <mutex>
#include <set>

namespace pth {

using nlohmann::json;

std::string xss_context_name(XssContext c) {
    switch (c) {
        case XssContext::HtmlBody: return "html-body";
        case XssContext::AttributeValue: return "attribute-value";
        case XssContext::ScriptBlock: return "script-block";
        case XssContext::EncodedOnly: return "encoded-only";
    }
    return "?";
}

namespace {

std::optional<XssContext> context_from_name(const std::string& name) {
    if (name == "html-body" || name == "body") return XssContext::HtmlBody;
    if (name == "attribute-value" || name == "attr") return XssContext::AttributeValue;
    if (name == "script-block" || name == "script") return XssContext::ScriptBlock;
    return std::nullopt;
}

} // namespace

std::vector<XssPayloadShape> load_xss_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PayloadCorpusError("cannot open payload corpus: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw PayloadCorpusError(path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("payloads") || !doc["payloads"].is_array())
        throw PayloadCorpusError(path + ": expected object with a payloads array");
    std::vector<XssPayloadShape> corpus;
    for (const auto& entry : doc["payloads"]) {
        XssPayloadShape shape;
        auto context = context_from_name(entry.at("context").get<std::string>());
        if (!context) throw PayloadCorpusError(path + ": unknown context");
        shape.context = *context;
        shape.body = entry.at("template").get<std::string>();
        shape.active = entry.value("active", shape.body);
        if (shape.body.find("{m}") == std::string::npos)
            throw PayloadCorpusError(path + ": payload template missing {m}: " + shape.body);
        corpus.push_back(std::move(shape));
    }
    return corpus;
}

const std::vector<XssPayloadShape>& builtin_xss_corpus() {
    static const std::vector<XssPayloadShape> corpus = {
        {XssContext::HtmlBody, "<script>{m}()</script>", "<script>{m}()</script>"},
        {XssContext::HtmlBody, "<img src=x onerror={m}()>", "<img src=x onerror={m}()>"},
        {XssContext::AttributeValue, "\"><svg onload={m}()>", "<svg onload={m}()>"},
        {XssContext::AttributeValue, "\" onfocus={m}() autofocus zz=\"",
         "\" onfocus={m}() autofocus"},
        {XssContext::AttributeValue, "' onfocus={m}() autofocus zz='",
         "' onfocus={m}() autofocus"},
        {XssContext::ScriptBlock, "';{m}();//", "';{m}();//"},
        {XssContext::ScriptBlock, "\";{m}();//", "\";{m}();//"},
    };
    return corpus;
}

std::string marker_suffix(const std::string& seed) {
    // FNV-1a, then base36. Pseudo-random but a pure function of the seed,
    // so two runs of the same scan produce identical payload strings.
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : seed) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char alphabet[] = "0123456789abcdefghijklmnopqrstuvwxyz";
    std::string out;
    for (int i = 0; i < 8; ++i) {
        out += alphabet[h % 36];
        h /= 36;
    }
    return out;
}

namespace {

constexpr const char* kCanary = "\"'<>";

struct CanarySurvival {
    bool quote_raw = false;
    bool apos_raw = false;
    bool lt_raw = false;
    bool gt_raw = false;
    bool any_escaped = false;
};

// Walks the body after the marker, matching each canary character as raw,
// entity-escaped or stripped.
CanarySurvival analyze_canary(const std::string& body, size_t after_marker) {
    struct Variant {
        char raw;
        std::array<const char*, 3> entities;
    };
    static const std::array<Variant, 4> chars = {{
        {'"', {"&quot;", "&#34;", "&#x22;"}},
        {'\'', {"&#39;", "&apos;", "&#x27;"}},
        {'<', {"&lt;", "&#60;", "&#x3c;"}},
        {'>', {"&gt;", "&#62;", "&#x3e;"}},
    }};

    CanarySurvival survival;
    size_t pos = after_marker;
    for (const auto& variant : chars) {
        bool raw = pos < body.size() && body[pos] == variant.raw;
        bool escaped = false;
        if (!raw) {
            for (const char* entity : variant.entities) {
                size_t len = std::char_traits<char>::length(entity);
                if (body.compare(pos, len, entity) == 0) {
                    escaped = true;
                    pos += len;
                    break;
                }
            }
        } else {
            ++pos;
        }
        if (escaped) survival.any_escaped = true;
        switch (variant.raw) {
            case '"': survival.quote_raw = raw; break;
            case '\'': survival.apos_raw = raw; break;
            case '<': survival.lt_raw = raw; break;
            case '>': survival.gt_raw = raw; break;
        }
        // A stripped character consumes nothing.
    }
    return survival;
}

XssContext classify_reflection(DocContext where, const CanarySurvival& survival) {
    switch (where) {
        case DocContext::Text:
            return survival.lt_raw && survival.gt_raw ? XssContext::HtmlBody
                                                      : XssContext::EncodedOnly;
        case DocContext::AttrDouble:
            return survival.quote_raw ? XssContext::AttributeValue : XssContext::EncodedOnly;
        case DocContext::AttrSingle:
            return survival.apos_raw ? XssContext::AttributeValue : XssContext::EncodedOnly;
        case DocContext::ScriptText:
            return survival.apos_raw || survival.quote_raw ? XssContext::ScriptBlock
                                                           : XssContext::EncodedOnly;
        case DocContext::TagOther:
        case DocContext::Comment:
            return XssContext::EncodedOnly;
    }
    return XssContext::EncodedOnly;
}

std::string snippet_around(const std::string& body, size_t pos, size_t len) {
    size_t begin = pos >= 80 ? pos - 80 : 0;
    size_t end = std::min(body.size(), pos + len + 80);
    return body.substr(begin, end - begin);
}

std::string render_marker_template(const std::string& templ, const std::string& marker) {
    std::string out = templ;
    size_t pos;
    while ((pos = out.find("{m}")) != std::string::npos) out.replace(pos, 3, marker);
    return out;
}

} // namespace

std::vector<Reflection> probe_reflection(const InjectionPoint& point,
                                         const ProbeOptions& options, Fetcher& fetcher) {
    std::string marker = "pthXSS" + marker_suffix(point.id() + ":reflect");
    std::string probe_value = marker + kCanary;

    HttpExchange exchange = send_probe(point, probe_value, options, fetcher);
    if (!exchange.ok())
        throw FetchError("reflection probe failed for " + point.page_url + " [" +
                         point.parameter + "]: " + exchange.error);

    std::vector<Reflection> reflections;
    size_t pos = 0;
    while ((pos = exchange.body.find(marker, pos)) != std::string::npos) {
        CanarySurvival survival = analyze_canary(exchange.body, pos + marker.size());
        DocContext where = classify_position(exchange.body, pos);
        Reflection reflection;
        reflection.context = classify_reflection(where, survival);
        reflection.position = pos;
        reflection.snippet = snippet_around(exchange.body, pos, marker.size());
        reflections.push_back(std::move(reflection));
        pos += marker.size();
    }
    return reflections;
}

std::optional<XssFinding> verify_xss(const InjectionPoint& point, XssContext context,
                                     const std::vector<XssPayloadShape>& corpus,
                                     const ProbeOptions& options, Fetcher& fetcher) {
    int shape_index = 0;
    for (const auto& shape : corpus) {
        if (shape.context != context) continue;
        ++shape_index;
        std::string marker =
            "pth" + marker_suffix(point.id() + ":verify:" + xss_context_name(context) + ":" +
                                  std::to_string(shape_index));
        std::string payload = render_marker_template(shape.body, marker);
        std::string active = render_marker_template(shape.active, marker);

        HttpExchange exchange = send_probe(point, payload, options, fetcher);
        if (!exchange.ok()) continue;
        size_t pos = exchange.body.find(active);
        if (pos == std::string::npos) continue;

        // Confirm with one re-send of the same payload.
        HttpExchange again = send_probe(point, payload, options, fetcher);
        if (!again.ok()) continue;
        size_t pos2 = again.body.find(active);
        if (pos2 == std::string::npos) continue;

        XssFinding finding;
        finding.point = point;
        finding.context = context;
        finding.payload = payload;
        finding.payloads = {payload};
        finding.evidence = snippet_around(again.body, pos2, active.size());
        finding.confirmed = true;
        return finding;
    }
    return std::nullopt;
}

XssScanOutcome scan_xss(const std::vector<InjectionPoint>& points,
                        const std::vector<XssPayloadShape>& corpus, const XssOptions& options,
                        Fetcher& fetcher) {
    struct Slot {
        std::vector<XssFinding> findings;
        std::vector<ScanDiagnostic> diagnostics;
    };
    std::vector<Slot> slots(points.size());

    // Marker uniqueness within one scan is an invariant; a collision would
    // mean two points share an id.
    std::mutex marker_mutex;
    std::set<std::string> seen_markers;

    run_indexed(points.size(), options.workers, [&](size_t i) {
        const InjectionPoint& point = points[i];
        Slot& slot = slots[i];
        {
            std::lock_guard<std::mutex> lock(marker_mutex);
            std::string marker = "pthXSS" + marker_suffix(point.id() + ":reflect");
            if (!seen_markers.insert(marker).second) {
                slot.diagnostics.push_back({point.id(), "xss", "marker collision"});
                return;
            }
        }
        std::vector<Reflection> reflections;
        try {
            reflections = probe_reflection(point, options.probe, fetcher);
        } catch (const std::exception& e) {
            slot.diagnostics.push_back({point.id(), "xss-reflection", e.what()});
            return;
        }

        std::set<XssContext> contexts;
        for (const auto& r : reflections)
            if (r.context != XssContext::EncodedOnly) contexts.insert(r.context);

        for (XssContext context : contexts) {
            try {
                auto finding = verify_xss(point, context, corpus, options.probe, fetcher);
                if (finding) slot.findings.push_back(std::move(*finding));
            } catch (const std::exception& e) {
                slot.diagnostics.push_back({point.id(), "xss-verify", e.what()});
            }
        }
    });

    XssScanOutcome outcome;
    for (auto& slot : slots) {
        for (auto& f : slot.findings) outcome.findings.push_back(std::move(f));
        for (auto& d : slot.diagnostics) outcome.diagnostics.push_back(std::move(d));
    }
    std::sort(outcome.findings.begin(), outcome.findings.end(),
              [](const XssFinding& a, const XssFinding& b) {
                  if (a.point.page_url != b.point.page_url)
                      return a.point.page_url < b.point.page_url;
                  if (a.point.parameter != b.point.parameter)
                      return a.point.parameter < b.point.parameter;
                  return a.context < b.context;
              });
    return outcome;
}

} // namespace pth
