// Reflected XSS detection: a unique marker probes each point, every
// reflection is classified by syntactic context, then a context-matched
// payload must reflect byte-identical and unescaped before a finding is
// emitted.

#pragma once

#include "pth/probe.hpp"
#include "pth/sqli_scanner.hpp" // ScanDiagnostic, PayloadCorpusError

#include <optional>
#include <string>
#include <vector>

namespace pth {

enum class XssContext { HtmlBody, AttributeValue, ScriptBlock, EncodedOnly };
std::string xss_context_name(XssContext c);

struct XssPayloadShape {
    XssContext context = XssContext::HtmlBody;
    std::string body;   // template, "{m}" = fresh marker
    std::string active; // the portion that must reflect byte-identical

    bool operator==(const XssPayloadShape&) const = default;
};

std::vector<XssPayloadShape> load_xss_corpus(const std::string& path);
const std::vector<XssPayloadShape>& builtin_xss_corpus();

struct Reflection {
    XssContext context = XssContext::EncodedOnly;
    std::string snippet; // reflected occurrence with surrounding context
    size_t position = 0;

    bool operator==(const Reflection&) const = default;
};

struct XssFinding {
    InjectionPoint point;
    XssContext context = XssContext::HtmlBody;
    std::string payload;
    std::vector<std::string> payloads;
    std::string evidence; // exact reflected snippet, +-80 chars
    bool confirmed = false;
    std::string severity = "Medium";

    bool operator==(const XssFinding&) const = default;
};

struct XssOptions {
    ProbeOptions probe;
    int workers = 4;
};

struct XssScanOutcome {
    std::vector<XssFinding> findings; // sorted (page_url, parameter, context)
    std::vector<ScanDiagnostic> diagnostics;
};

// Deterministic pseudo-random marker suffix for a seed string: 8 base-36
// characters. Distinct seeds give distinct markers; identical runs give
// identical reports.
std::string marker_suffix(const std::string& seed);

// Injects "pthXSS" + marker_suffix + an escape canary and reports every
// occurrence of the marker with its classified context.
std::vector<Reflection> probe_reflection(const InjectionPoint& point,
                                         const ProbeOptions& options, Fetcher& fetcher);

// Sends the context's payload family; the first payload whose active
// portion reflects raw is re-sent once and reported when it reproduces.
std::optional<XssFinding> verify_xss(const InjectionPoint& point, XssContext context,
                                     const std::vector<XssPayloadShape>& corpus,
                                     const ProbeOptions& options, Fetcher& fetcher);

XssScanOutcome scan_xss(const std::vector<InjectionPoint>& points,
                        const std::vector<XssPayloadShape>& corpus, const XssOptions& options,
                        Fetcher& fetcher);

} // namespace pth
