#include "pth/agent.hpp"

#include "pth/url.hpp"
#include "pth/util.hpp"
#include "pth/version.hpp"

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pth {

using nlohmann::json;
using nlohmann::ordered_json;

std::string prompt_kind_name(PromptKind k) {
    switch (k) {
        case PromptKind::GenerationSessionInit: return "generation_session_init";
        case PromptKind::ExecutiveSummary: return "executive_summary";
        case PromptKind::MitigationSteps: return "mitigation_steps";
        case PromptKind::SeverityRationale: return "severity_rationale";
        case PromptKind::VulnerabilitySteps: return "vulnerability_steps";
    }
    return "?";
}

namespace {

constexpr size_t kMaxListEntries = 50;
constexpr size_t kPayloadExcerpt = 120; // stays under the 200-char bound

std::string clip(const std::string& s, size_t limit) {
    if (s.size() <= limit) return s;
    return s.substr(0, limit) + "...";
}

} // namespace

ordered_json build_context(const ComplianceReport& compliance,
                           const std::vector<SqliFinding>& sqli,
                           const std::vector<XssFinding>& xss) {
    ordered_json context;
    context["finding_counts"] = {{"sqli", sqli.size()}, {"xss", xss.size()}};

    size_t recommended = 0, legacy = 0, not_listed = 0;
    ordered_json non_recommended = ordered_json::array();
    for (const auto& v : compliance.verdicts) {
        switch (v.category) {
            case PolicyCategory::Recommended: ++recommended; break;
            case PolicyCategory::Legacy: ++legacy; break;
            case PolicyCategory::NotListed: ++not_listed; break;
        }
        if (v.category != PolicyCategory::Recommended &&
            non_recommended.size() < kMaxListEntries) {
            non_recommended.push_back({{"kind", element_kind_name(v.element_kind)},
                                       {"id", v.element_id},
                                       {"category", category_name(v.category)}});
        }
    }
    context["compliance_present"] = compliance.present;
    context["compliance_counts"] = {
        {"Recommended", recommended}, {"Legacy", legacy}, {"NotListed", not_listed}};
    context["non_recommended"] = non_recommended;

    ordered_json findings = ordered_json::array();
    size_t total = sqli.size() + xss.size();
    for (const auto& f : sqli) {
        if (findings.size() >= kMaxListEntries) break;
        findings.push_back("SQL injection (" + sqli_technique_name(f.technique) + ") at " +
                           f.point.page_url + " parameter '" + f.point.parameter +
                           "' via payload " + clip(f.payload, kPayloadExcerpt));
    }
    for (const auto& f : xss) {
        if (findings.size() >= kMaxListEntries) break;
        findings.push_back("Reflected XSS (" + xss_context_name(f.context) + ") at " +
                           f.point.page_url + " parameter '" + f.point.parameter +
                           "' via payload " + clip(f.payload, kPayloadExcerpt));
    }
    if (total > kMaxListEntries)
        findings.push_back("... " + std::to_string(total - kMaxListEntries) +
                           " further findings elided");
    context["findings"] = findings;
    return context;
}

namespace {

std::string counts_sentence(const ordered_json& context) {
    size_t sqli = context["finding_counts"]["sqli"].get<size_t>();
    size_t xss = context["finding_counts"]["xss"].get<size_t>();
    std::string out = std::to_string(sqli) + " SQL injection finding" +
                      (sqli == 1 ? "" : "s") + " and " + std::to_string(xss) +
                      " reflected XSS finding" + (xss == 1 ? "" : "s");
    return out;
}

std::string compliance_sentence(const ordered_json& context) {
    if (!context.value("compliance_present", false))
        return "The cryptographic policy check did not run for this target.";
    const auto& counts = context["compliance_counts"];
    return "Cryptographic policy: " + std::to_string(counts["Recommended"].get<size_t>()) +
           " recommended, " + std::to_string(counts["Legacy"].get<size_t>()) + " legacy, " +
           std::to_string(counts["NotListed"].get<size_t>()) + " not listed.";
}

} // namespace

std::string StubAgent::generate_text(const AgentRequest& request) {
    const ordered_json& context = request.context;
    std::ostringstream out;
    switch (request.kind) {
        case PromptKind::GenerationSessionInit:
            out << "Session initialized for web assessment narrative generation.";
            break;
        case PromptKind::ExecutiveSummary:
            out << "Executive summary: the assessment identified " << counts_sentence(context)
                << ". " << compliance_sentence(context);
            if (context.contains("findings"))
                for (const auto& line : context["findings"])
                    out << "\n- " << line.get<std::string>();
            break;
        case PromptKind::MitigationSteps:
            out << "Mitigation steps:";
            out << "\n- Use parameterized queries or prepared statements for every "
                   "database access reachable from user input.";
            out << "\n- Encode untrusted data for its output context and apply a "
                   "restrictive Content-Security-Policy.";
            out << "\n- Replace or retire cryptographic mechanisms that are not in the "
                   "recommended category.";
            break;
        case PromptKind::SeverityRationale:
            out << "Severity rationale: SQL injection findings are rated High because the "
                   "injected predicates reached the data layer and changed responses. "
                   "Reflected XSS findings are rated Medium because exploitation requires "
                   "a victim to follow a crafted link. "
                << counts_sentence(context) << " were confirmed by re-testing.";
            break;
        case PromptKind::VulnerabilitySteps:
            out << "Vulnerability walkthrough:";
            if (context.contains("non_recommended"))
                for (const auto& element : context["non_recommended"]) {
                    out << "\n- Element " << element["id"].get<std::string>() << " ("
                        << element["kind"].get<std::string>() << ") is classified "
                        << element["category"].get<std::string>()
                        << "; migrate to a recommended mechanism.";
                }
            if (context.contains("findings"))
                for (const auto& line : context["findings"])
                    out << "\n- Reproduce: " << line.get<std::string>();
            if (out.str() == "Vulnerability walkthrough:")
                out << "\n- No vulnerable elements or findings to walk through.";
            break;
    }
    return out.str();
}

std::optional<RemoteAgentConfig> load_remote_agent_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        json doc = json::parse(in);
        RemoteAgentConfig config;
        config.endpoint_url = doc.value("endpoint_url", "");
        config.model = doc.value("model", "");
        config.timeout_s = doc.value("timeout_s", 10);
        config.prompt_dir = doc.value("prompt_dir", "");
        if (const char* key = std::getenv("PTH_AGENT_API_KEY")) config.api_key = key;
        if (config.endpoint_url.empty() || config.model.empty()) return std::nullopt;
        return config;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

namespace {

std::string builtin_prompt(PromptKind kind) {
    switch (kind) {
        case PromptKind::GenerationSessionInit:
            return "You are assisting with an authorized web application security "
                   "assessment report. Answer with concise, professional report prose. "
                   "Context:\n{{context}}";
        case PromptKind::ExecutiveSummary:
            return "Write an executive summary of the assessment for a non-technical "
                   "audience, from this context:\n{{context}}";
        case PromptKind::MitigationSteps:
            return "List concrete mitigation steps for the issues in this "
                   "context:\n{{context}}";
        case PromptKind::SeverityRationale:
            return "Justify the severity assigned to each finding class in this "
                   "context:\n{{context}}";
        case PromptKind::VulnerabilitySteps:
            return "Explain each weak cryptographic element and each finding, with the "
                   "steps to address it, from this context:\n{{context}}";
    }
    return "{{context}}";
}

} // namespace

std::string render_prompt(PromptKind kind, const ordered_json& context,
                          const std::string& prompt_dir) {
    std::string templ;
    if (!prompt_dir.empty()) {
        std::ifstream in(std::filesystem::path(prompt_dir) /
                         (prompt_kind_name(kind) + ".txt"));
        if (in) {
            std::ostringstream ss;
            ss << in.rdbuf();
            templ = ss.str();
        }
    }
    if (templ.empty()) templ = builtin_prompt(kind);
    const std::string placeholder = "{{context}}";
    size_t pos = templ.find(placeholder);
    std::string rendered = context.dump(2);
    while (pos != std::string::npos) {
        templ.replace(pos, placeholder.size(), rendered);
        pos = templ.find(placeholder, pos + rendered.size());
    }
    return templ;
}

RemoteAgent::RemoteAgent(RemoteAgentConfig config) : config_(std::move(config)) {}

std::string RemoteAgent::serialize_request(const AgentRequest& request) const {
    ordered_json body;
    body["model"] = config_.model;
    body["messages"] = ordered_json::array(
        {{{"role", "system"},
          {"content", render_prompt(PromptKind::GenerationSessionInit, request.context,
                                    config_.prompt_dir)}},
         {{"role", "user"},
          {"content", render_prompt(request.kind, request.context, config_.prompt_dir)}}});
    body["max_tokens"] = request.max_output;
    return body.dump();
}

std::string RemoteAgent::generate_text(const AgentRequest& request) {
    if (config_.api_key.empty())
        throw std::runtime_error("remote agent misconfigured: PTH_AGENT_API_KEY not set");

    auto url = Url::parse(config_.endpoint_url);
    if (!url) throw std::runtime_error("invalid agent endpoint: " + config_.endpoint_url);

    std::string body = serialize_request(request);
    std::string last_error = "no attempts made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        httplib::Client client(url->origin());
        client.set_connection_timeout(config_.timeout_s, 0);
        client.set_read_timeout(config_.timeout_s, 0);
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
        client.enable_server_certificate_verification(false);
#endif
        httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};
        auto result = client.Post(url->path_and_query(), headers, body, "application/json");
        if (!result) {
            last_error = httplib::to_string(result.error());
            continue;
        }
        if (result->status != 200) {
            last_error = "endpoint returned status " + std::to_string(result->status);
            continue;
        }
        try {
            json doc = json::parse(result->body);
            std::string text = doc.at("choices").at(0).at("message").at("content")
                                   .get<std::string>();
            if (!text.empty()) return text;
            last_error = "endpoint returned empty content";
        } catch (const json::exception& e) {
            last_error = std::string("unexpected response shape: ") + e.what();
        }
    }
    throw std::runtime_error("remote agent failed after retries: " + last_error);
}

AgentResponse generate(AgentProvider& provider, const AgentRequest& request) {
    try {
        AgentResponse response;
        response.text = provider.generate_text(request);
        response.provider_id = provider.id();
        response.degraded = provider.id() == "stub";
        if (response.text.empty()) throw std::runtime_error("provider returned empty text");
        return response;
    } catch (const std::exception& e) {
        std::cerr << "[agent] provider '" << provider.id() << "' failed (" << e.what()
                  << "); falling back to stub\n";
        StubAgent stub;
        AgentResponse response;
        response.text = stub.generate_text(request);
        response.provider_id = stub.id();
        response.degraded = true;
        return response;
    }
}

} // namespace pth
