// Narrative generation for report sections via a pluggable provider. The
// deterministic offline stub always works; the remote chat-completion
// provider degrades to the stub on any failure, so report generation never
// depends on the network.

#pragma once

#include "pth/policy.hpp"
#include "pth/sqli_scanner.hpp"
#include "pth/xss_scanner.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>

namespace pth {

enum class PromptKind {
    GenerationSessionInit,
    ExecutiveSummary,
    MitigationSteps,
    SeverityRationale,
    VulnerabilitySteps,
};
std::string prompt_kind_name(PromptKind k);
inline constexpr PromptKind kNarrativeKinds[] = {
    PromptKind::ExecutiveSummary, PromptKind::MitigationSteps,
    PromptKind::SeverityRationale, PromptKind::VulnerabilitySteps};

struct AgentRequest {
    PromptKind kind = PromptKind::ExecutiveSummary;
    nlohmann::ordered_json context; // digest only, never raw bodies
    int max_output = 1024;
};

struct AgentResponse {
    std::string text;
    std::string provider_id;
    bool degraded = false; // stub output (selected, fallback or misconfigured)
};

// Deterministic digest of the assessment: counts, per-category compliance
// tallies, non-recommended elements and one-line finding summaries,
// truncated at 50 entries with an elision note. Payload excerpts are
// clipped well below the 200-character outbound privacy bound.
nlohmann::ordered_json build_context(const ComplianceReport& compliance,
                                     const std::vector<SqliFinding>& sqli,
                                     const std::vector<XssFinding>& xss);

class AgentProvider {
public:
    virtual ~AgentProvider() = default;
    virtual std::string id() const = 0;
    // May throw; the top-level generate() handles degradation.
    virtual std::string generate_text(const AgentRequest& request) = 0;
};

// Pure function of the request; no I/O.
class StubAgent : public AgentProvider {
public:
    std::string id() const override { return "stub"; }
    std::string generate_text(const AgentRequest& request) override;
};

struct RemoteAgentConfig {
    std::string endpoint_url; // chat-completion style POST endpoint
    std::string model;
    std::string api_key; // from PTH_AGENT_API_KEY
    std::string prompt_dir; // template files, one per prompt kind
    int timeout_s = 10;
    int max_retries = 2;
};

// Reads endpoint/model from an agent.json config file; key comes from the
// environment. Returns nullopt when the file is absent or unusable.
std::optional<RemoteAgentConfig> load_remote_agent_config(const std::string& path);

class RemoteAgent : public AgentProvider {
public:
    explicit RemoteAgent(RemoteAgentConfig config);
    std::string id() const override { return "remote:" + config_.model; }
    std::string generate_text(const AgentRequest& request) override;

    // The serialized JSON that would go on the wire (exposed so tests can
    // assert the privacy bound without a live endpoint).
    std::string serialize_request(const AgentRequest& request) const;

private:
    RemoteAgentConfig config_;
};

// Renders the prompt template for a kind with {{context}} substituted.
// Falls back to a built-in template when the file is missing.
std::string render_prompt(PromptKind kind, const nlohmann::ordered_json& context,
                          const std::string& prompt_dir);

// Session init + prompt through the provider; on failure (after the
// provider's own retries) falls back to the stub with degraded=true.
// Never throws.
AgentResponse generate(AgentProvider& provider, const AgentRequest& request);

} // namespace pth
