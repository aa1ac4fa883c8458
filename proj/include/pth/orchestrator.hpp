// Run orchestration: preflight checks, the crawl-once/share-points
// pipeline, parallel CCN / SQLi / XSS scans, narrative generation and
// report persistence.

#pragma once

#include "pth/agent.hpp"
#include "pth/crawler.hpp"
#include "pth/policy.hpp"
#include "pth/probe.hpp"
#include "pth/report.hpp"
#include "pth/sqli_scanner.hpp"
#include "pth/tls_scan.hpp"
#include "pth/xss_scanner.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pth {

struct RunOptions {
    std::string url;
    bool ccn = true;
    bool sql = true;
    bool xss = true;
    int level = 1;
    int risk = 1;
    std::optional<Credentials> credentials;
    std::string agent = "stub"; // stub | remote
    std::set<RenderFormat> formats{RenderFormat::Json, RenderFormat::Markdown};
    std::string project = "default";
    std::string projects_dir = "projects";
    std::string organization; // used when creating a project non-interactively

    int max_pages = 200;
    int max_depth = 5;
    int timeout_s = 10;
    int workers = 4;
    int politeness_delay_ms = 0;

    std::string policy_dir;       // flag > PTH_POLICY_DIR > "data/policy"
    std::string fixture_scan_dir; // TLS facet fragments for hermetic runs
    std::string sqli_corpus_path; // empty = built-in corpus
    std::string xss_corpus_path;
    std::string agent_config_path = "agent.json";

    // Detection thresholds, recorded in the report for auditability.
    double true_threshold = 0.95;
    double false_threshold = 0.70;
    double delay_factor = 0.75;
    std::optional<double> base_delay_s; // overrides payload delays
};

struct RunPlan {
    bool run_ccn = false;
    bool run_sql = false;
    bool run_xss = false;
    std::vector<std::string> warnings;
};

class InvalidUrl : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TargetUnreachable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoModulesEnabled : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// URL must parse, a GET must answer with any status below 500, and at
// least one module must be enabled. An http target demotes the CCN module
// to a warning instead of failing the run.
RunPlan preflight(const RunOptions& options, Fetcher& fetcher);

struct RunResult {
    int exit_code = 0; // 0 clean, 2 findings, 1 fatal (set by the caller)
    Report report;
    std::vector<std::string> written_paths;
    RunPlan plan;
};

// Injection seams for tests; null members fall back to production
// implementations (real HTTP client, provider per options.agent, empty
// organization answer).
struct RunDeps {
    Fetcher* fetcher = nullptr;
    AgentProvider* agent = nullptr;
    AnswersProvider answers;
    bool persist_report = true;
};

// The full pipeline: crawl once, derive points once, run the enabled
// scanners concurrently, generate narrative, assemble/render/persist.
RunResult run_assessment(const RunOptions& options, const RunDeps& deps = {});

// The usage notice printed at startup.
std::string authorized_use_banner();

// Effective policy directory for these options (flag, then environment,
// then the bundled default).
std::string resolve_policy_dir(const RunOptions& options);

} // namespace pth
