#include "pth/orchestrator.hpp"

#include "pth/http_client.hpp"
#include "pth/util.hpp"
#include "pth/version.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

namespace pth {

using nlohmann::ordered_json;

std::string authorized_use_banner() {
    return std::string(kToolName) + " " + kToolVersion +
           " — web application assessment toolkit\n"
           "Use only against systems you are explicitly authorized to test. The\n"
           "scan stays within the host of the provided --url; you remain\n"
           "responsible for complying with applicable laws and usage policies.\n";
}

std::string resolve_policy_dir(const RunOptions& options) {
    if (!options.policy_dir.empty()) return options.policy_dir;
    if (const char* env = std::getenv("PTH_POLICY_DIR"); env && *env) return env;
    return "data/policy";
}

RunPlan preflight(const RunOptions& options, Fetcher& fetcher) {
    if (!options.ccn && !options.sql && !options.xss)
        throw NoModulesEnabled("at least one of --ccn, --sql, --xss must be enabled");

    auto url = Url::parse(options.url);
    if (!url || !url->is_http())
        throw InvalidUrl("not a valid http(s) URL: " + options.url);

    HttpResponse response = fetcher.get(url->normalized());
    if (!response.ok())
        throw TargetUnreachable("target did not answer: " +
                                (response.error.empty() ? "no response" : response.error));
    if (response.status >= 500)
        throw TargetUnreachable("target answered with server error status " +
                                std::to_string(response.status));

    RunPlan plan;
    plan.run_sql = options.sql;
    plan.run_xss = options.xss;
    plan.run_ccn = options.ccn;
    if (options.ccn && url->scheme != "https") {
        plan.run_ccn = false;
        plan.warnings.push_back(
            "target uses http, not https: the CCN-STIC 807 module requires HTTPS and "
            "will not be executed; proceeding with the SQL injection and XSS modules");
    }
    return plan;
}

namespace {

ScanAdapterConfig tls_adapter_config(const RunOptions& options) {
    ScanAdapterConfig config;
    config.timeout_s = std::max(options.timeout_s, 60);
    if (!options.fixture_scan_dir.empty()) {
        config.mode = ScanAdapterMode::FixtureFile;
        std::filesystem::path dir(options.fixture_scan_dir);
        for (ScanFacet f : kAllFacets)
            config.fixture_paths[f] = (dir / (facet_name(f) + ".json")).string();
        return config;
    }
    // External commands come from an optional tls_commands.json next to the
    // policy rules: {"protocols": "cmd {url}", ...}.
    config.mode = ScanAdapterMode::External;
    std::filesystem::path commands_path =
        std::filesystem::path(resolve_policy_dir(options)) / "tls_commands.json";
    std::ifstream in(commands_path);
    if (in) {
        try {
            ordered_json doc = ordered_json::parse(in);
            for (ScanFacet f : kAllFacets) {
                std::string name = facet_name(f);
                if (doc.contains(name)) config.commands[f] = doc[name].get<std::string>();
            }
        } catch (const nlohmann::json::exception&) {
            // Fall through with whatever parsed; run_scan reports the gap.
        }
    }
    return config;
}

ordered_json options_to_json(const RunOptions& options, const RunPlan& plan) {
    ordered_json out;
    out["url"] = options.url;
    out["ccn"] = plan.run_ccn;
    out["sql"] = plan.run_sql;
    out["xss"] = plan.run_xss;
    out["level"] = options.level;
    out["risk"] = options.risk;
    out["credentials_provided"] = options.credentials.has_value();
    out["agent"] = options.agent;
    ordered_json formats = ordered_json::array();
    for (const auto& f : options.formats) formats.push_back(render_format_name(f));
    out["reporter"] = formats;
    out["project"] = options.project;
    out["max_pages"] = options.max_pages;
    out["max_depth"] = options.max_depth;
    out["timeout_s"] = options.timeout_s;
    out["thresholds"] = {{"true_threshold", options.true_threshold},
                         {"false_threshold", options.false_threshold},
                         {"delay_factor", options.delay_factor}};
    if (options.base_delay_s) out["thresholds"]["base_delay_s"] = *options.base_delay_s;
    return out;
}

std::vector<NarrativeEntry> make_narrative(const RunOptions& options, const RunDeps& deps,
                                           const ComplianceReport& compliance,
                                           const std::vector<SqliFinding>& sqli,
                                           const std::vector<XssFinding>& xss) {
    ordered_json context = build_context(compliance, sqli, xss);

    StubAgent stub;
    std::unique_ptr<RemoteAgent> remote;
    AgentProvider* provider = deps.agent;
    if (!provider) {
        if (options.agent == "remote") {
            auto config = load_remote_agent_config(options.agent_config_path);
            if (config) {
                remote = std::make_unique<RemoteAgent>(*config);
                provider = remote.get();
            } else {
                std::cerr << "[agent] remote agent selected but "
                          << options.agent_config_path
                          << " is missing or incomplete; using the stub\n";
                provider = &stub;
            }
        } else {
            provider = &stub;
        }
    }

    std::vector<NarrativeEntry> narrative;
    for (PromptKind kind : kNarrativeKinds) {
        AgentRequest request;
        request.kind = kind;
        request.context = context;
        AgentResponse response = generate(*provider, request);
        NarrativeEntry entry;
        entry.kind = prompt_kind_name(kind);
        entry.text = response.text;
        entry.provider_id = response.provider_id;
        // A remote selection that ended up on the stub path is degraded
        // output even when the config was simply missing.
        entry.degraded = response.degraded ||
                         (options.agent == "remote" && response.provider_id == "stub");
        narrative.push_back(std::move(entry));
    }
    return narrative;
}

} // namespace

RunResult run_assessment(const RunOptions& options, const RunDeps& deps) {
    RunResult result;

    HttpClientConfig client_config;
    client_config.timeout_s = options.timeout_s;
    client_config.politeness_delay_ms = options.politeness_delay_ms;
    client_config.insecure_tls = true; // lab targets use self-signed certs
    HttpClient own_client(client_config);
    Fetcher& fetcher = deps.fetcher ? *deps.fetcher : own_client;

    result.plan = preflight(options, fetcher);
    const RunPlan& plan = result.plan;

    RunMetadata metadata;
    metadata.tool = kToolName;
    metadata.version = kToolVersion;
    metadata.target = options.url;
    metadata.started_at = iso8601_now();
    metadata.options = options_to_json(options, plan);
    metadata.warnings = plan.warnings;

    // One crawl; both scanners consume the same pages and points.
    CrawlConfig crawl_config;
    crawl_config.max_pages = options.max_pages;
    crawl_config.max_depth = options.max_depth;
    crawl_config.request_timeout_s = options.timeout_s;
    crawl_config.politeness_delay_ms = options.politeness_delay_ms;
    std::vector<PageRecord> pages = crawl(options.url, crawl_config, fetcher);

    std::vector<Form> forms;
    for (const auto& page : pages) {
        if (!page.fetch_error.empty()) continue;
        for (auto& form : extract_forms(page)) forms.push_back(std::move(form));
    }
    DerivedPoints derived = derive_injection_points(pages, forms);

    ProbeOptions probe_options;
    probe_options.credentials = options.credentials;
    probe_options.timeout_s = options.timeout_s;

    // The three scan pipelines run concurrently; each owns its worker pool.
    std::future<ComplianceReport> ccn_future;
    if (plan.run_ccn) {
        ccn_future = std::async(std::launch::async, [&]() -> ComplianceReport {
            PolicyEngine engine(load_rule_set_dir(resolve_policy_dir(options)));
            TlsScanResult scan = run_scan(options.url, tls_adapter_config(options),
                                          {kAllFacets[0], kAllFacets[1], kAllFacets[2],
                                           kAllFacets[3], kAllFacets[4]});
            return engine.evaluate_scan(scan);
        });
    }

    std::future<SqliScanOutcome> sqli_future;
    if (plan.run_sql) {
        sqli_future = std::async(std::launch::async, [&]() {
            SqliOptions sqli_options;
            sqli_options.level = options.level;
            sqli_options.risk = options.risk;
            sqli_options.probe = probe_options;
            sqli_options.true_threshold = options.true_threshold;
            sqli_options.false_threshold = options.false_threshold;
            sqli_options.delay_factor = options.delay_factor;
            sqli_options.base_delay_override_s = options.base_delay_s;
            sqli_options.workers = options.workers;
            const auto corpus = options.sqli_corpus_path.empty()
                                    ? builtin_sqli_corpus()
                                    : load_sqli_corpus(options.sqli_corpus_path);
            return scan_sqli(derived.points, corpus, sqli_options, fetcher);
        });
    }

    std::future<XssScanOutcome> xss_future;
    if (plan.run_xss) {
        xss_future = std::async(std::launch::async, [&]() {
            XssOptions xss_options;
            xss_options.probe = probe_options;
            xss_options.workers = options.workers;
            const auto corpus = options.xss_corpus_path.empty()
                                    ? builtin_xss_corpus()
                                    : load_xss_corpus(options.xss_corpus_path);
            return scan_xss(derived.points, corpus, xss_options, fetcher);
        });
    }

    ComplianceReport compliance;
    if (ccn_future.valid()) {
        try {
            compliance = ccn_future.get();
        } catch (const std::exception& e) {
            compliance.present = true;
            compliance.target = options.url;
            metadata.warnings.push_back(std::string("CCN module failed: ") + e.what());
        }
    }
    SqliScanOutcome sqli;
    if (sqli_future.valid()) sqli = sqli_future.get();
    XssScanOutcome xss;
    if (xss_future.valid()) xss = xss_future.get();

    std::vector<NarrativeEntry> narrative =
        make_narrative(options, deps, compliance, sqli.findings, xss.findings);

    metadata.finished_at = iso8601_now();
    result.report =
        assemble_report(metadata, compliance, sqli, xss, narrative, derived.untestable);

    if (deps.persist_report) {
        AnswersProvider answers = deps.answers;
        if (!answers) {
            std::string organization = options.organization;
            answers = [organization](const std::string&) { return organization; };
        }
        Project project =
            create_or_open_project(options.projects_dir, options.project, answers);
        result.written_paths = persist(project, result.report, options.formats);
    }

    result.exit_code = result.report.finding_count() > 0 ? 2 : 0;
    return result;
}

} // namespace pth
