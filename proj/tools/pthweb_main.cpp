// Command-line entry point for the assessment tool.

#include "pth/orchestrator.hpp"
#include "pth/util.hpp"
#include "pth/version.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

const char* kAnsiReset = "\033[0m";
const char* kAnsiGreen = "\033[32m";
const char* kAnsiOrange = "\033[33m";
const char* kAnsiRed = "\033[31m";

const char* category_color(pth::PolicyCategory c) {
    switch (c) {
        case pth::PolicyCategory::Recommended: return kAnsiGreen;
        case pth::PolicyCategory::Legacy: return kAnsiOrange;
        case pth::PolicyCategory::NotListed: return kAnsiRed;
    }
    return kAnsiReset;
}

void print_console_summary(const pth::Report& report) {
    if (report.compliance.present) {
        std::cout << "\nCCN-STIC 807 compliance for " << report.compliance.target << ":\n";
        for (const auto& v : report.compliance.verdicts) {
            std::cout << "  [" << pth::element_kind_name(v.element_kind) << "] "
                      << category_color(v.category) << v.element_id << " -> "
                      << pth::category_name(v.category) << kAnsiReset << "\n";
        }
        for (const auto& f : report.compliance.failed_facets)
            std::cout << "  facet failed: " << f << "\n";
    }
    for (const auto& f : report.sqli_findings) {
        std::cout << kAnsiRed << "[SQLi] " << kAnsiReset << f.point.page_url
                  << " parameter '" << f.point.parameter << "' ("
                  << pth::sqli_technique_name(f.technique) << ") payload: " << f.payload
                  << "\n";
    }
    for (const auto& f : report.xss_findings) {
        std::cout << kAnsiOrange << "[XSS] " << kAnsiReset << f.point.page_url
                  << " parameter '" << f.point.parameter << "' ("
                  << pth::xss_context_name(f.context) << ") payload: " << f.payload << "\n";
    }
    if (report.finding_count() == 0) std::cout << "No vulnerabilities found.\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(pth::kToolName) + " — web application assessment toolkit"};
    app.set_version_flag("--version", pth::kToolVersion);

    pth::RunOptions options;
    std::string user, password, reporter = "json,markdown";

    app.add_option("--url", options.url, "Target URL; the crawl stays within its host")
        ->required();
    app.add_option("--ccn", options.ccn,
                   "Run the CCN-STIC 807 compliance module (default true)");
    app.add_option("--sql", options.sql, "Run SQL injection detection (default true)");
    app.add_option("--xss", options.xss, "Run reflected XSS detection (default true)");
    app.add_option("--level", options.level, "Testing intensity, 1-5 (default 1)")
        ->check(CLI::Range(1, 5));
    app.add_option("--risk", options.risk, "Testing risk tier, 1-3 (default 1)")
        ->check(CLI::Range(1, 3));
    app.add_option("--user", user, "Username substituted into credential-looking fields");
    app.add_option("--password", password,
                   "Password substituted into credential-looking fields");
    app.add_option("--agent", options.agent, "Narrative agent: stub | remote (default stub)")
        ->check(CLI::IsMember({"stub", "remote"}));
    app.add_option("--reporter", reporter,
                   "Comma-separated report formats: json,markdown,html (JSON is always "
                   "written)");
    app.add_option("--project", options.project, "Project name results are stored under");
    app.add_option("--projects-dir", options.projects_dir,
                   "Directory holding project folders (default ./projects)");
    app.add_option("--organization", options.organization,
                   "Organization recorded when creating a new project");
    app.add_option("--max-pages", options.max_pages, "Crawl page budget (default 200)")
        ->check(CLI::PositiveNumber);
    app.add_option("--max-depth", options.max_depth, "Crawl depth budget (default 5)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--timeout", options.timeout_s, "Per-request timeout in seconds")
        ->check(CLI::PositiveNumber);
    app.add_option("--workers", options.workers, "Probe worker threads per scanner")
        ->check(CLI::PositiveNumber);
    app.add_option("--politeness-delay", options.politeness_delay_ms,
                   "Minimum per-host delay between requests, milliseconds");
    app.add_option("--policy-dir", options.policy_dir,
                   "Directory with the CCN rule files (also via PTH_POLICY_DIR)");
    app.add_option("--fixture-scan", options.fixture_scan_dir,
                   "Directory of per-facet TLS scan fragment files; replaces external "
                   "scan commands");
    app.add_option("--sqli-corpus", options.sqli_corpus_path,
                   "SQLi payload corpus JSON (default: built-in set)");
    app.add_option("--xss-corpus", options.xss_corpus_path,
                   "XSS payload corpus JSON (default: built-in set)");
    app.add_option("--agent-config", options.agent_config_path,
                   "Remote agent config file (default agent.json)");
    app.add_option("--true-threshold", options.true_threshold,
                   "Boolean-blind TRUE/baseline similarity floor (default 0.95)");
    app.add_option("--false-threshold", options.false_threshold,
                   "Boolean-blind FALSE/baseline similarity ceiling (default 0.70)");
    app.add_option("--delay-factor", options.delay_factor,
                   "Fraction of the induced delay that must appear (default 0.75)");
    double base_delay = 0;
    auto* base_delay_opt = app.add_option(
        "--base-delay", base_delay, "Override time-based payload delay, seconds");

    CLI11_PARSE(app, argc, argv);

    if (!user.empty() || !password.empty())
        options.credentials = pth::Credentials{user, password};
    if (base_delay_opt->count() > 0) options.base_delay_s = base_delay;

    options.formats.clear();
    for (const auto& name : pth::split(reporter, ',')) {
        auto format = pth::render_format_from_name(name);
        if (!format) {
            std::cerr << "unknown reporter format: " << name
                      << " (accepted: json, markdown, html)\n";
            return 1;
        }
        options.formats.insert(*format);
    }
    options.formats.insert(pth::RenderFormat::Json);

    std::cout << pth::authorized_use_banner() << "\n";

    try {
        pth::RunResult result = pth::run_assessment(options);
        for (const auto& warning : result.report.metadata.warnings)
            std::cout << "warning: " << warning << "\n";
        print_console_summary(result.report);
        std::cout << "\nReport written to:\n";
        for (const auto& path : result.written_paths) std::cout << "  " << path << "\n";
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 1;
    }
}
