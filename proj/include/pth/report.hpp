// Project workspaces and report consolidation. The canonical artifact is
// schema-versioned JSON; Markdown and HTML are derived views that must
// show every finding's payload and evidence verbatim.

#pragma once

#include "pth/agent.hpp"
#include "pth/policy.hpp"
#include "pth/probe.hpp"
#include "pth/sqli_scanner.hpp"
#include "pth/xss_scanner.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace pth {

class InvalidName : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Project {
    std::string name;
    std::string organization;
    std::string created_at;
    std::filesystem::path directory;
};

// Answers provider for interactive project creation; receives the question
// label ("organization") and returns the answer.
using AnswersProvider = std::function<std::string(const std::string&)>;

// Reopens <base_dir>/<name> if its metadata exists, otherwise asks for the
// organization and creates it. Names must be filesystem-safe.
Project create_or_open_project(const std::filesystem::path& base_dir, const std::string& name,
                               const AnswersProvider& answers);

enum class RenderFormat { Json, Markdown, Html };
std::string render_format_name(RenderFormat f);
std::optional<RenderFormat> render_format_from_name(const std::string& name);

struct RunMetadata {
    std::string tool;
    std::string version;
    std::string target;
    std::string started_at;
    std::string finished_at;
    nlohmann::ordered_json options; // exactly as run: flags, level/risk, thresholds
    std::vector<std::string> warnings;

    bool operator==(const RunMetadata&) const = default;
};

struct NarrativeEntry {
    std::string kind; // prompt kind name
    std::string text;
    std::string provider_id;
    bool degraded = false;

    bool operator==(const NarrativeEntry&) const = default;
};

struct Report {
    std::string schema_version;
    RunMetadata metadata;
    ComplianceReport compliance;
    std::vector<SqliFinding> sqli_findings;
    std::vector<XssFinding> xss_findings;
    std::vector<NarrativeEntry> narrative;
    std::vector<UntestablePage> untestable;
    std::vector<ScanDiagnostic> diagnostics;

    bool operator==(const Report&) const = default;

    size_t finding_count() const { return sqli_findings.size() + xss_findings.size(); }
};

Report assemble_report(const RunMetadata& metadata, const ComplianceReport& compliance,
                       const SqliScanOutcome& sqli, const XssScanOutcome& xss,
                       const std::vector<NarrativeEntry>& narrative,
                       const std::vector<UntestablePage>& untestable);

// Canonical JSON (stable key order), or a derived Markdown/HTML view.
std::string render(const Report& report, RenderFormat format);

// Inverse of render(report, Json).
Report report_from_json(const std::string& json_text);

// Writes report.json plus the requested derived views into a fresh
// timestamped run directory under the project; returns the paths written.
std::vector<std::string> persist(const Project& project, const Report& report,
                                 const std::set<RenderFormat>& formats);

} // namespace pth
