#include "pth/report.hpp"

#include "pth/html.hpp"
#include "pth/util.hpp"
#include "pth/version.hpp"

#include <fstream>
#include <sstream>

namespace pth {

using nlohmann::ordered_json;

namespace {

bool valid_project_name(const std::string& name) {
    if (name.empty() || name.size() > 128) return false;
    if (name.find("..") != std::string::npos) return false;
    if (name[0] == '.' || name[0] == '-') return false;
    for (char c : name) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
                  c == '.';
        if (!ok) return false;
    }
    return true;
}

} // namespace

Project create_or_open_project(const std::filesystem::path& base_dir, const std::string& name,
                               const AnswersProvider& answers) {
    if (!valid_project_name(name))
        throw InvalidName("project name must be a simple filesystem-safe identifier: '" +
                          name + "'");
    Project project;
    project.name = name;
    project.directory = base_dir / name;
    std::filesystem::path metadata_path = project.directory / "project.json";

    if (std::filesystem::exists(metadata_path)) {
        std::ifstream in(metadata_path);
        if (!in) throw IoError("cannot read " + metadata_path.string());
        try {
            ordered_json doc = ordered_json::parse(in);
            project.organization = doc.value("organization", "");
            project.created_at = doc.value("created_at", "");
        } catch (const nlohmann::json::exception& e) {
            throw IoError("corrupt project metadata in " + metadata_path.string() + ": " +
                          e.what());
        }
        return project;
    }

    std::error_code ec;
    std::filesystem::create_directories(project.directory, ec);
    if (ec) throw IoError("cannot create project directory: " + ec.message());

    project.organization = answers ? answers("organization") : "";
    project.created_at = iso8601_now();

    ordered_json doc{{"name", project.name},
                     {"organization", project.organization},
                     {"created_at", project.created_at}};
    std::ofstream out(metadata_path);
    if (!out) throw IoError("cannot write " + metadata_path.string());
    out << doc.dump(2) << "\n";
    return project;
}

std::string render_format_name(RenderFormat f) {
    switch (f) {
        case RenderFormat::Json: return "json";
        case RenderFormat::Markdown: return "markdown";
        case RenderFormat::Html: return "html";
    }
    return "?";
}

std::optional<RenderFormat> render_format_from_name(const std::string& name) {
    std::string n = to_lower(trim(name));
    if (n == "json") return RenderFormat::Json;
    if (n == "markdown" || n == "md") return RenderFormat::Markdown;
    if (n == "html") return RenderFormat::Html;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON serialization (canonical form)
// ---------------------------------------------------------------------------

namespace {

ordered_json point_to_json(const InjectionPoint& point) {
    ordered_json out;
    out["source"] = point.source == PointSource::FormField ? "form-field" : "url-param";
    out["page_url"] = point.page_url;
    out["parameter"] = point.parameter;
    out["baseline_value"] = point.baseline_value;
    out["method"] = point.method;
    if (point.form) {
        ordered_json fields = ordered_json::array();
        for (const auto& f : point.form->fields)
            fields.push_back({{"name", f.name},
                              {"kind", field_kind_name(f.kind)},
                              {"default_value", f.default_value}});
        out["form"] = {{"source_url", point.form->source_url},
                       {"action", point.form->action},
                       {"method", point.form->method},
                       {"fields", fields}};
    } else {
        out["form"] = nullptr;
    }
    return out;
}

FieldKind field_kind_from_name(const std::string& name) {
    for (FieldKind k : {FieldKind::Text, FieldKind::Hidden, FieldKind::Password,
                        FieldKind::Select, FieldKind::Textarea, FieldKind::Checkbox,
                        FieldKind::Radio, FieldKind::Other})
        if (field_kind_name(k) == name) return k;
    return FieldKind::Other;
}

InjectionPoint point_from_json(const ordered_json& doc) {
    InjectionPoint point;
    point.source = doc.at("source").get<std::string>() == "form-field"
                       ? PointSource::FormField
                       : PointSource::UrlParam;
    point.page_url = doc.at("page_url").get<std::string>();
    point.parameter = doc.at("parameter").get<std::string>();
    point.baseline_value = doc.at("baseline_value").get<std::string>();
    point.method = doc.at("method").get<std::string>();
    if (!doc.at("form").is_null()) {
        Form form;
        form.source_url = doc["form"].at("source_url").get<std::string>();
        form.action = doc["form"].at("action").get<std::string>();
        form.method = doc["form"].at("method").get<std::string>();
        for (const auto& f : doc["form"].at("fields")) {
            FormField field;
            field.name = f.at("name").get<std::string>();
            field.kind = field_kind_from_name(f.at("kind").get<std::string>());
            field.default_value = f.at("default_value").get<std::string>();
            form.fields.push_back(std::move(field));
        }
        point.form = std::move(form);
    }
    return point;
}

ordered_json sqli_finding_to_json(const SqliFinding& f) {
    ordered_json evidence;
    evidence["description"] = f.evidence.description;
    if (!f.evidence.matched_signature.empty())
        evidence["matched_signature"] = f.evidence.matched_signature;
    if (f.evidence.sim_true_baseline) {
        evidence["sim_true_baseline"] = *f.evidence.sim_true_baseline;
        evidence["sim_false_baseline"] = *f.evidence.sim_false_baseline;
        evidence["sim_true_false"] = *f.evidence.sim_true_false;
    }
    if (!f.evidence.latencies_ms.empty()) {
        evidence["latencies_ms"] = f.evidence.latencies_ms;
        evidence["thresholds_ms"] = f.evidence.thresholds_ms;
    }
    return ordered_json{{"point", point_to_json(f.point)},
                        {"technique", sqli_technique_name(f.technique)},
                        {"payload", f.payload},
                        {"payloads", f.payloads},
                        {"evidence", evidence},
                        {"confirmed", f.confirmed},
                        {"severity", f.severity}};
}

SqliFinding sqli_finding_from_json(const ordered_json& doc) {
    SqliFinding f;
    f.point = point_from_json(doc.at("point"));
    std::string technique = doc.at("technique").get<std::string>();
    f.technique = technique == "error-based"    ? SqliTechnique::ErrorBased
                  : technique == "boolean-blind" ? SqliTechnique::BooleanBlind
                                                 : SqliTechnique::TimeBased;
    f.payload = doc.at("payload").get<std::string>();
    f.payloads = doc.at("payloads").get<std::vector<std::string>>();
    const auto& evidence = doc.at("evidence");
    f.evidence.description = evidence.at("description").get<std::string>();
    f.evidence.matched_signature = evidence.value("matched_signature", "");
    if (evidence.contains("sim_true_baseline")) {
        f.evidence.sim_true_baseline = evidence["sim_true_baseline"].get<double>();
        f.evidence.sim_false_baseline = evidence["sim_false_baseline"].get<double>();
        f.evidence.sim_true_false = evidence["sim_true_false"].get<double>();
    }
    if (evidence.contains("latencies_ms")) {
        f.evidence.latencies_ms = evidence["latencies_ms"].get<std::vector<double>>();
        f.evidence.thresholds_ms = evidence["thresholds_ms"].get<std::vector<double>>();
    }
    f.confirmed = doc.at("confirmed").get<bool>();
    f.severity = doc.at("severity").get<std::string>();
    return f;
}

ordered_json xss_finding_to_json(const XssFinding& f) {
    return ordered_json{{"point", point_to_json(f.point)},
                        {"context", xss_context_name(f.context)},
                        {"payload", f.payload},
                        {"payloads", f.payloads},
                        {"evidence", f.evidence},
                        {"confirmed", f.confirmed},
                        {"severity", f.severity}};
}

XssFinding xss_finding_from_json(const ordered_json& doc) {
    XssFinding f;
    f.point = point_from_json(doc.at("point"));
    std::string context = doc.at("context").get<std::string>();
    f.context = context == "html-body"         ? XssContext::HtmlBody
                : context == "attribute-value" ? XssContext::AttributeValue
                : context == "script-block"    ? XssContext::ScriptBlock
                                               : XssContext::EncodedOnly;
    f.payload = doc.at("payload").get<std::string>();
    f.payloads = doc.at("payloads").get<std::vector<std::string>>();
    f.evidence = doc.at("evidence").get<std::string>();
    f.confirmed = doc.at("confirmed").get<bool>();
    f.severity = doc.at("severity").get<std::string>();
    return f;
}

ordered_json verdict_to_json(const ComplianceVerdict& v) {
    ordered_json out{{"kind", element_kind_name(v.element_kind)},
                     {"id", v.element_id},
                     {"category", category_name(v.category)}};
    out["matched_rule"] = v.matched_rule ? *v.matched_rule : ordered_json(nullptr);
    return out;
}

ComplianceVerdict verdict_from_json(const ordered_json& doc) {
    ComplianceVerdict v;
    std::string kind = doc.at("kind").get<std::string>();
    v.element_kind = kind == "Protocol"      ? ElementKind::Protocol
                     : kind == "CipherSuite" ? ElementKind::CipherSuite
                     : kind == "Curve"       ? ElementKind::Curve
                                             : ElementKind::CertificateKey;
    v.element_id = doc.at("id").get<std::string>();
    v.category = category_from_name(doc.at("category").get<std::string>())
                     .value_or(PolicyCategory::NotListed);
    if (!doc.at("matched_rule").is_null()) v.matched_rule = doc["matched_rule"];
    return v;
}

ordered_json report_to_json(const Report& report) {
    ordered_json doc;
    doc["schema_version"] = report.schema_version;
    doc["metadata"] = {{"tool", report.metadata.tool},
                       {"version", report.metadata.version},
                       {"target", report.metadata.target},
                       {"started_at", report.metadata.started_at},
                       {"finished_at", report.metadata.finished_at},
                       {"options", report.metadata.options},
                       {"warnings", report.metadata.warnings}};

    ordered_json verdicts = ordered_json::array();
    for (const auto& v : report.compliance.verdicts) verdicts.push_back(verdict_to_json(v));
    ordered_json checks = ordered_json::array();
    for (const auto& c : report.compliance.vulnerability_checks)
        checks.push_back(
            {{"check_id", c.check_id}, {"status", c.status}, {"detail", c.detail}});
    doc["compliance"] = {{"present", report.compliance.present},
                         {"target", report.compliance.target},
                         {"verdicts", verdicts},
                         {"vulnerability_checks", checks},
                         {"failed_facets", report.compliance.failed_facets}};

    ordered_json sqli = ordered_json::array();
    for (const auto& f : report.sqli_findings) sqli.push_back(sqli_finding_to_json(f));
    doc["sqli_findings"] = sqli;

    ordered_json xss = ordered_json::array();
    for (const auto& f : report.xss_findings) xss.push_back(xss_finding_to_json(f));
    doc["xss_findings"] = xss;

    ordered_json narrative = ordered_json::array();
    for (const auto& n : report.narrative)
        narrative.push_back({{"kind", n.kind},
                             {"text", n.text},
                             {"provider_id", n.provider_id},
                             {"degraded", n.degraded}});
    doc["narrative"] = narrative;

    ordered_json untestable = ordered_json::array();
    for (const auto& u : report.untestable)
        untestable.push_back({{"url", u.url}, {"reason", u.reason}});
    doc["untestable"] = untestable;

    ordered_json diagnostics = ordered_json::array();
    for (const auto& d : report.diagnostics)
        diagnostics.push_back(
            {{"point", d.point_id}, {"stage", d.stage}, {"detail", d.detail}});
    doc["diagnostics"] = diagnostics;
    return doc;
}

} // namespace

Report report_from_json(const std::string& json_text) {
    ordered_json doc = ordered_json::parse(json_text);
    Report report;
    report.schema_version = doc.at("schema_version").get<std::string>();
    const auto& metadata = doc.at("metadata");
    report.metadata.tool = metadata.at("tool").get<std::string>();
    report.metadata.version = metadata.at("version").get<std::string>();
    report.metadata.target = metadata.at("target").get<std::string>();
    report.metadata.started_at = metadata.at("started_at").get<std::string>();
    report.metadata.finished_at = metadata.at("finished_at").get<std::string>();
    report.metadata.options = metadata.at("options");
    report.metadata.warnings = metadata.at("warnings").get<std::vector<std::string>>();

    const auto& compliance = doc.at("compliance");
    report.compliance.present = compliance.at("present").get<bool>();
    report.compliance.target = compliance.at("target").get<std::string>();
    for (const auto& v : compliance.at("verdicts"))
        report.compliance.verdicts.push_back(verdict_from_json(v));
    for (const auto& c : compliance.at("vulnerability_checks")) {
        VulnerabilityCheck check;
        check.check_id = c.at("check_id").get<std::string>();
        check.status = c.at("status").get<std::string>();
        check.detail = c.at("detail").get<std::string>();
        report.compliance.vulnerability_checks.push_back(std::move(check));
    }
    report.compliance.failed_facets =
        compliance.at("failed_facets").get<std::vector<std::string>>();

    for (const auto& f : doc.at("sqli_findings"))
        report.sqli_findings.push_back(sqli_finding_from_json(f));
    for (const auto& f : doc.at("xss_findings"))
        report.xss_findings.push_back(xss_finding_from_json(f));
    for (const auto& n : doc.at("narrative"))
        report.narrative.push_back({n.at("kind").get<std::string>(),
                                    n.at("text").get<std::string>(),
                                    n.at("provider_id").get<std::string>(),
                                    n.at("degraded").get<bool>()});
    for (const auto& u : doc.at("untestable"))
        report.untestable.push_back(
            {u.at("url").get<std::string>(), u.at("reason").get<std::string>()});
    for (const auto& d : doc.at("diagnostics"))
        report.diagnostics.push_back({d.at("point").get<std::string>(),
                                      d.at("stage").get<std::string>(),
                                      d.at("detail").get<std::string>()});
    return report;
}

Report assemble_report(const RunMetadata& metadata, const ComplianceReport& compliance,
                       const SqliScanOutcome& sqli, const XssScanOutcome& xss,
                       const std::vector<NarrativeEntry>& narrative,
                       const std::vector<UntestablePage>& untestable) {
    Report report;
    report.schema_version = kReportSchemaVersion;
    report.metadata = metadata;
    report.compliance = compliance;
    report.sqli_findings = sqli.findings; // already in canonical scanner order
    report.xss_findings = xss.findings;
    report.narrative = narrative;
    report.untestable = untestable;
    report.diagnostics = sqli.diagnostics;
    report.diagnostics.insert(report.diagnostics.end(), xss.diagnostics.begin(),
                              xss.diagnostics.end());
    return report;
}

// ---------------------------------------------------------------------------
// Markdown / HTML views
// ---------------------------------------------------------------------------

namespace {

std::string category_css_class(PolicyCategory c) {
    switch (c) {
        case PolicyCategory::Recommended: return "cat-recommended";
        case PolicyCategory::Legacy: return "cat-legacy";
        case PolicyCategory::NotListed: return "cat-notlisted";
    }
    return "";
}

std::string md_escape_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += " ";
        else out += c;
    }
    return out;
}

const char* narrative_title(const std::string& kind) {
    if (kind == "executive_summary") return "Executive summary";
    if (kind == "mitigation_steps") return "Mitigation steps";
    if (kind == "severity_rationale") return "Severity rationale";
    if (kind == "vulnerability_steps") return "Vulnerability steps";
    return "Narrative";
}

std::string render_markdown(const Report& report) {
    std::ostringstream out;
    out << "# Web assessment report\n\n";
    out << "## Metadata\n\n";
    out << "- Tool: " << report.metadata.tool << " " << report.metadata.version << "\n";
    out << "- Target: " << report.metadata.target << "\n";
    out << "- Started: " << report.metadata.started_at << "\n";
    out << "- Finished: " << report.metadata.finished_at << "\n";
    out << "- Options: `" << report.metadata.options.dump() << "`\n";
    for (const auto& w : report.metadata.warnings) out << "- Warning: " << w << "\n";
    out << "\n";

    const NarrativeEntry* summary = nullptr;
    for (const auto& n : report.narrative)
        if (n.kind == "executive_summary") summary = &n;
    out << "## Executive summary\n\n";
    if (summary)
        out << summary->text << "\n\n";
    else
        out << "none generated\n\n";

    out << "## Cryptographic policy compliance\n\n";
    if (!report.compliance.present) {
        out << "not evaluated\n\n";
    } else if (report.compliance.verdicts.empty()) {
        out << "none found\n\n";
    } else {
        for (ElementKind kind : {ElementKind::Protocol, ElementKind::CipherSuite,
                                 ElementKind::Curve, ElementKind::CertificateKey}) {
            bool any = false;
            for (const auto& v : report.compliance.verdicts)
                if (v.element_kind == kind) any = true;
            if (!any) continue;
            out << "### " << element_kind_name(kind) << "\n\n";
            out << "| Element | Category |\n|---|---|\n";
            for (const auto& v : report.compliance.verdicts)
                if (v.element_kind == kind)
                    out << "| " << md_escape_cell(v.element_id) << " | "
                        << category_name(v.category) << " |\n";
            out << "\n";
        }
        if (!report.compliance.vulnerability_checks.empty()) {
            out << "### Vulnerability checks\n\n| Check | Status | Detail |\n|---|---|---|\n";
            for (const auto& c : report.compliance.vulnerability_checks)
                out << "| " << md_escape_cell(c.check_id) << " | " << c.status << " | "
                    << md_escape_cell(c.detail) << " |\n";
            out << "\n";
        }
        for (const auto& f : report.compliance.failed_facets)
            out << "- Facet failed: " << f << "\n";
        if (!report.compliance.failed_facets.empty()) out << "\n";
    }

    out << "## SQL injection findings\n\n";
    if (report.sqli_findings.empty()) {
        out << "none found\n\n";
    } else {
        for (const auto& f : report.sqli_findings) {
            out << "### " << f.point.page_url << " — parameter `" << f.point.parameter
                << "`\n\n";
            out << "- Technique: " << sqli_technique_name(f.technique) << "\n";
            out << "- Severity: " << f.severity << "\n";
            out << "- Payload: `" << f.payload << "`\n";
            out << "- Evidence: " << f.evidence.description << "\n\n";
        }
    }

    out << "## Reflected XSS findings\n\n";
    if (report.xss_findings.empty()) {
        out << "none found\n\n";
    } else {
        for (const auto& f : report.xss_findings) {
            out << "### " << f.point.page_url << " — parameter `" << f.point.parameter
                << "`\n\n";
            out << "- Context: " << xss_context_name(f.context) << "\n";
            out << "- Severity: " << f.severity << "\n";
            out << "- Payload: `" << f.payload << "`\n";
            out << "- Evidence:\n\n```\n" << f.evidence << "\n```\n\n";
        }
    }

    for (const auto& n : report.narrative) {
        if (n.kind == "executive_summary") continue;
        out << "## " << narrative_title(n.kind) << "\n\n" << n.text << "\n\n";
    }

    out << "## Untestable pages\n\n";
    if (report.untestable.empty()) {
        out << "none found\n";
    } else {
        for (const auto& u : report.untestable)
            out << "- " << u.url << " — " << u.reason << "\n";
    }
    return out.str();
}

std::string render_html(const Report& report) {
    std::ostringstream out;
    out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">\n"
        << "<title>Web assessment report</title>\n"
        << "<style>\n"
        << "body { font-family: sans-serif; margin: 2em; }\n"
        << "table { border-collapse: collapse; }\n"
        << "td, th { border: 1px solid #999; padding: 4px 8px; }\n"
        << ".cat-recommended { background: #c8e6c9; }\n"
        << ".cat-legacy { background: #ffe0b2; }\n"
        << ".cat-notlisted { background: #ffcdd2; }\n"
        << "pre { background: #f4f4f4; padding: 8px; overflow-x: auto; }\n"
        << "</style></head><body>\n";
    out << "<h1>Web assessment report</h1>\n";
    out << "<h2>Metadata</h2>\n<ul>\n";
    out << "<li>Tool: " << html_escape(report.metadata.tool) << " "
        << html_escape(report.metadata.version) << "</li>\n";
    out << "<li>Target: " << html_escape(report.metadata.target) << "</li>\n";
    out << "<li>Started: " << report.metadata.started_at << "</li>\n";
    out << "<li>Finished: " << report.metadata.finished_at << "</li>\n";
    out << "<li>Options: <code>" << html_escape(report.metadata.options.dump())
        << "</code></li>\n";
    for (const auto& w : report.metadata.warnings)
        out << "<li>Warning: " << html_escape(w) << "</li>\n";
    out << "</ul>\n";

    const NarrativeEntry* summary = nullptr;
    for (const auto& n : report.narrative)
        if (n.kind == "executive_summary") summary = &n;
    out << "<h2>Executive summary</h2>\n";
    out << "<p>" << (summary ? html_escape(summary->text) : "none generated") << "</p>\n";

    out << "<h2>Cryptographic policy compliance</h2>\n";
    if (!report.compliance.present) {
        out << "<p>not evaluated</p>\n";
    } else if (report.compliance.verdicts.empty()) {
        out << "<p>none found</p>\n";
    } else {
        for (ElementKind kind : {ElementKind::Protocol, ElementKind::CipherSuite,
                                 ElementKind::Curve, ElementKind::CertificateKey}) {
            bool any = false;
            for (const auto& v : report.compliance.verdicts)
                if (v.element_kind == kind) any = true;
            if (!any) continue;
            out << "<h3>" << element_kind_name(kind) << "</h3>\n<table>\n"
                << "<tr><th>Element</th><th>Category</th></tr>\n";
            for (const auto& v : report.compliance.verdicts) {
                if (v.element_kind != kind) continue;
                out << "<tr class=\"" << category_css_class(v.category) << "\"><td>"
                    << html_escape(v.element_id) << "</td><td>" << category_name(v.category)
                    << "</td></tr>\n";
            }
            out << "</table>\n";
        }
        if (!report.compliance.vulnerability_checks.empty()) {
            out << "<h3>Vulnerability checks</h3>\n<table>\n"
                << "<tr><th>Check</th><th>Status</th><th>Detail</th></tr>\n";
            for (const auto& c : report.compliance.vulnerability_checks)
                out << "<tr><td>" << html_escape(c.check_id) << "</td><td>"
                    << html_escape(c.status) << "</td><td>" << html_escape(c.detail)
                    << "</td></tr>\n";
            out << "</table>\n";
        }
        for (const auto& f : report.compliance.failed_facets)
            out << "<p>Facet failed: " << html_escape(f) << "</p>\n";
    }

    out << "<h2>SQL injection findings</h2>\n";
    if (report.sqli_findings.empty()) {
        out << "<p>none found</p>\n";
    } else {
        out << "<table>\n<tr><th>URL</th><th>Parameter</th><th>Technique</th>"
            << "<th>Payload</th><th>Evidence</th></tr>\n";
        for (const auto& f : report.sqli_findings)
            out << "<tr><td>" << html_escape(f.point.page_url) << "</td><td>"
                << html_escape(f.point.parameter) << "</td><td>"
                << sqli_technique_name(f.technique) << "</td><td><code>"
                << html_escape(f.payload) << "</code></td><td>"
                << html_escape(f.evidence.description) << "</td></tr>\n";
        out << "</table>\n";
    }

    out << "<h2>Reflected XSS findings</h2>\n";
    if (report.xss_findings.empty()) {
        out << "<p>none found</p>\n";
    } else {
        out << "<table>\n<tr><th>URL</th><th>Parameter</th><th>Context</th>"
            << "<th>Payload</th><th>Evidence</th></tr>\n";
        for (const auto& f : report.xss_findings)
            out << "<tr><td>" << html_escape(f.point.page_url) << "</td><td>"
                << html_escape(f.point.parameter) << "</td><td>"
                << xss_context_name(f.context) << "</td><td><code>"
                << html_escape(f.payload) << "</code></td><td><pre>"
                << html_escape(f.evidence) << "</pre></td></tr>\n";
        out << "</table>\n";
    }

    for (const auto& n : report.narrative) {
        if (n.kind == "executive_summary") continue;
        out << "<h2>" << narrative_title(n.kind) << "</h2>\n<pre>" << html_escape(n.text)
            << "</pre>\n";
    }

    out << "<h2>Untestable pages</h2>\n";
    if (report.untestable.empty()) {
        out << "<p>none found</p>\n";
    } else {
        out << "<ul>\n";
        for (const auto& u : report.untestable)
            out << "<li>" << html_escape(u.url) << " — " << html_escape(u.reason)
                << "</li>\n";
        out << "</ul>\n";
    }
    out << "</body></html>\n";
    return out.str();
}

} // namespace

std::string render(const Report& report, RenderFormat format) {
    switch (format) {
        case RenderFormat::Json: return report_to_json(report).dump(2) + "\n";
        case RenderFormat::Markdown: return render_markdown(report);
        case RenderFormat::Html: return render_html(report);
    }
    return "";
}

std::vector<std::string> persist(const Project& project, const Report& report,
                                 const std::set<RenderFormat>& formats) {
    std::filesystem::path run_dir;
    std::string stamp = timestamp_compact_now();
    for (int suffix = 0; suffix < 1000; ++suffix) {
        std::string name = "run-" + stamp;
        if (suffix > 0) name += "-" + std::to_string(suffix);
        run_dir = project.directory / name;
        if (!std::filesystem::exists(run_dir)) break;
    }
    std::error_code ec;
    std::filesystem::create_directories(run_dir, ec);
    if (ec) throw IoError("cannot create run directory: " + ec.message());

    std::vector<std::string> written;
    auto write = [&](const std::string& filename, const std::string& content) {
        std::filesystem::path path = run_dir / filename;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << content;
        written.push_back(path.string());
    };

    write("report.json", render(report, RenderFormat::Json)); // canonical, always
    if (formats.count(RenderFormat::Markdown))
        write("report.md", render(report, RenderFormat::Markdown));
    if (formats.count(RenderFormat::Html))
        write("report.html", render(report, RenderFormat::Html));
    return written;
}

} // namespace pth
