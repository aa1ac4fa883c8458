// SQL injection detection: error-based, boolean-blind and time-based
// techniques over injection points, gated by level/risk, with mandatory
// confirmation re-testing before anything is reported.

#pragma once

#include "pth/probe.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pth {

enum class SqliTechnique { ErrorBased, BooleanBlind, TimeBased };
std::string sqli_technique_name(SqliTechnique t);

struct SqliPayload {
    std::string body; // template; "{v}" = baseline value, "{d}" = delay seconds
    SqliTechnique technique = SqliTechnique::ErrorBased;
    int min_level = 1; // 1..5
    int min_risk = 1;  // 1..3
    std::string pair_id;   // boolean twins share it
    bool truth = false;    // boolean: the TRUE twin
    std::optional<double> expected_delay_s; // time-based
    std::string dbms_hint;

    bool operator==(const SqliPayload&) const = default;
};

class OutOfRange : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PayloadCorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Loads the corpus JSON ({"description":..., "payloads":[...]}) and
// validates technique-specific invariants.
std::vector<SqliPayload> load_sqli_corpus(const std::string& path);
// Built-in corpus identical to the shipped data file, for tests that must
// not depend on file layout.
const std::vector<SqliPayload>& builtin_sqli_corpus();

// All payloads with min_level <= level and min_risk <= risk. Monotone in
// both parameters; (1,1) covers every technique.
std::vector<SqliPayload> select_payloads(const std::vector<SqliPayload>& corpus, int level,
                                         int risk);

struct SqliEvidence {
    std::string description; // names the probed parameter, no volatile data
    std::string matched_signature;
    std::optional<double> sim_true_baseline;
    std::optional<double> sim_false_baseline;
    std::optional<double> sim_true_false;
    std::vector<double> latencies_ms;  // probe then 2x re-test
    std::vector<double> thresholds_ms;

    bool operator==(const SqliEvidence&) const = default;
};

struct SqliFinding {
    InjectionPoint point;
    SqliTechnique technique = SqliTechnique::ErrorBased;
    std::string payload;               // first hit
    std::vector<std::string> payloads; // all payloads that hit
    SqliEvidence evidence;
    bool confirmed = false;
    std::string severity = "High";

    bool operator==(const SqliFinding&) const = default;
};

struct SqliOptions {
    int level = 1;
    int risk = 1;
    ProbeOptions probe;
    double true_threshold = 0.95;  // similarity(TRUE, baseline) floor
    double false_threshold = 0.70; // similarity(FALSE, baseline) ceiling
    double delay_factor = 0.75;    // fraction of the induced delay that must appear
    std::optional<double> base_delay_override_s;
    int workers = 4;
};

struct ScanDiagnostic {
    std::string point_id;
    std::string stage;
    std::string detail;
    bool operator==(const ScanDiagnostic&) const = default;
};

struct SqliScanOutcome {
    std::vector<SqliFinding> findings; // sorted (page_url, parameter, technique)
    std::vector<ScanDiagnostic> diagnostics;
};

// One technique's decision procedure against an existing baseline. These
// return unconfirmed candidates; detect_* wraps them with confirmation.
std::optional<SqliFinding> run_error_procedure(const InjectionPoint& point,
                                               const std::vector<SqliPayload>& payloads,
                                               const BaselineProfile& baseline,
                                               const SqliOptions& options, Fetcher& fetcher);
std::optional<SqliFinding> run_boolean_procedure(const InjectionPoint& point,
                                                 const std::vector<SqliPayload>& payloads,
                                                 const BaselineProfile& baseline,
                                                 const SqliOptions& options, Fetcher& fetcher);
std::optional<SqliFinding> run_time_procedure(const InjectionPoint& point,
                                              const std::vector<SqliPayload>& payloads,
                                              const BaselineProfile& baseline,
                                              const SqliOptions& options, Fetcher& fetcher);

// Re-executes the candidate technique's full decision procedure from a
// fresh baseline; only a reproduced hit comes back confirmed.
std::optional<SqliFinding> confirm_finding(const SqliFinding& candidate,
                                           const std::vector<SqliPayload>& payloads,
                                           const SqliOptions& options, Fetcher& fetcher);

std::vector<SqliFinding> detect_error_based(const InjectionPoint& point,
                                            const std::vector<SqliPayload>& payloads,
                                            const BaselineProfile& baseline,
                                            const SqliOptions& options, Fetcher& fetcher);
std::vector<SqliFinding> detect_boolean_blind(const InjectionPoint& point,
                                              const std::vector<SqliPayload>& payloads,
                                              const BaselineProfile& baseline,
                                              const SqliOptions& options, Fetcher& fetcher);
std::vector<SqliFinding> detect_time_based(const InjectionPoint& point,
                                           const std::vector<SqliPayload>& payloads,
                                           const BaselineProfile& baseline,
                                           const SqliOptions& options, Fetcher& fetcher);

// Full scan: baseline once per point, the three detectors sequentially per
// point, point-level parallelism, deterministic output ordering.
SqliScanOutcome scan_sqli(const std::vector<InjectionPoint>& points,
                          const std::vector<SqliPayload>& corpus, const SqliOptions& options,
                          Fetcher& fetcher);

// Concrete payload string for a template at a given delay.
std::string render_payload(const std::string& payload_template,
                           const std::string& baseline_value, double delay_s);

// DBMS error signature scan; returns the human-readable signature name of
// the first regex that matches `body` but not `baseline_body`.
std::optional<std::string> new_error_signature(const std::string& body,
                                               const std::string& baseline_body);

} // namespace pth
