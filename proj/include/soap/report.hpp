#ifndef SOAP_REPORT_HPP
#define SOAP_REPORT_HPP

#include "soap/sdg.hpp"

namespace soap {

inline constexpr const char* kToolVersion = "0.1.0";

/// One analyzed statement regime, fully rendered. Empty strings stand for
/// absent values (X0 when the intensity is constant, case_condition for the
/// default regime).
struct StatementReport {
    std::string id;
    std::string case_condition;
    std::string leading;
    std::string full_bound;
    std::string rho;
    std::string x0;
    std::map<std::string, std::string> tiles;
    std::vector<std::string> assumptions;
    std::vector<std::string> warnings;

    friend bool operator==(const StatementReport&, const StatementReport&) = default;
};

struct Report {
    std::string program;
    std::string version;
    std::vector<StatementReport> statements;  // default regime per statement
    std::vector<StatementReport> cases;       // further stride regimes
    bool has_sdg = false;
    std::string sdg_bound;                    // fused whole-program bound
    std::vector<std::string> fusion;          // arrays of the max-rho subgraph
    std::string leading;                      // program-level leading term
    std::string full_bound;
    std::string x0;
    std::string rho;
    std::map<std::string, std::string> tiles;
    std::vector<std::string> warnings;

    friend bool operator==(const Report&, const Report&) = default;
};

struct AnalyzeOptions {
    bool with_sdg = true;
    size_t cap = 20;
    std::vector<std::string> assumptions;  // "T < N" style growth relations
};

/// Runs normalization, per-statement bounds and the fused-graph bound and
/// renders everything into strings.
Report analyze_program(const Program& p, const std::string& name,
                       const AnalyzeOptions& opts = {});

std::string render_json(const Report& r);
Report parse_report(const std::string& json_text);
std::string render_text(const Report& r);

} // namespace soap

#endif
