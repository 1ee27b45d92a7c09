#include "soap/report.hpp"

#include <sstream>

#include <json.hpp>

namespace soap {

namespace {

using nlohmann::json;

StatementReport render_statement(const BoundResult& b) {
    StatementReport r;
    r.id = b.id;
    r.case_condition = b.case_condition;
    r.leading = b.leading.str();
    r.full_bound = b.Q.str();
    r.rho = b.rho.str();
    if (b.X0) r.x0 = b.X0->str();
    for (const auto& [var, e] : b.tiling.tiles) r.tiles[var] = e.str();
    r.assumptions = b.tiling.assumptions;
    r.warnings = b.warnings;
    return r;
}

json statement_json(const StatementReport& s) {
    json j;
    j["id"] = s.id;
    j["case"] = s.case_condition;
    j["leading"] = s.leading;
    j["full_bound"] = s.full_bound;
    j["rho"] = s.rho;
    j["X0"] = s.x0.empty() ? json() : json(s.x0);
    j["tiles"] = json(s.tiles);
    j["assumptions"] = s.assumptions;
    j["warnings"] = s.warnings;
    return j;
}

StatementReport statement_from_json(const json& j) {
    StatementReport s;
    s.id = j.at("id").get<std::string>();
    s.case_condition = j.at("case").get<std::string>();
    s.leading = j.at("leading").get<std::string>();
    s.full_bound = j.at("full_bound").get<std::string>();
    s.rho = j.at("rho").get<std::string>();
    if (!j.at("X0").is_null()) s.x0 = j.at("X0").get<std::string>();
    s.tiles = j.at("tiles").get<std::map<std::string, std::string>>();
    s.assumptions = j.at("assumptions").get<std::vector<std::string>>();
    s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return s;
}

void print_statement(std::ostream& os, const StatementReport& s) {
    os << s.id;
    if (!s.case_condition.empty()) os << " [" << s.case_condition << "]";
    os << "\n";
    os << "  leading bound: " << s.leading << "\n";
    os << "  full bound:    " << s.full_bound << "\n";
    os << "  rho:           " << s.rho << "\n";
    if (!s.x0.empty()) os << "  X0:            " << s.x0 << "\n";
    if (!s.tiles.empty()) {
        os << "  tiles:        ";
        for (const auto& [var, e] : s.tiles) os << " " << var << "=" << e;
        os << "\n";
    }
    for (const auto& a : s.assumptions) os << "  assume: " << a << "\n";
    for (const auto& w : s.warnings) os << "  warning: " << w << "\n";
}

} // namespace

Report analyze_program(const Program& p, const std::string& name,
                       const AnalyzeOptions& opts) {
    Report r;
    r.program = name;
    r.version = kToolVersion;

    GrowthOrder order = default_order(p);
    for (const auto& rel : opts.assumptions) order.add_assumption(rel);

    SymExpr total;
    for (const auto& st : p.statements) {
        std::vector<SoapStatement> regimes = normalize_statement(st);
        for (size_t c = 0; c < regimes.size(); ++c) {
            BoundResult b = statement_bound(regimes[c], order);
            StatementReport sr = render_statement(b);
            if (c == 0) {
                r.statements.push_back(sr);
                total += b.Q;
            } else {
                r.cases.push_back(sr);
            }
        }
    }

    if (opts.with_sdg) {
        Sdg g = build_sdg(p);
        SdgBound sb = sdg_bound(g, order, opts.cap);
        r.has_sdg = true;
        r.sdg_bound = sb.Q.str();
        r.fusion = sb.best_fusion;
        r.leading = sb.leading.str();
        r.full_bound = sb.Q.str();
        r.warnings = sb.warnings;
    } else {
        r.full_bound = total.str();
        r.leading = total.leading_term(order).str();
    }
    if (!r.statements.empty()) {
        r.x0 = r.statements[0].x0;
        r.rho = r.statements[0].rho;
        r.tiles = r.statements[0].tiles;
    }
    return r;
}

std::string render_json(const Report& r) {
    json j;
    j["program"] = r.program;
    j["version"] = r.version;
    json stmts = json::array();
    for (const auto& s : r.statements) stmts.push_back(statement_json(s));
    j["statements"] = stmts;
    json cases = json::array();
    for (const auto& s : r.cases) cases.push_back(statement_json(s));
    j["cases"] = cases;
    j["sdg_bound"] = r.has_sdg ? json(r.sdg_bound) : json();
    j["fusion"] = r.fusion;
    j["leading"] = r.leading;
    j["full_bound"] = r.full_bound;
    j["X0"] = r.x0.empty() ? json() : json(r.x0);
    j["rho"] = r.rho;
    j["tiles"] = json(r.tiles);
    j["warnings"] = r.warnings;
    return j.dump(2) + "\n";
}

Report parse_report(const std::string& json_text) {
    json j = json::parse(json_text);
    Report r;
    r.program = j.at("program").get<std::string>();
    r.version = j.at("version").get<std::string>();
    for (const auto& s : j.at("statements")) r.statements.push_back(statement_from_json(s));
    for (const auto& s : j.at("cases")) r.cases.push_back(statement_from_json(s));
    r.has_sdg = !j.at("sdg_bound").is_null();
    if (r.has_sdg) r.sdg_bound = j.at("sdg_bound").get<std::string>();
    r.fusion = j.at("fusion").get<std::vector<std::string>>();
    r.leading = j.at("leading").get<std::string>();
    r.full_bound = j.at("full_bound").get<std::string>();
    if (!j.at("X0").is_null()) r.x0 = j.at("X0").get<std::string>();
    r.rho = j.at("rho").get<std::string>();
    r.tiles = j.at("tiles").get<std::map<std::string, std::string>>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
}

std::string render_text(const Report& r) {
    std::ostringstream os;
    os << "program: " << r.program << " (tool " << r.version << ")\n";
    for (const auto& s : r.statements) print_statement(os, s);
    for (const auto& s : r.cases) print_statement(os, s);
    os << "leading bound:   " << r.leading << "\n";
    os << "full bound:      " << r.full_bound << "\n";
    if (r.has_sdg) {
        os << "fused bound:     " << r.sdg_bound << "\n";
        if (!r.fusion.empty()) {
            os << "fusion hint:    ";
            for (const auto& a : r.fusion) os << " " << a;
            os << "\n";
        }
    }
    if (!r.rho.empty()) os << "rho:             " << r.rho << "\n";
    if (!r.x0.empty()) os << "X0:              " << r.x0 << "\n";
    if (!r.tiles.empty()) {
        os << "tiles:          ";
        for (const auto& [var, e] : r.tiles) os << " " << var << "=" << e;
        os << "\n";
    }
    for (const auto& w : r.warnings) os << "warning: " << w << "\n";
    return os.str();
}

} // namespace soap
