#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "soap/oracle.hpp"
#include "soap/report.hpp"

namespace {

// 0 ok, 1 generic, 2 parse, 3 projection, 4 solver, 5 instance too large
constexpr int kExitGeneric = 1;
constexpr int kExitParse = 2;
constexpr int kExitSoap = 3;
constexpr int kExitSolver = 4;
constexpr int kExitTooLarge = 5;

bool logging_enabled() {
    const char* v = std::getenv("SOAP_LOG");
    return v && *v;
}

void log(const std::string& msg) {
    if (logging_enabled()) std::cerr << "[soap] " << msg << "\n";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string stem_of(const std::string& path) {
    size_t slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    size_t dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

int run_analyze(const std::string& file, const std::string& format,
                const soap::AnalyzeOptions& opts) {
    log("parsing " + file);
    soap::Program p = soap::parse_program(slurp(file));
    log("analyzing " + std::to_string(p.statements.size()) + " statement(s)");
    soap::Report r = soap::analyze_program(p, stem_of(file), opts);
    if (format == "json")
        std::cout << soap::render_json(r);
    else
        std::cout << soap::render_text(r);
    return 0;
}

int run_oracle(const std::string& file,
               const std::vector<std::string>& param_args, std::int64_t S,
               bool no_recompute, std::size_t budget) {
    soap::Program p = soap::parse_program(slurp(file));
    std::map<std::string, std::int64_t> params;
    for (const auto& a : param_args) {
        size_t eq = a.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--param expects SYM=INT, got " + a);
        params[a.substr(0, eq)] = std::stoll(a.substr(eq + 1));
    }
    log("verifying bound on the concrete instance");
    soap::OracleReport rep =
        soap::verify_bound(p, params, S, budget, !no_recompute);
    std::cout << "bound:  " << rep.bound << "  (" << rep.symbolic.str()
              << " at S=" << S << ")\n";
    std::cout << "exact:  " << rep.optimal.cost
              << (rep.optimal.exact
                      ? ""
                      : "  (search budget hit, bracket [" +
                            std::to_string(rep.optimal.lower) + ", " +
                            std::to_string(rep.optimal.upper) + "])")
              << "\n";
    std::cout << "greedy: " << rep.greedy << "\n";
    std::cout << "PASS\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"I/O lower-bound analyzer for affine loop-nest programs"};
    app.require_subcommand(1);

    std::string file, format = "text";
    soap::AnalyzeOptions opts;
    bool no_sdg = false;
    auto* analyze = app.add_subcommand("analyze", "derive symbolic bounds");
    analyze->add_option("file", file, "program in the loop DSL")->required();
    analyze->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"json", "text"}));
    analyze->add_option("--assume", opts.assumptions,
                        "growth relation, e.g. \"T < N\"");
    analyze->add_flag("--no-sdg", no_sdg, "skip the fused-graph bound");
    analyze->add_option("--cap", opts.cap, "fusion enumeration cap");

    std::string ofile;
    std::vector<std::string> param_args;
    std::int64_t S = 0;
    bool no_recompute = false;
    std::size_t budget = 2000000;
    auto* oracle =
        app.add_subcommand("oracle", "verify a bound against exact pebbling");
    oracle->add_option("file", ofile, "program in the loop DSL")->required();
    oracle->add_option("--param", param_args, "parameter binding SYM=INT");
    oracle->add_option("--S", S, "fast-memory capacity")->required();
    oracle->add_flag("--no-recompute", no_recompute,
                     "forbid recomputation in the exact search");
    oracle->add_option("--budget", budget, "expanded-state budget");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) {
            opts.with_sdg = !no_sdg;
            return run_analyze(file, format, opts);
        }
        return run_oracle(ofile, param_args, S, no_recompute, budget);
    } catch (const soap::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const soap::SoapError& e) {
        std::cerr << "normalization error: " << e.what() << "\n";
        return kExitSoap;
    } catch (const soap::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const soap::SdgError& e) {
        std::cerr << "fusion-graph error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const soap::OracleError& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return e.kind == soap::OracleError::Kind::TooLarge ? kExitTooLarge
                                                           : kExitGeneric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGeneric;
    }
}
