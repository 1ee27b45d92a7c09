#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "soap/report.hpp"

using namespace soap;

namespace {

std::string load(const std::string& name) {
    std::ifstream in(std::string(KERNEL_DIR) + "/" + name);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Report report_of(const std::string& kernel, AnalyzeOptions opts = {}) {
    Program p = parse_program(load(kernel));
    std::string stem = kernel.substr(0, kernel.find('.'));
    return analyze_program(p, stem, opts);
}

} // namespace

TEST_CASE("single-statement report carries the derived quantities") {
    Report r = report_of("cholesky.soap");
    CHECK(r.program == "cholesky");
    CHECK(r.version == kToolVersion);
    REQUIRE(r.statements.size() == 1);
    CHECK(r.statements[0].leading == "N^3/(3*sqrt(S))");
    CHECK(r.statements[0].rho == "sqrt(S)/2");
    CHECK(r.statements[0].x0 == "3*S");
    CHECK(r.statements[0].tiles.size() == 3);
    CHECK(r.cases.empty());
    CHECK(r.has_sdg);
    CHECK(r.leading == "N^3/(3*sqrt(S))");
    CHECK(r.rho == r.statements[0].rho);
}

TEST_CASE("multi-statement report fuses via the array graph") {
    Report r = report_of("2mm.soap");
    REQUIRE(r.statements.size() == 2);
    CHECK(r.leading == "4*N^3/sqrt(S)");
    CHECK(r.sdg_bound == r.full_bound);
    CHECK_FALSE(r.fusion.empty());
}

TEST_CASE("stride regimes surface as cases") {
    Report r = report_of("conv.soap");
    REQUIRE(r.statements.size() == 1);
    REQUIRE(r.cases.size() == 1);
    CHECK(r.statements[0].rho == "sqrt(S)/2");
    CHECK_FALSE(r.statements[0].case_condition.empty());
    CHECK(r.cases[0].rho == "S/2");
    CHECK_FALSE(r.cases[0].case_condition.empty());
}

TEST_CASE("disabling the fused bound falls back to the statement sum") {
    AnalyzeOptions opts;
    opts.with_sdg = false;
    Report r = report_of("2mm.soap", opts);
    CHECK_FALSE(r.has_sdg);
    CHECK(r.sdg_bound.empty());
    CHECK(r.leading == "4*N^3/sqrt(S)");
}

TEST_CASE("growth assumptions reach the leading-term comparison") {
    AnalyzeOptions opts;
    opts.assumptions = {"T < N"};
    Report r = report_of("jacobi1d.soap", opts);
    CHECK(r.leading == "2*N*T/S");
}

TEST_CASE("json rendering round-trips") {
    for (const char* k : {"cholesky.soap", "2mm.soap", "conv.soap", "gemver.soap"}) {
        CAPTURE(k);
        Report r = report_of(k);
        Report back = parse_report(render_json(r));
        CHECK(back == r);
    }
}

TEST_CASE("identical input gives byte-identical json") {
    std::string a = render_json(report_of("3mm.soap"));
    std::string b = render_json(report_of("3mm.soap"));
    CHECK(a == b);
}

TEST_CASE("text and json renderings agree on the symbolic content") {
    Report r = report_of("gemm.soap");
    std::string text = render_text(r);
    for (const std::string& needle :
         {r.leading, r.full_bound, r.rho, r.x0, r.statements[0].leading}) {
        CAPTURE(needle);
        CHECK(text.find(needle) != std::string::npos);
    }
    for (const auto& [var, e] : r.tiles)
        CHECK(text.find(var + "=" + e) != std::string::npos);
}
