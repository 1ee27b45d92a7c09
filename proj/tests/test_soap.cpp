#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <set>

#include "soap/soap_normalize.hpp"

using namespace soap;

namespace {

Program parse(const char* src) { return parse_program(src); }

const char* kLu = R"(params: N
for k in range(0, N):
    for i in range(k + 1, N):
        for j in range(k + 1, N):
            A[i, j] = A[i, j] - A[i, k] * A[k, j]
)";

/// Enumerate all iteration points of st for concrete parameter values.
std::vector<std::map<std::string, std::int64_t>> enumerate_domain(
    const Statement& st, const std::map<std::string, double>& params) {
    std::vector<std::map<std::string, std::int64_t>> out;
    std::map<std::string, double> env(params);
    std::function<void(size_t, std::map<std::string, std::int64_t>&)> rec =
        [&](size_t depth, std::map<std::string, std::int64_t>& point) {
            if (depth == st.loops.size()) {
                out.push_back(point);
                return;
            }
            const auto& l = st.loops[depth];
            auto lo = (std::int64_t)std::llround(l.lower.evaluate(env));
            auto hi = (std::int64_t)std::llround(l.upper.evaluate(env));
            for (std::int64_t v = lo; v < hi; ++v) {
                env[l.var] = (double)v;
                point[l.var] = v;
                rec(depth + 1, point);
            }
            point.erase(l.var);
            env.erase(l.var);
        };
    std::map<std::string, std::int64_t> point;
    rec(0, point);
    return out;
}

std::vector<std::int64_t> eval_idx(const std::vector<IndexExpr>& idx,
                                   const std::map<std::string, std::int64_t>& point,
                                   const std::map<std::string, double>& params) {
    std::map<std::string, double> env(params);
    for (const auto& [v, x] : point) env[v] = (double)x;
    std::vector<std::int64_t> out;
    for (const auto& ix : idx) {
        double val = ix.constant.evaluate(env);
        for (const auto& [v, c] : ix.coeffs) val += c.evaluate(env) * env.at(v);
        out.push_back((std::int64_t)std::llround(val));
    }
    return out;
}

} // namespace

TEST_CASE("lu splits into three disjoint virtual arrays") {
    Program p = parse(kLu);
    auto cases = normalize_statement(p.statements[0]);
    REQUIRE(cases.size() == 1);
    const SoapStatement& s = cases[0];
    std::set<std::string> arrays;
    for (const auto& info : s.accesses) arrays.insert(info.array);
    CHECK(arrays == std::set<std::string>{"A_1", "A_2", "A_3"});
    CHECK(s.witnesses.size() == 3);
    // the updated component gains a version dimension on k
    REQUIRE(s.version_dims.size() == 1);
    CHECK(s.version_dims[0].first == "A_1");
    CHECK(s.version_dims[0].second == "k");
    CHECK(s.st.output.array == "A_1");
    REQUIRE(s.st.output.idx.size() == 3);
    CHECK(s.st.output.idx[2].constant == SymExpr(Rational(1)));
    for (const auto& info : s.accesses)
        CHECK(info.status == AccessInfo::Status::Conforming);
}

TEST_CASE("diagonal overlap cannot be proven disjoint") {
    const char* src = R"(params: N
for i in range(0, N):
    for j in range(0, N):
        C[i, j] = f(A[i, j], A[j, i])
)";
    Program p = parse(src);
    try {
        normalize_statement(p.statements[0]);
        FAIL("expected CannotProveDisjoint");
    } catch (const SoapError& e) {
        CHECK(e.kind == SoapError::Kind::CannotProveDisjoint);
    }
}

TEST_CASE("parity split is proven set-disjoint") {
    // even/odd components also differ in which variable indexes dimension 2,
    // so the group is a genuine split candidate
    const char* src = R"(params: N
for i in range(0, N):
    for j in range(0, N):
        C[i, j] = f(A[2 * i, i], A[2 * i + 1, j])
)";
    Program p = parse(src);
    auto cases = normalize_statement(p.statements[0]);
    REQUIRE(cases.size() == 1);
    REQUIRE(cases[0].witnesses.size() == 1);
    CHECK(cases[0].witnesses[0].set_disjoint);

    // concrete check: the two accessed element sets never intersect
    std::map<std::string, double> params{{"N", 6}};
    auto pts = enumerate_domain(p.statements[0], params);
    std::set<std::vector<std::int64_t>> sa, sb;
    for (const auto& pt : pts) {
        sa.insert(eval_idx(p.statements[0].inputs[0].idx, pt, params));
        sb.insert(eval_idx(p.statements[0].inputs[1].idx, pt, params));
    }
    for (const auto& v : sa) CHECK(sb.count(v) == 0);
}

TEST_CASE("offset accesses within one array stay a simple overlap") {
    const char* src = R"(params: N
for i in range(0, N):
    C[i] = f(A[2 * i], A[2 * i + 1])
)";
    Program p = parse(src);
    auto infos = extract_accesses(p.statements[0]);
    REQUIRE(infos.size() == 2);
    CHECK(infos[0].status == AccessInfo::Status::Conforming);
    CHECK(infos[0].offset_sets[0] == std::set<std::int64_t>{1});
}

TEST_CASE("lu witnesses hold on concrete small domains") {
    Program p = parse(kLu);
    const Statement& st = p.statements[0];
    std::vector<DisjointnessWitness> ws;
    auto infos = extract_accesses(st);
    REQUIRE(infos[0].status == AccessInfo::Status::VariableMismatch);
    auto comps = split_disjoint(st, infos[0], ws);
    CHECK(comps.size() == 3);
    std::map<std::string, double> params{{"N", 6}};
    auto pts = enumerate_domain(st, params);
    std::vector<std::vector<IndexExpr>> idxs;
    for (const auto& c : comps) idxs.push_back(c.base);
    // the strictly lower and strictly upper triangle components are fully
    // set-disjoint; the updated block overlaps them across iterations, so its
    // witnesses are pointwise
    std::map<std::pair<size_t, size_t>, bool> expected{
        {{0, 1}, false}, {{0, 2}, false}, {{1, 2}, true}};
    size_t wi = 0;
    for (size_t a = 0; a < idxs.size(); ++a)
        for (size_t b = a + 1; b < idxs.size(); ++b, ++wi) {
            REQUIRE(wi < ws.size());
            CHECK(ws[wi].set_disjoint == expected[{a, b}]);
            if (ws[wi].set_disjoint) {
                std::set<std::vector<std::int64_t>> sa, sb;
                for (const auto& pt : pts) {
                    sa.insert(eval_idx(idxs[a], pt, params));
                    sb.insert(eval_idx(idxs[b], pt, params));
                }
                for (const auto& v : sa) CHECK(sb.count(v) == 0);
            } else {
                for (const auto& pt : pts)
                    CHECK(eval_idx(idxs[a], pt, params) !=
                          eval_idx(idxs[b], pt, params));
            }
        }
}

TEST_CASE("matrix product output gains a version dimension") {
    const char* src = R"(params: N
for i in range(0, N):
    for j in range(0, N):
        for k in range(0, N):
            C[i, j] += A[i, k] * B[k, j]
)";
    Program p = parse(src);
    auto cases = normalize_statement(p.statements[0]);
    REQUIRE(cases.size() == 1);
    const SoapStatement& s = cases[0];
    REQUIRE(s.version_dims.size() == 1);
    CHECK(s.version_dims[0] == std::pair<std::string, std::string>{"C", "k"});
    for (const auto& info : s.accesses)
        if (info.array == "C") {
            CHECK(info.includes_output);
            REQUIRE(info.offset_sets.size() == 3);
            CHECK(info.offset_sets[0].empty());
            CHECK(info.offset_sets[1].empty());
            CHECK(info.offset_sets[2] == std::set<std::int64_t>{1});
        }
}

TEST_CASE("update with every loop variable in the access has no free variable") {
    const char* src = R"(params: N
for i in range(0, N):
    for j in range(0, N):
        A[i, j] += f(B[i, j])
)";
    Program p = parse(src);
    try {
        normalize_statement(p.statements[0]);
        FAIL("expected NoFreeVariable");
    } catch (const SoapError& e) {
        CHECK(e.kind == SoapError::Kind::NoFreeVariable);
    }
}

TEST_CASE("version dimension preserves compute-vertex count") {
    const char* src = R"(params: N
for i in range(0, N):
    for j in range(0, N):
        acc[i] += f(B[i, j])
)";
    Program p = parse(src);
    auto cases = normalize_statement(p.statements[0]);
    const Statement& st = cases[0].st;
    std::map<std::string, double> params{{"N", 5}};
    auto pts = enumerate_domain(st, params);
    // one output element-version per iteration point, all distinct
    std::set<std::vector<std::int64_t>> versions;
    for (const auto& pt : pts) versions.insert(eval_idx(st.output.idx, pt, params));
    CHECK(versions.size() == pts.size());
}

TEST_CASE("strided access projects into two stride regimes") {
    const char* src = R"(params: N, K, sw
for w in range(0, N):
    for r in range(0, K):
        Out[w] += f(Image[sw * w + r], Filter[r])
)";
    Program p = parse(src);
    auto cases = normalize_statement(p.statements[0]);
    REQUIRE(cases.size() == 2);
    CHECK(cases[0].case_info.regime == CaseInfo::Regime::Injective);
    CHECK(cases[0].case_info.condition == "sw >= |D^r|");
    CHECK(cases[1].case_info.regime == CaseInfo::Regime::Overlap);
    CHECK(cases[1].case_info.condition == "sw == 1");
    for (const auto& s : cases)
        for (const auto& info : s.accesses)
            CHECK(info.status == AccessInfo::Status::Conforming);
    // injective: Image spans both variables; overlap: only the inner one
    auto dims_of = [](const SoapStatement& s, const std::string& arr) {
        for (const auto& info : s.accesses)
            if (info.array == arr) return info.base.size();
        return (size_t)0;
    };
    CHECK(dims_of(cases[0], "Image") == 2);
    CHECK(dims_of(cases[1], "Image") == 1);
    CHECK(cases[1].accesses[1].base[0].coeffs.count("r") == 1);
}

TEST_CASE("image extent bracket holds for any stride") {
    // |g[H]| between max and product of the contributing ranges
    for (std::int64_t stride = 1; stride <= 6; ++stride) {
        std::int64_t dw = 4, dr = 3;
        std::set<std::int64_t> image;
        for (std::int64_t w = 0; w < dw; ++w)
            for (std::int64_t r = 0; r < dr; ++r) image.insert(stride * w + r);
        CHECK((std::int64_t)image.size() >= std::max(dw, dr));
        CHECK((std::int64_t)image.size() <= dw * dr);
        if (stride >= dr) CHECK((std::int64_t)image.size() == dw * dr);
    }
}

TEST_CASE("degenerate mixed dimension with a fixed variable") {
    std::int64_t di = 4;
    std::set<std::int64_t> image;
    for (std::int64_t i = 0; i < di; ++i) image.insert(i + 0);
    CHECK(image.size() == 4);
}
