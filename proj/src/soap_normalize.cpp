#include "soap/soap_normalize.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace soap {

namespace {

/// Affine form sum(coeffs[v] * v) + k over iteration variables and parameters.
struct Aff {
    std::map<std::string, Rational> coeffs;
    Rational k;

    bool constant() const { return coeffs.empty(); }
};

std::optional<Aff> affine_of(const SymExpr& e) {
    Aff out;
    for (const auto& m : e.terms()) {
        std::string var;
        for (const auto& [s, p] : m.powers) {
            if (is_prime_symbol(s)) return std::nullopt;
            if (!var.empty() || p != Rational(1)) return std::nullopt;
            var = s;
        }
        if (var.empty())
            out.k += m.coeff;
        else
            out.coeffs[var] += m.coeff;
    }
    for (auto it = out.coeffs.begin(); it != out.coeffs.end();)
        it = it->second.is_zero() ? out.coeffs.erase(it) : std::next(it);
    return out;
}

Aff rename_vars(Aff a, const std::set<std::string>& vars, const std::string& suffix) {
    Aff out;
    out.k = a.k;
    for (auto& [s, c] : a.coeffs)
        out.coeffs[vars.count(s) ? s + suffix : s] = c;
    return out;
}

Aff sub(const Aff& a, const Aff& b) {
    Aff out = a;
    out.k -= b.k;
    for (const auto& [s, c] : b.coeffs) {
        out.coeffs[s] -= c;
        if (out.coeffs[s].is_zero()) out.coeffs.erase(s);
    }
    return out;
}

Aff scale(const Aff& a, const Rational& f) {
    Aff out;
    out.k = a.k * f;
    for (const auto& [s, c] : a.coeffs) out.coeffs[s] = c * f;
    return out;
}

Aff add(const Aff& a, const Aff& b) { return sub(a, scale(b, Rational(-1))); }

std::string aff_str(const Aff& a) {
    std::string out;
    for (const auto& [s, c] : a.coeffs)
        out += (out.empty() ? "" : " + ") + c.str() + "*" + s;
    if (!a.k.is_zero() || out.empty())
        out += (out.empty() ? "" : " + ") + a.k.str();
    return out;
}

std::int64_t igcd(std::int64_t a, std::int64_t b) {
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b) { std::int64_t t = a % b; a = b; b = t; }
    return a;
}

/// No integer point satisfies the equality: gcd of the scaled variable
/// coefficients does not divide the constant.
bool gcd_refutes(const Aff& eq) {
    std::int64_t L = 1;
    for (const auto& [s, c] : eq.coeffs) L = L / igcd(L, c.den()) * c.den();
    L = L / igcd(L, eq.k.den()) * eq.k.den();
    std::int64_t g = 0;
    for (const auto& [s, c] : eq.coeffs) g = igcd(g, c.num() * (L / c.den()));
    std::int64_t k = eq.k.num() * (L / eq.k.den());
    if (g == 0) return k != 0;
    return k % g != 0;
}

std::string aff_key(const Aff& a) {
    std::string out = a.k.str();
    for (const auto& [s, c] : a.coeffs) out += "|" + s + ":" + c.str();
    return out;
}

/// Fourier-Motzkin refutation of {ineqs >= 0, eqs == 0} over the rationals,
/// with a divisibility pre-check on equalities. Returns true only when the
/// system is certainly infeasible (sound one-sided answer).
bool prove_infeasible(const std::vector<Aff>& eqs, std::vector<Aff> cons,
                      std::string* why) {
    for (const auto& eq : eqs) {
        if (gcd_refutes(eq)) {
            if (why) *why = "no integer solution of " + aff_str(eq) + " = 0";
            return true;
        }
        cons.push_back(eq);
        cons.push_back(scale(eq, Rational(-1)));
    }
    const size_t cap = 4000;
    for (;;) {
        std::set<std::string> vars;
        for (const auto& c : cons) {
            if (c.constant() && c.k.is_negative()) {
                if (why) *why = "inequalities are contradictory";
                return true;
            }
            for (const auto& [s, f] : c.coeffs) vars.insert(s);
        }
        if (vars.empty()) return false;
        // eliminate the variable with the fewest pairings
        std::string best;
        size_t best_cost = SIZE_MAX;
        for (const auto& v : vars) {
            size_t lo = 0, hi = 0;
            for (const auto& c : cons) {
                auto it = c.coeffs.find(v);
                if (it == c.coeffs.end()) continue;
                (it->second.is_negative() ? hi : lo)++;
            }
            if (lo * hi < best_cost) { best_cost = lo * hi; best = v; }
        }
        std::vector<Aff> lower, upper, rest;
        for (auto& c : cons) {
            auto it = c.coeffs.find(best);
            if (it == c.coeffs.end())
                rest.push_back(std::move(c));
            else if (it->second.is_negative())
                upper.push_back(std::move(c));
            else
                lower.push_back(std::move(c));
        }
        std::set<std::string> seen;
        std::vector<Aff> next;
        for (auto& c : rest) {
            if (seen.insert(aff_key(c)).second) next.push_back(std::move(c));
        }
        for (const auto& lo : lower)
            for (const auto& up : upper) {
                Aff combo = add(scale(lo, -up.coeffs.at(best)),
                                scale(up, lo.coeffs.at(best)));
                combo.coeffs.erase(best);
                if (seen.insert(aff_key(combo)).second)
                    next.push_back(std::move(combo));
                if (next.size() > cap) return false;  // give up, not proven
            }
        cons = std::move(next);
    }
}

std::vector<Aff> domain_constraints(const Statement& st,
                                    const std::set<std::string>& vars,
                                    const std::string& suffix) {
    std::vector<Aff> out;
    for (const auto& loop : st.loops) {
        auto lo = affine_of(loop.lower), hi = affine_of(loop.upper);
        if (!lo || !hi) continue;  // non-affine bounds carry no usable facts
        Aff v;
        v.coeffs[loop.var] = Rational(1);
        Aff a = sub(rename_vars(v, vars, suffix), rename_vars(*lo, vars, suffix));
        Aff b = sub(rename_vars(*hi, vars, suffix), rename_vars(v, vars, suffix));
        b.k -= Rational(1);
        out.push_back(a);
        out.push_back(b);
    }
    return out;
}

void add_param_positivity(std::vector<Aff>& cons, const std::set<std::string>& vars) {
    std::set<std::string> params;
    for (const auto& c : cons)
        for (const auto& [s, f] : c.coeffs)
            if (!vars.count(s) && s.find('\'') == std::string::npos)
                params.insert(s);
    for (const auto& p : params) {
        Aff a;
        a.coeffs[p] = Rational(1);
        a.k = Rational(-1);
        cons.push_back(a);
    }
}

std::string idx_vector_str(const std::vector<IndexExpr>& idx) {
    std::string out = "[";
    for (size_t i = 0; i < idx.size(); ++i) out += (i ? ", " : "") + idx[i].str();
    return out + "]";
}

/// Equality system "component a at iteration 1 == component b at iteration 2";
/// with identical suffixes this is the shared-iteration-point system.
std::optional<std::vector<Aff>> equality_system(const std::vector<IndexExpr>& a,
                                                const std::vector<IndexExpr>& b,
                                                const std::set<std::string>& vars,
                                                const std::string& sa,
                                                const std::string& sb) {
    if (a.size() != b.size()) return std::nullopt;
    std::vector<Aff> eqs;
    for (size_t d = 0; d < a.size(); ++d) {
        auto build = [&](const IndexExpr& ix,
                         const std::string& suffix) -> std::optional<Aff> {
            auto c = affine_of(ix.constant);
            if (!c) return std::nullopt;
            Aff out = rename_vars(*c, vars, suffix);
            for (const auto& [v, coeff] : ix.coeffs) {
                auto r = coeff.as_rational();
                if (!r) return std::nullopt;  // symbolic stride, not handled
                out.coeffs[vars.count(v) ? v + suffix : v] += *r;
            }
            return out;
        };
        auto ea = build(a[d], sa), eb = build(b[d], sb);
        if (!ea || !eb) return std::nullopt;
        eqs.push_back(sub(*ea, *eb));
    }
    return eqs;
}

} // namespace

std::vector<AccessInfo> split_disjoint(const Statement& st, const AccessInfo& info,
                                       std::vector<DisjointnessWitness>& witnesses) {
    std::set<std::string> vars;
    for (const auto& l : st.loops) vars.insert(l.var);

    // components: distinct access functions within the group
    std::vector<std::vector<IndexExpr>> comps;
    std::vector<bool> comp_has_output;
    size_t n = info.accesses.size();
    for (size_t k = 0; k < n; ++k) {
        const auto& idx = info.accesses[k].idx;
        bool is_output = info.includes_output && k + 1 == n;
        auto it = std::find(comps.begin(), comps.end(), idx);
        if (it == comps.end()) {
            comps.push_back(idx);
            comp_has_output.push_back(is_output);
        } else if (is_output) {
            comp_has_output[it - comps.begin()] = true;
        }
    }

    for (size_t a = 0; a < comps.size(); ++a)
        for (size_t b = a + 1; b < comps.size(); ++b) {
            DisjointnessWitness w;
            w.array = info.array;
            w.component_a = idx_vector_str(comps[a]);
            w.component_b = idx_vector_str(comps[b]);
            std::string why;
            // strong form: the accessed element sets never intersect
            auto eqs2 = equality_system(comps[a], comps[b], vars, "'", "''");
            bool proved = false;
            if (eqs2) {
                std::vector<Aff> cons = domain_constraints(st, vars, "'");
                auto more = domain_constraints(st, vars, "''");
                cons.insert(cons.end(), more.begin(), more.end());
                add_param_positivity(cons, vars);
                for (const auto& c : cons) w.certificate.push_back(aff_str(c) + " >= 0");
                if (prove_infeasible(*eqs2, cons, &why)) {
                    w.set_disjoint = true;
                    proved = true;
                }
            }
            if (!proved) {
                // weak form: distinct elements at every shared iteration point
                auto eqs1 = equality_system(comps[a], comps[b], vars, "", "");
                w.certificate.clear();
                if (eqs1) {
                    std::vector<Aff> cons = domain_constraints(st, vars, "");
                    add_param_positivity(cons, vars);
                    for (const auto& c : cons)
                        w.certificate.push_back(aff_str(c) + " >= 0");
                    if (prove_infeasible(*eqs1, cons, &why)) {
                        w.set_disjoint = false;
                        proved = true;
                    }
                }
            }
            if (!proved)
                throw SoapError(SoapError::Kind::CannotProveDisjoint,
                                "cannot prove accesses " + w.component_a + " and " +
                                    w.component_b + " of array " + info.array +
                                    " disjoint");
            w.certificate.push_back(why);
            witnesses.push_back(std::move(w));
        }

    std::vector<AccessInfo> out;
    for (size_t ci = 0; ci < comps.size(); ++ci) {
        AccessInfo comp;
        comp.array = info.array + "_" + std::to_string(ci + 1);
        for (size_t k = 0; k < n; ++k)
            if (info.accesses[k].idx == comps[ci]) {
                ArrayAccess acc = info.accesses[k];
                acc.array = comp.array;
                comp.accesses.push_back(std::move(acc));
                comp.translations.push_back(
                    std::vector<std::int64_t>(comps[ci].size(), 0));
            }
        comp.base = comps[ci];
        comp.offset_sets.assign(comps[ci].size(), {});
        comp.includes_output = comp_has_output[ci];
        out.push_back(std::move(comp));
    }
    return out;
}

Statement add_version_dimension(const Statement& st, const std::string& array,
                                std::string& version_var) {
    std::set<std::string> used;
    auto collect = [&](const ArrayAccess& a) {
        if (a.array != array) return;
        for (const auto& ix : a.idx)
            for (const auto& [v, c] : ix.coeffs) used.insert(v);
    };
    collect(st.output);
    for (const auto& a : st.inputs) collect(a);

    version_var.clear();
    for (const auto& l : st.loops)
        if (!used.count(l.var)) version_var = l.var;  // keep innermost
    if (version_var.empty())
        throw SoapError(SoapError::Kind::NoFreeVariable,
                        "array " + array +
                            " is updated but every loop variable appears in its "
                            "access function");

    Statement out = st;
    auto rewrite = [&](ArrayAccess& a, bool is_output) {
        if (a.array != array) return;
        IndexExpr v;
        v.coeffs[version_var] = SymExpr(Rational(1));
        if (is_output) v.constant = SymExpr(Rational(1));
        a.idx.push_back(std::move(v));
    };
    rewrite(out.output, true);
    for (auto& a : out.inputs) rewrite(a, false);
    return out;
}

namespace {

struct NoninjDim {
    std::string array;
    size_t dim;
    std::vector<std::string> contributors;  // outer to inner loop order
    std::vector<SymExpr> coeffs;
};

std::vector<NoninjDim> find_noninjective(const Statement& st,
                                         const std::vector<AccessInfo>& infos) {
    std::vector<NoninjDim> out;
    for (const auto& info : infos)
        for (int d : info.noninjective_dims) {
            NoninjDim nd;
            nd.array = info.array;
            nd.dim = (size_t)d;
            for (const auto& l : st.loops) {
                auto it = info.base[d].coeffs.find(l.var);
                if (it == info.base[d].coeffs.end()) continue;
                bool single_symbol = it->second.terms().size() == 1 &&
                                     it->second.terms()[0].powers.size() <= 1 &&
                                     it->second.terms()[0].coeff == Rational(1);
                if (!it->second.as_rational() && !single_symbol)
                    throw SoapError(SoapError::Kind::UnsupportedAccess,
                                    "stride on " + l.var + " in array " + nd.array +
                                        " is neither an integer nor a parameter");
                nd.contributors.push_back(l.var);
                nd.coeffs.push_back(it->second);
            }
            out.push_back(std::move(nd));
        }
    return out;
}

Statement apply_projection(const Statement& st, const std::vector<NoninjDim>& dims,
                           bool injective) {
    Statement out = st;
    // descending dimension order keeps indices valid while arity changes
    std::vector<NoninjDim> ordered = dims;
    std::sort(ordered.begin(), ordered.end(),
              [](const NoninjDim& a, const NoninjDim& b) {
                  return a.array != b.array ? a.array < b.array : a.dim > b.dim;
              });
    auto rewrite = [&](ArrayAccess& a) {
        for (const auto& nd : ordered) {
            if (a.array != nd.array) continue;
            IndexExpr orig = a.idx[nd.dim];
            std::vector<IndexExpr> repl;
            if (injective) {
                // one injective dimension per contributing variable; the
                // constant offset stays with the innermost one
                for (size_t i = 0; i < nd.contributors.size(); ++i) {
                    IndexExpr ix;
                    ix.coeffs[nd.contributors[i]] = SymExpr(Rational(1));
                    if (i + 1 == nd.contributors.size()) ix.constant = orig.constant;
                    repl.push_back(std::move(ix));
                }
            } else {
                // unit strides: the image extent is at least the range of any
                // single contributor; keep the innermost (a sound lower bound
                // on max over contributors)
                IndexExpr ix;
                ix.coeffs[nd.contributors.back()] = SymExpr(Rational(1));
                ix.constant = orig.constant;
                repl.push_back(std::move(ix));
            }
            a.idx.erase(a.idx.begin() + nd.dim);
            a.idx.insert(a.idx.begin() + nd.dim, repl.begin(), repl.end());
        }
    };
    rewrite(out.output);
    for (auto& a : out.inputs) rewrite(a);
    return out;
}

std::string regime_condition(const std::vector<NoninjDim>& dims, bool injective) {
    std::string out;
    for (const auto& nd : dims)
        for (size_t i = 0; i + 1 < nd.contributors.size(); ++i) {
            std::string c = nd.coeffs[i].str();
            std::string piece = injective
                                    ? c + " >= |D^" + nd.contributors.back() + "|"
                                    : c + " == 1";
            if (!out.empty()) out += " and ";
            out += piece;
        }
    return out;
}

SoapStatement finish_case(Statement st, CaseInfo ci,
                          std::vector<DisjointnessWitness> witnesses) {
    SoapStatement out;
    out.case_info = std::move(ci);
    out.witnesses = std::move(witnesses);
    for (;;) {
        auto infos = extract_accesses(st);
        std::string versioned;
        for (const auto& info : infos) {
            if (info.status != AccessInfo::Status::Conforming)
                throw SoapError(SoapError::Kind::CannotProveDisjoint,
                                "array " + info.array +
                                    " remains non-conforming after splitting");
            if (!info.includes_output) continue;
            // output access equal to an input access triggers versioning
            const auto& out_idx = info.accesses.back().idx;
            for (size_t k = 0; k + 1 < info.accesses.size(); ++k)
                if (info.accesses[k].idx == out_idx) { versioned = info.array; break; }
        }
        if (versioned.empty()) {
            out.st = std::move(st);
            out.accesses = std::move(infos);
            return out;
        }
        std::string vvar;
        st = add_version_dimension(st, versioned, vvar);
        out.version_dims.push_back({versioned, vvar});
    }
}

} // namespace

std::vector<SoapStatement> normalize_statement(const Statement& st) {
    std::vector<DisjointnessWitness> witnesses;
    Statement cur = st;
    for (;;) {
        auto infos = extract_accesses(cur);
        const AccessInfo* bad = nullptr;
        for (const auto& info : infos)
            if (info.status == AccessInfo::Status::VariableMismatch) { bad = &info; break; }
        if (!bad) break;
        auto comps = split_disjoint(cur, *bad, witnesses);
        // rename each access of the split array to its component's array
        auto rename = [&](ArrayAccess& a) {
            if (a.array != bad->array) return;
            for (const auto& comp : comps)
                if (a.idx == comp.base) { a.array = comp.array; return; }
        };
        rename(cur.output);
        for (auto& a : cur.inputs) rename(a);
    }

    auto infos = extract_accesses(cur);
    auto noninj = find_noninjective(cur, infos);
    std::vector<SoapStatement> out;
    if (noninj.empty()) {
        out.push_back(finish_case(cur, CaseInfo{}, witnesses));
    } else {
        out.push_back(finish_case(
            apply_projection(cur, noninj, true),
            CaseInfo{CaseInfo::Regime::Injective, regime_condition(noninj, true)},
            witnesses));
        out.push_back(finish_case(
            apply_projection(cur, noninj, false),
            CaseInfo{CaseInfo::Regime::Overlap, regime_condition(noninj, false)},
            witnesses));
    }
    return out;
}

NormalizedProgram normalize_program(const Program& p) {
    NormalizedProgram out;
    out.source = p;
    for (const auto& st : p.statements)
        out.statements.push_back(normalize_statement(st));
    return out;
}

} // namespace soap
