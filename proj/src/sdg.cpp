#include "soap/sdg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace soap {

namespace {

struct UnionFind {
    std::vector<int> parent;
    int make() {
        parent.push_back((int)parent.size());
        return parent.back();
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::vector<std::string> dim_vars(const std::set<std::string>& loop_vars,
                                  const IndexExpr& ix) {
    std::vector<std::string> out;
    for (const auto& [v, c] : ix.coeffs)
        if (loop_vars.count(v)) out.push_back(v);
    return out;
}

struct Merge {
    std::vector<int> stmts;                            // producer statement ids
    std::map<std::pair<int, std::string>, std::string> cls;  // slot -> class
    std::vector<std::string> classes;
};

/// Unifies the iteration spaces of the producer statements of the member
/// arrays by matching dimensions of shared-array accesses.
Merge unify(const Sdg& g, const std::vector<int>& members) {
    Merge out;
    std::set<int> prod;
    for (int m : members) prod.insert(g.nodes[m].producer);
    out.stmts.assign(prod.begin(), prod.end());

    UnionFind uf;
    std::map<std::pair<int, std::string>, int> slot;
    std::map<int, std::set<std::string>> lvars;
    for (int si : out.stmts)
        for (const auto& l : g.stmts[si].st.loops) {
            slot[{si, l.var}] = uf.make();
            lvars[si].insert(l.var);
        }
    auto version_count = [&](int si, const AccessInfo& info) {
        if (!info.includes_output) return (size_t)0;
        for (const auto& vd : g.stmts[si].version_dims)
            if (vd.first == info.array) return (size_t)1;
        return (size_t)0;
    };

    // reference access per array; version dimensions never participate
    std::map<std::string, std::pair<int, const AccessInfo*>> ref;
    for (int si : out.stmts) {
        for (const auto& info : g.stmts[si].accesses) {
            size_t nd = info.base.size() - version_count(si, info);
            auto it = ref.find(info.array);
            if (it == ref.end()) {
                ref[info.array] = {si, &info};
                continue;
            }
            const auto& [rsi, rinfo] = it->second;
            size_t rnd = rinfo->base.size() - version_count(rsi, *rinfo);
            size_t n = std::min(nd, rnd);
            for (size_t d = 0; d < n; ++d) {
                auto va = dim_vars(lvars.at(si), info.base[d]);
                auto vb = dim_vars(lvars.at(rsi), rinfo->base[d]);
                if (va.size() != vb.size())
                    throw SdgError(SdgError::Kind::IncompatibleIterationSpaces,
                                   "dimension " + std::to_string(d) + " of " +
                                       info.array +
                                       " spans different variable counts");
                for (size_t q = 0; q < va.size(); ++q)
                    uf.unite(slot.at({si, va[q]}), slot.at({rsi, vb[q]}));
            }
        }
    }
    // a class may not contain two loops of the same statement
    std::map<int, std::string> name;
    for (int si : out.stmts) {
        std::set<int> seen;
        for (const auto& l : g.stmts[si].st.loops) {
            int root = uf.find(slot.at({si, l.var}));
            if (!seen.insert(root).second)
                throw SdgError(SdgError::Kind::IncompatibleIterationSpaces,
                               "two loops of one statement fall into one class");
            if (!name.count(root)) {
                name[root] = "u" + std::to_string(name.size());
                out.classes.push_back(name[root]);
            }
            out.cls[{si, l.var}] = name[root];
        }
    }
    return out;
}

/// Numeric maximum of sum_g k_g * prod b^expo_g under the posynomial
/// constraint, by projected ascent in log space.
double numeric_sum_max(const std::vector<std::string>& vars,
                       const std::vector<std::pair<Rational, std::map<std::string, Rational>>>& terms,
                       const std::vector<std::pair<Rational, std::map<std::string, Rational>>>& groups,
                       double X) {
    size_t n = vars.size(), K = terms.size(), G = groups.size();
    double logX = std::log(X);
    auto dense = [&](const std::map<std::string, Rational>& m) {
        std::vector<double> r(n, 0);
        for (size_t v = 0; v < n; ++v) {
            auto it = m.find(vars[v]);
            if (it != m.end()) r[v] = it->second.to_double();
        }
        return r;
    };
    std::vector<std::vector<double>> A, Gm;
    std::vector<double> logc, logk;
    for (const auto& [c, a] : terms) {
        A.push_back(dense(a));
        logc.push_back(std::log(c.to_double()));
    }
    for (const auto& [k, m] : groups) {
        Gm.push_back(dense(m));
        logk.push_back(std::log(k.to_double()));
    }
    auto lse = [](const std::vector<double>& e) {
        double mx = *std::max_element(e.begin(), e.end());
        double s = 0;
        for (double v : e) s += std::exp(v - mx);
        return mx + std::log(s);
    };
    auto constraint = [&](const std::vector<double>& y) {
        std::vector<double> e(K);
        for (size_t k = 0; k < K; ++k) {
            e[k] = logc[k];
            for (size_t v = 0; v < n; ++v) e[k] += A[k][v] * y[v];
        }
        return lse(e);
    };
    auto objective = [&](const std::vector<double>& y) {
        std::vector<double> e(G);
        for (size_t g = 0; g < G; ++g) {
            e[g] = logk[g];
            for (size_t v = 0; v < n; ++v) e[g] += Gm[g][v] * y[v];
        }
        return lse(e);
    };
    auto to_boundary = [&](std::vector<double> y) {
        double lo = 0, hi = 1;
        auto at = [&](double t) {
            std::vector<double> z(n);
            for (size_t v = 0; v < n; ++v) z[v] = t * y[v];
            return constraint(z);
        };
        while (at(hi) < logX && hi < 1e6) hi *= 2;
        for (int it = 0; it < 80; ++it) {
            double mid = (lo + hi) / 2;
            (at(mid) < logX ? lo : hi) = mid;
        }
        for (size_t v = 0; v < n; ++v) y[v] *= lo;
        return y;
    };
    std::mt19937_64 rng(17);
    auto uni = [&] { return (double)(rng() >> 11) / (double)(1ull << 53); };
    double best = -1e300;
    for (int s0 = 0; s0 < 32; ++s0) {
        std::vector<double> y(n);
        for (size_t v = 0; v < n; ++v) y[v] = uni() * logX;
        y = to_boundary(y);
        double step = 0.2 * logX, val = objective(y);
        for (int it = 0; it < 1500; ++it) {
            // softmax gradients of objective and constraint
            std::vector<double> eo(G), ec(K);
            for (size_t g = 0; g < G; ++g) {
                eo[g] = logk[g];
                for (size_t v = 0; v < n; ++v) eo[g] += Gm[g][v] * y[v];
            }
            for (size_t k = 0; k < K; ++k) {
                ec[k] = logc[k];
                for (size_t v = 0; v < n; ++v) ec[k] += A[k][v] * y[v];
            }
            double mo = *std::max_element(eo.begin(), eo.end());
            double mc = *std::max_element(ec.begin(), ec.end());
            double so = 0, sc = 0;
            for (auto& v : eo) { v = std::exp(v - mo); so += v; }
            for (auto& v : ec) { v = std::exp(v - mc); sc += v; }
            std::vector<double> go(n, 0), gc(n, 0);
            for (size_t g = 0; g < G; ++g)
                for (size_t v = 0; v < n; ++v) go[v] += eo[g] / so * Gm[g][v];
            for (size_t k = 0; k < K; ++k)
                for (size_t v = 0; v < n; ++v) gc[v] += ec[k] / sc * A[k][v];
            double num = 0, den = 0;
            for (size_t v = 0; v < n; ++v) { num += go[v] * gc[v]; den += gc[v] * gc[v]; }
            std::vector<double> dir(n);
            double norm = 0;
            for (size_t v = 0; v < n; ++v) {
                dir[v] = go[v] - num / std::max(den, 1e-300) * gc[v];
                if (y[v] <= 1e-12 && dir[v] < 0) dir[v] = 0;
                norm += dir[v] * dir[v];
            }
            if (norm < 1e-24) break;
            std::vector<double> cand(n);
            for (size_t v = 0; v < n; ++v)
                cand[v] = std::max(0.0, y[v] + step * dir[v] / std::sqrt(norm));
            cand = to_boundary(cand);
            double cval = objective(cand);
            if (cval > val) {
                y = cand;
                val = cval;
                step *= 1.1;
            } else {
                step *= 0.5;
                if (step < 1e-12 * logX) break;
            }
        }
        best = std::max(best, val);
    }
    return std::exp(best);
}

Rational s_degree(const SymExpr& mono) {
    auto it = mono.terms()[0].powers.find("S");
    return it == mono.terms()[0].powers.end() ? Rational(0) : it->second;
}

double mono_coeff(const SymExpr& mono) {
    std::map<std::string, double> at;
    at["S"] = 1.0;
    return mono.evaluate(at);
}

bool mono_less(const SymExpr& a, const SymExpr& b) {
    Rational da = s_degree(a), db = s_degree(b);
    if (da != db) return da < db;
    return mono_coeff(a) < mono_coeff(b);
}

} // namespace

std::vector<int> Sdg::non_input_nodes() const {
    std::vector<int> out;
    for (size_t i = 0; i < nodes.size(); ++i)
        if (!nodes[i].is_input) out.push_back((int)i);
    return out;
}

Sdg build_sdg(const Program& p, size_t case_choice) {
    Sdg g;
    g.source = p;
    NormalizedProgram np = normalize_program(p);
    for (const auto& cases : np.statements)
        g.stmts.push_back(cases[std::min(case_choice, cases.size() - 1)]);

    auto node_of = [&](const std::string& arr) {
        auto it = g.index.find(arr);
        if (it != g.index.end()) return it->second;
        Sdg::Node n;
        n.array = arr;
        n.is_input = true;
        g.index[arr] = (int)g.nodes.size();
        g.nodes.push_back(n);
        return g.index[arr];
    };
    for (size_t si = 0; si < g.stmts.size(); ++si) {
        const SoapStatement& s = g.stmts[si];
        int out = node_of(s.st.output.array);
        g.nodes[out].is_input = false;
        g.nodes[out].producer = (int)si;
        for (const auto& vd : s.version_dims)
            if (vd.first == s.st.output.array) g.nodes[out].versioned = true;
        SymExpr sz = domain_size(s.st);
        g.nodes[out].size = g.nodes[out].size + sz;
        for (const auto& info : s.accesses) {
            int src = info.includes_output ? out : node_of(info.array);
            auto e = std::make_pair(src, out);
            if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end())
                g.edges.push_back(e);
        }
    }
    return g;
}

SubgraphIntensity subgraph_intensity(const Sdg& g, const std::vector<int>& members) {
    SubgraphIntensity out;
    out.members = members;
    try {
        Merge mg = unify(g, members);
        std::set<std::string> in_h;
        for (int m : members) in_h.insert(g.nodes[m].array);

        // constraint terms over the unified classes
        std::vector<std::pair<Rational, std::map<std::string, Rational>>> terms;
        std::set<std::string> seen_volumes;
        for (int si : mg.stmts) {
            const SoapStatement& s = g.stmts[si];
            std::set<std::string> loop_vars;
            for (const auto& l : s.st.loops) loop_vars.insert(l.var);
            for (const auto& info : s.accesses) {
                auto classes_of = [&](bool skip_dim, size_t skip) {
                    std::map<std::string, Rational> a;
                    for (size_t d = 0; d < info.base.size(); ++d) {
                        if (skip_dim && d == skip) continue;
                        for (const auto& v : dim_vars(loop_vars, info.base[d]))
                            a[mg.cls.at({si, v})] += Rational(1);
                    }
                    return a;
                };
                if (info.includes_output) {
                    for (size_t d = 0; d < info.base.size(); ++d) {
                        size_t t = info.offset_count(d);
                        if (t == 0) continue;
                        terms.emplace_back(Rational((std::int64_t)t),
                                           classes_of(true, d));
                    }
                } else if (in_h.count(info.array)) {
                    int pn = g.index.at(info.array);
                    if (g.nodes[pn].versioned)
                        // the consumer reads the final version slab
                        terms.emplace_back(Rational(1), classes_of(false, 0));
                    // unversioned members are consumed at the producing tuple
                } else {
                    auto a = classes_of(false, 0);
                    std::string key = info.array + "|";
                    for (const auto& [v, e] : a) key += v + "^" + e.str() + ",";
                    if (seen_volumes.insert(key).second)
                        terms.emplace_back(Rational(1), a);
                }
            }
        }

        // compute-count monomials, one per producer, grouped when identical
        std::vector<std::pair<Rational, std::map<std::string, Rational>>> groups;
        for (int si : mg.stmts) {
            std::map<std::string, Rational> expo;
            for (const auto& l : g.stmts[si].st.loops)
                expo[mg.cls.at({si, l.var})] += Rational(1);
            bool found = false;
            for (auto& [k, m] : groups)
                if (m == expo) { k += Rational(1); found = true; break; }
            if (!found) groups.emplace_back(Rational(1), expo);
        }

        struct Solved { Rational k; Rational alpha; double peak; SymExpr rho; };
        std::vector<Solved> solved;
        for (const auto& [k, expo] : groups) {
            GpProblem gp;
            gp.vars = mg.classes;
            gp.terms = terms;
            for (const auto& v : mg.classes) gp.objective[v] = Rational(0);
            for (const auto& [v, e] : expo) gp.objective[v] = e;
            GpSolution sol = solve_gp(gp);
            Intensity in = intensity_and_X0(sol.chi());
            Solved sv;
            sv.k = k;
            sv.alpha = in.alpha;
            sv.peak = k.to_double() * sol.coeff.evaluate({}) *
                      std::pow(1e8, in.alpha.to_double());
            sv.rho = SymExpr(k) * in.rho;
            solved.push_back(sv);
        }
        if (solved.empty())
            throw SolverError(SolverError::Kind::DegenerateProgram, "empty subgraph");
        if (solved.size() == 1) {
            out.rho = solved[0].rho;
            return out;
        }
        // cross-group combination: max rule, numerically verified against a
        // joint maximization of the summed compute count
        double peak = 0;
        for (const auto& sv : solved) peak = std::max(peak, sv.peak);
        double joint = numeric_sum_max(mg.classes, terms, groups, 1e8);
        SymExpr rho = solved[0].rho;
        if (joint <= peak * 1.005) {
            for (const auto& sv : solved)
                if (mono_less(rho, sv.rho)) rho = sv.rho;
        } else {
            // provable fallback: sum of per-group intensities, rounded up to
            // the highest S power
            out.exact = false;
            out.warnings.push_back("joint compute maximum exceeds the peak group; "
                                   "using the per-group intensity sum");
            Rational beta(0);
            double csum = 0;
            for (const auto& sv : solved) {
                beta = std::max(beta, s_degree(sv.rho));
                csum += mono_coeff(sv.rho);
            }
            // conservative rational upper rounding of the coefficient
            Rational c((std::int64_t)std::ceil(csum * 1024), 1024);
            rho = SymExpr::monomial(c, {{"S", beta}});
        }
        out.rho = rho;
        return out;
    } catch (const SdgError& e) {
        out.unbounded = true;
        out.warnings.push_back(e.what());
    } catch (const SolverError& e) {
        out.unbounded = true;
        out.warnings.push_back(e.what());
    }
    return out;
}

SdgBound sdg_bound(const Sdg& g, const GrowthOrder& order, size_t cap) {
    SdgBound out;
    auto nis = g.non_input_nodes();
    if (nis.size() > cap)
        throw SdgError(SdgError::Kind::EnumerationCapExceeded,
                       "graph has " + std::to_string(nis.size()) +
                           " computed arrays, cap is " + std::to_string(cap));
    std::map<int, SymExpr> best;
    std::set<int> poisoned;
    for (std::uint64_t mask = 1; mask < (1ull << nis.size()); ++mask) {
        std::vector<int> members;
        for (size_t i = 0; i < nis.size(); ++i)
            if (mask & (1ull << i)) members.push_back(nis[i]);
        SubgraphIntensity si = subgraph_intensity(g, members);
        for (const auto& w : si.warnings) out.warnings.push_back(w);
        if (!si.unbounded &&
            (out.best_fusion.empty() || mono_less(out.rho_best, si.rho) ||
             (!mono_less(si.rho, out.rho_best) &&
              members.size() > out.best_fusion.size()))) {
            out.rho_best = si.rho;
            out.best_fusion.clear();
            for (int m : members) out.best_fusion.push_back(g.nodes[m].array);
        }
        for (int m : members) {
            if (si.unbounded) {
                poisoned.insert(m);
                continue;
            }
            auto it = best.find(m);
            if (it == best.end() || mono_less(it->second, si.rho)) best[m] = si.rho;
        }
    }
    for (int m : nis) {
        if (poisoned.count(m)) {
            out.warnings.push_back("array " + g.nodes[m].array +
                                   " excluded: a containing subgraph has "
                                   "unbounded modeled intensity");
            continue;
        }
        out.rho_max[g.nodes[m].array] = best.at(m);
        out.Q += div(g.nodes[m].size, best.at(m));
    }
    if (!out.Q.is_zero()) out.leading = out.Q.leading_term(order);
    return out;
}

} // namespace soap
