#include "soap/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace soap {

namespace {

using Row = std::vector<Rational>;
using Mat = std::vector<Row>;

/// Solves a non-singular square system by Gaussian elimination.
std::optional<Row> solve_square(Mat m, Row b) {
    size_t n = m.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        while (piv < n && m[piv][col].is_zero()) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(m[piv], m[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = 0; r < n; ++r) {
            if (r == col || m[r][col].is_zero()) continue;
            Rational f = m[r][col] / m[col][col];
            for (size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            b[r] -= f * b[col];
        }
    }
    Row x(n);
    for (size_t i = 0; i < n; ++i) x[i] = b[i] / m[i][i];
    return x;
}

/// Minimum-norm solution of A x = b (any shape). Dependent rows are dropped
/// after an exact consistency check; returns nullopt when inconsistent.
std::optional<Row> min_norm_solve(const Mat& a, const Row& b) {
    if (a.empty()) return Row{};
    size_t n = a[0].size();
    Mat kept;          // echelon form of the kept rows
    Row kept_b;
    std::vector<size_t> kept_idx;
    for (size_t r = 0; r < a.size(); ++r) {
        Row row = a[r];
        Rational rhs = b[r];
        for (size_t e = 0; e < kept.size(); ++e) {
            size_t lead = 0;
            while (lead < n && kept[e][lead].is_zero()) ++lead;
            if (lead == n || row[lead].is_zero()) continue;
            Rational f = row[lead] / kept[e][lead];
            for (size_t c = 0; c < n; ++c) row[c] -= f * kept[e][c];
            rhs -= f * kept_b[e];
        }
        bool zero = true;
        for (const auto& v : row)
            if (!v.is_zero()) { zero = false; break; }
        if (zero) {
            if (!rhs.is_zero()) return std::nullopt;
            continue;
        }
        kept.push_back(row);
        kept_b.push_back(rhs);
        kept_idx.push_back(r);
    }
    if (kept.empty()) return Row(n, Rational(0));
    // x = A_k^T w with (A_k A_k^T) w = b_k over the independent original rows
    size_t m = kept_idx.size();
    Mat gram(m, Row(m, Rational(0)));
    Row rb(m);
    for (size_t i = 0; i < m; ++i) {
        rb[i] = b[kept_idx[i]];
        for (size_t j = 0; j < m; ++j)
            for (size_t c = 0; c < n; ++c)
                gram[i][j] += a[kept_idx[i]][c] * a[kept_idx[j]][c];
    }
    auto w = solve_square(gram, rb);
    if (!w) return std::nullopt;
    Row x(n, Rational(0));
    for (size_t c = 0; c < n; ++c)
        for (size_t i = 0; i < m; ++i) x[c] += a[kept_idx[i]][c] * (*w)[i];
    return x;
}

std::map<std::int64_t, std::int64_t> factorize(std::int64_t v) {
    std::map<std::int64_t, std::int64_t> f;
    for (std::int64_t p = 2; p * p <= v; ++p)
        while (v % p == 0) { ++f[p]; v /= p; }
    if (v > 1) ++f[v];
    return f;
}

struct Term {
    Rational c;
    std::map<std::string, Rational> a;
};

std::vector<Term> merge_terms(const GpProblem& p,
                              const std::set<std::string>& pinned,
                              std::vector<std::vector<size_t>>* members) {
    std::vector<Term> out;
    if (members) members->clear();
    for (size_t k = 0; k < p.terms.size(); ++k) {
        Term t{p.terms[k].first, {}};
        for (const auto& [v, e] : p.terms[k].second)
            if (!pinned.count(v) && !e.is_zero()) t.a[v] = e;
        bool merged = false;
        for (size_t i = 0; i < out.size(); ++i)
            if (out[i].a == t.a) {
                out[i].c += t.c;
                if (members) (*members)[i].push_back(k);
                merged = true;
                break;
            }
        if (!merged) {
            out.push_back(t);
            if (members) members->push_back({k});
        }
    }
    return out;
}

struct NumericState {
    std::vector<double> y;
    double logval = 0;
};

/// Projected gradient ascent in log space on the constraint surface.
NumericState numeric_solve(const std::vector<std::string>& vars,
                           const std::vector<Term>& terms,
                           const std::map<std::string, Rational>& obj,
                           double X, int starts, unsigned seed) {
    size_t n = vars.size(), K = terms.size();
    double logX = std::log(X);
    std::vector<double> g(n, 0);
    std::vector<std::vector<double>> A(K, std::vector<double>(n, 0));
    std::vector<double> logc(K);
    for (size_t v = 0; v < n; ++v) {
        auto it = obj.find(vars[v]);
        g[v] = it == obj.end() ? 0.0 : it->second.to_double();
    }
    for (size_t k = 0; k < K; ++k) {
        logc[k] = std::log(terms[k].c.to_double());
        for (size_t v = 0; v < n; ++v) {
            auto it = terms[k].a.find(vars[v]);
            if (it != terms[k].a.end()) A[k][v] = it->second.to_double();
        }
    }
    auto constraint = [&](const std::vector<double>& y) {
        double mx = -1e300;
        std::vector<double> e(K);
        for (size_t k = 0; k < K; ++k) {
            e[k] = logc[k];
            for (size_t v = 0; v < n; ++v) e[k] += A[k][v] * y[v];
            mx = std::max(mx, e[k]);
        }
        double s = 0;
        for (size_t k = 0; k < K; ++k) s += std::exp(e[k] - mx);
        return mx + std::log(s);
    };
    auto to_boundary = [&](std::vector<double> y) {
        // scale y so the constraint is exactly tight
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
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    NumericState best;
    best.y.assign(n, 0);
    best.logval = -1e300;
    for (int s0 = 0; s0 < starts; ++s0) {
        std::vector<double> y(n);
        for (size_t v = 0; v < n; ++v) y[v] = uni(rng) * logX;
        y = to_boundary(y);
        double step = 0.2 * logX;
        double val = 0;
        for (size_t v = 0; v < n; ++v) val += g[v] * y[v];
        for (int it = 0; it < 1500; ++it) {
            // softmax-weighted constraint gradient
            std::vector<double> e(K);
            double mx = -1e300;
            for (size_t k = 0; k < K; ++k) {
                e[k] = logc[k];
                for (size_t v = 0; v < n; ++v) e[k] += A[k][v] * y[v];
                mx = std::max(mx, e[k]);
            }
            double tot = 0;
            for (size_t k = 0; k < K; ++k) { e[k] = std::exp(e[k] - mx); tot += e[k]; }
            std::vector<double> gc(n, 0);
            for (size_t k = 0; k < K; ++k)
                for (size_t v = 0; v < n; ++v) gc[v] += e[k] / tot * A[k][v];
            double gg = 0, cc = 0;
            for (size_t v = 0; v < n; ++v) { gg += g[v] * gc[v]; cc += gc[v] * gc[v]; }
            std::vector<double> dir(n);
            double norm = 0;
            for (size_t v = 0; v < n; ++v) {
                dir[v] = g[v] - gg / std::max(cc, 1e-300) * gc[v];
                if (y[v] <= 1e-12 && dir[v] < 0) dir[v] = 0;
                norm += dir[v] * dir[v];
            }
            if (norm < 1e-24) break;
            std::vector<double> cand(n);
            for (size_t v = 0; v < n; ++v)
                cand[v] = std::max(0.0, y[v] + step * dir[v] / std::sqrt(norm));
            cand = to_boundary(cand);
            double cval = 0;
            for (size_t v = 0; v < n; ++v) cval += g[v] * cand[v];
            if (cval > val) {
                y = cand;
                val = cval;
                step *= 1.1;
            } else {
                step *= 0.5;
                if (step < 1e-12 * logX) break;
            }
        }
        if (val > best.logval) { best.logval = val; best.y = y; }
    }
    return best;
}

SymExpr x_power(const Rational& e) {
    if (e.is_zero()) return SymExpr(Rational(1));
    return SymExpr::monomial(Rational(1), {{"X", e}});
}

} // namespace

SymExpr GpSolution::chi() const { return coeff * x_power(alpha); }

double numeric_gp_max(const GpProblem& p, double X, int starts, unsigned seed) {
    std::set<std::string> none;
    auto terms = merge_terms(p, none, nullptr);
    std::map<std::string, Rational> obj = p.objective;
    for (const auto& v : p.vars)
        if (!obj.count(v)) obj[v] = Rational(1);
    auto st = numeric_solve(p.vars, terms, obj, X, starts, seed);
    return std::exp(st.logval);
}

GpSolution solve_gp(const GpProblem& p) {
    if (p.vars.empty() || p.terms.empty())
        throw SolverError(SolverError::Kind::DegenerateProgram,
                          "tiling program without variables or constraint terms");
    std::map<std::string, Rational> obj = p.objective;
    for (const auto& v : p.vars)
        if (!obj.count(v)) obj[v] = Rational(1);
    for (const auto& v : p.vars) {
        if (obj.at(v).is_zero() || obj.at(v).is_negative()) continue;
        bool covered = false;
        for (const auto& [c, a] : p.terms)
            if (a.count(v) && !a.at(v).is_zero()) covered = true;
        if (!covered)
            throw SolverError(SolverError::Kind::UnboundedTile,
                              "tile of " + v + " is unconstrained");
    }
    for (const auto& [c, a] : p.terms) {
        if (c <= Rational(0))
            throw SolverError(SolverError::Kind::DegenerateProgram,
                              "constraint term with non-positive coefficient");
        for (const auto& [v, e] : a)
            if (e.is_negative())
                throw SolverError(SolverError::Kind::DegenerateProgram,
                                  "constraint term with negative exponent");
    }

    const double Xpre = 1e10, logXpre = std::log(Xpre);
    std::set<std::string> none;
    auto full = merge_terms(p, none, nullptr);
    auto pre = numeric_solve(p.vars, full, obj, Xpre, 24, 7);

    std::set<std::string> pinned;
    std::vector<std::string> ladder;  // free vars by ascending numeric exponent
    {
        std::vector<std::pair<double, std::string>> order;
        for (size_t v = 0; v < p.vars.size(); ++v)
            order.emplace_back(pre.y[v], p.vars[v]);
        std::sort(order.begin(), order.end());
        for (const auto& [y, v] : order) {
            if (y < 0.02 * logXpre)
                pinned.insert(v);
            else
                ladder.push_back(v);
        }
    }

    std::string last_err = "no consistent stationarity system";
    for (size_t attempt = 0; attempt <= p.vars.size(); ++attempt) {
        std::vector<std::string> freev;
        for (const auto& v : p.vars)
            if (!pinned.count(v)) freev.push_back(v);
        auto fail = [&](const std::string& why) {
            last_err = why;
            if (ladder.empty()) return false;
            pinned.insert(ladder.front());
            ladder.erase(ladder.begin());
            return true;
        };
        if (freev.empty()) {
            if (!fail("every variable pinned")) break;
            continue;
        }
        std::vector<std::vector<size_t>> members;
        auto merged = merge_terms(p, pinned, &members);
        auto red = numeric_solve(freev, merged, obj, Xpre, 16, 11);
        std::vector<size_t> active;
        for (size_t k = 0; k < merged.size(); ++k) {
            double lv = std::log(merged[k].c.to_double());
            for (size_t v = 0; v < freev.size(); ++v) {
                auto it = merged[k].a.find(freev[v]);
                if (it != merged[k].a.end()) lv += it->second.to_double() * red.y[v];
            }
            if (lv > logXpre + std::log(0.005)) active.push_back(k);
        }
        bool retry_outer = false;
        for (int inner = 0; inner < 12 && !retry_outer; ++inner) {
            if (active.empty()) { retry_outer = fail("no active constraint term"); break; }
            // stationarity: for each free var, sum_k theta_k a_kv = g_v * mu
            size_t K = active.size();
            Mat m;
            Row b;
            for (const auto& v : freev) {
                Row row(K + 1, Rational(0));
                for (size_t i = 0; i < K; ++i) {
                    auto it = merged[active[i]].a.find(v);
                    if (it != merged[active[i]].a.end()) row[i] = it->second;
                }
                row[K] = -obj.at(v);
                m.push_back(row);
                b.push_back(Rational(0));
            }
            {
                Row row(K + 1, Rational(0));
                for (size_t i = 0; i < K; ++i) row[i] = Rational(1);
                m.push_back(row);
                b.push_back(Rational(1));
            }
            auto sol = min_norm_solve(m, b);
            if (!sol) { retry_outer = fail("inconsistent stationarity system"); break; }
            std::vector<Rational> theta(sol->begin(), sol->begin() + K);
            Rational mu = (*sol)[K];
            bool dropped = false;
            for (size_t i = K; i-- > 0;)
                if (theta[i] <= Rational(0)) {
                    active.erase(active.begin() + i);
                    dropped = true;
                }
            if (dropped) continue;
            if (mu <= Rational(0)) { retry_outer = fail("non-positive dual scale"); break; }
            Rational lambda = Rational(1) / mu;
            // certificate feasibility for pinned variables, with the merged
            // weights split across original terms proportionally to c
            bool dual_ok = true;
            for (const auto& v : pinned) {
                Rational s(0);
                for (size_t i = 0; i < K; ++i)
                    for (size_t korig : members[active[i]]) {
                        auto it = p.terms[korig].second.find(v);
                        if (it == p.terms[korig].second.end()) continue;
                        s += theta[i] * (p.terms[korig].first / merged[active[i]].c) *
                             it->second;
                    }
                if (s < obj.at(v) * mu) { dual_ok = false; break; }
            }
            if (!dual_ok) { retry_outer = fail("pinned variable breaks the certificate"); break; }
            // exponents: a_k . e = 1 on active terms, minimum norm
            Mat ae;
            for (size_t i = 0; i < K; ++i) {
                Row row(freev.size(), Rational(0));
                for (size_t v = 0; v < freev.size(); ++v) {
                    auto it = merged[active[i]].a.find(freev[v]);
                    if (it != merged[active[i]].a.end()) row[v] = it->second;
                }
                ae.push_back(row);
            }
            auto e = min_norm_solve(ae, Row(K, Rational(1)));
            if (!e) { retry_outer = fail("inconsistent exponent system"); break; }
            bool eneg = false;
            for (const auto& ev : *e)
                if (ev.is_negative()) eneg = true;
            if (eneg) { retry_outer = fail("negative tile exponent"); break; }
            // inactive terms must stay lower order
            bool promote = false, infeasible = false;
            for (size_t k = 0; k < merged.size(); ++k) {
                if (std::find(active.begin(), active.end(), k) != active.end()) continue;
                Rational d(0);
                for (size_t v = 0; v < freev.size(); ++v) {
                    auto it = merged[k].a.find(freev[v]);
                    if (it != merged[k].a.end()) d += it->second * (*e)[v];
                }
                if (d > Rational(1)) infeasible = true;
                else if (d == Rational(1)) {
                    active.push_back(k);
                    std::sort(active.begin(), active.end());
                    promote = true;
                }
            }
            if (infeasible) { retry_outer = fail("inactive term dominates the tiles"); break; }
            if (promote) continue;
            Rational alpha(0);
            for (size_t v = 0; v < freev.size(); ++v) alpha += obj.at(freev[v]) * (*e)[v];
            if (alpha != lambda) { retry_outer = fail("primal/dual degree mismatch"); break; }
            // constant: C = prod (theta/c)^(lambda*theta)
            SymExpr coeff(Rational(1));
            for (size_t i = 0; i < K; ++i)
                coeff *= rational_pow(theta[i] / merged[active[i]].c, lambda * theta[i]);
            // per-prime log-coefficients of the tiles: A_act d = v_p(theta/c)
            std::set<std::int64_t> primes;
            std::vector<std::map<std::int64_t, std::int64_t>> ratio(K);
            for (size_t i = 0; i < K; ++i) {
                Rational r = theta[i] / merged[active[i]].c;
                for (const auto& [q, ex] : factorize(r.num())) ratio[i][q] += ex;
                for (const auto& [q, ex] : factorize(r.den())) ratio[i][q] -= ex;
                for (const auto& [q, ex] : ratio[i])
                    if (ex != 0) primes.insert(q);
            }
            std::map<std::string, SymExpr> tiles;
            for (size_t v = 0; v < freev.size(); ++v) tiles[freev[v]] = x_power((*e)[v]);
            bool dfail = false;
            for (auto q : primes) {
                Row rhs(K);
                for (size_t i = 0; i < K; ++i) {
                    auto it = ratio[i].find(q);
                    rhs[i] = Rational(it == ratio[i].end() ? 0 : it->second);
                }
                auto d = min_norm_solve(ae, rhs);
                if (!d) { dfail = true; break; }
                for (size_t v = 0; v < freev.size(); ++v)
                    if (!(*d)[v].is_zero())
                        tiles[freev[v]] *= rational_pow(Rational(q), (*d)[v]);
            }
            if (dfail) { retry_outer = fail("no monomial tile family"); break; }
            // exact witness check: every active term equals theta_k * X
            bool witness = true;
            for (size_t i = 0; i < K && witness; ++i) {
                SymExpr val(merged[active[i]].c);
                for (const auto& [v, ex] : merged[active[i]].a)
                    val *= tiles.at(v).pow(ex);
                if (val != SymExpr::monomial(theta[i], {{"X", Rational(1)}}))
                    witness = false;
            }
            SymExpr prod(Rational(1));
            for (size_t v = 0; v < freev.size(); ++v)
                prod *= tiles.at(freev[v]).pow(obj.at(freev[v]));
            if (witness && prod != coeff * x_power(alpha)) witness = false;
            if (!witness) { retry_outer = fail("tile witness mismatch"); break; }
            // numeric tightness check against the full problem
            const double Xv = 1e8;
            double num = numeric_gp_max(p, Xv, 24, 3);
            double sym = coeff.evaluate({}) * std::pow(Xv, alpha.to_double());
            double gap = std::abs(num - sym) / std::max(num, sym);
            if (gap > 5e-3) { retry_outer = fail("numeric gap " + std::to_string(gap)); break; }

            GpSolution out;
            out.alpha = alpha;
            out.coeff = coeff;
            out.tiles = tiles;
            for (const auto& v : pinned) out.tiles[v] = SymExpr(Rational(1));
            out.pinned.assign(pinned.begin(), pinned.end());
            out.active = active;
            out.theta = theta;
            out.numeric_value = num;
            out.numeric_gap = gap;
            return out;
        }
        if (!retry_outer) break;
    }
    throw SolverError(SolverError::Kind::NonMonomialChi,
                      "no monomial tiling optimum certificate: " + last_err);
}

SymExpr domain_size(const Statement& st) {
    SymExpr f(Rational(1));
    for (size_t li = st.loops.size(); li-- > 0;) {
        const LoopDim& l = st.loops[li];
        SymExpr integrated;
        for (const auto& mono : f.terms()) {
            Rational k(0);
            std::map<std::string, Rational> rest = mono.powers;
            auto it = rest.find(l.var);
            if (it != rest.end()) {
                k = it->second;
                rest.erase(it);
            }
            if (!k.is_integer() || k.is_negative())
                throw SolverError(SolverError::Kind::DegenerateProgram,
                                  "non-polynomial loop extent in " + l.var);
            SymExpr base = SymExpr::monomial(mono.coeff / (k + Rational(1)), rest);
            SymExpr hi = l.upper.pow(k + Rational(1));
            SymExpr lo = l.lower.pow(k + Rational(1));
            integrated += base * (hi - lo);
        }
        f = integrated;
    }
    if (f.is_zero())
        throw SolverError(SolverError::Kind::EmptyDomain, "loop nest is empty");
    // probe several scale separations so that domains valid only under a
    // growth assumption (e.g. T well below N) are not rejected
    auto syms = f.symbols();
    bool positive = false;
    for (int mode = 0; mode < 3 && !positive; ++mode) {
        std::map<std::string, double> probe;
        double v = mode == 0 ? 97.0 : (mode == 1 ? 499.0 : 5.0);
        for (const auto& s : syms) {
            probe[s] = v;
            if (mode == 1) v /= 7;
            if (mode == 2) v *= 7;
        }
        if (f.evaluate(probe) > 0) positive = true;
    }
    if (!positive)
        throw SolverError(SolverError::Kind::EmptyDomain,
                          "loop nest has non-positive volume");
    return f;
}

SymExpr access_set_bound(const AccessInfo& info,
                         const std::map<std::string, SymExpr>& tiles) {
    SymExpr prod_e(Rational(1)), prod_et(Rational(1));
    for (size_t d = 0; d < info.base.size(); ++d) {
        SymExpr extent(Rational(1));
        for (const auto& [v, c] : info.base[d].coeffs) {
            auto it = tiles.find(v);
            if (it != tiles.end()) extent *= it->second;
        }
        prod_e *= extent;
        prod_et *= extent - SymExpr(Rational((std::int64_t)info.offset_count(d)));
    }
    if (info.includes_output) return prod_e - prod_et;
    return SymExpr(Rational(2)) * prod_e - prod_et;
}

TileSolution solve_tiling(const SoapStatement& s) {
    GpProblem gp;
    for (const auto& l : s.st.loops) gp.vars.push_back(l.var);
    std::set<std::string> loop_vars(gp.vars.begin(), gp.vars.end());
    TileSolution out;
    for (const auto& info : s.accesses) {
        // every dimension must be indexed by at most one variable, each
        // variable indexing at most one dimension
        std::set<std::string> seen;
        for (const auto& ix : info.base)
            for (const auto& [v, c] : ix.coeffs) {
                if (!loop_vars.count(v)) continue;
                if (!seen.insert(v).second)
                    throw SolverError(SolverError::Kind::DegenerateProgram,
                                      "variable " + v + " indexes two dimensions of " +
                                          info.array);
            }
        if (info.includes_output) {
            for (size_t d = 0; d < info.base.size(); ++d) {
                size_t t = info.offset_count(d);
                if (t == 0) continue;
                std::map<std::string, Rational> a;
                for (size_t d2 = 0; d2 < info.base.size(); ++d2) {
                    if (d2 == d) continue;
                    for (const auto& [v, c] : info.base[d2].coeffs)
                        if (loop_vars.count(v)) a[v] += Rational(1);
                }
                gp.terms.emplace_back(Rational((std::int64_t)t), a);
                out.assumptions.push_back("offsets of " + info.array +
                                          " stay below the tile extents");
            }
        } else {
            std::map<std::string, Rational> a;
            for (const auto& ix : info.base)
                for (const auto& [v, c] : ix.coeffs)
                    if (loop_vars.count(v)) a[v] += Rational(1);
            gp.terms.emplace_back(Rational(1), a);
        }
    }
    out.gp = solve_gp(gp);
    out.tiles = out.gp.tiles;
    out.chi = out.gp.chi();
    for (const auto& info : s.accesses) {
        out.constraint_arrays.push_back(info.array);
        out.constraint_terms.push_back(access_set_bound(info, out.tiles));
    }
    if (s.case_info.regime != CaseInfo::Regime::None)
        out.assumptions.push_back("stride regime: " + s.case_info.condition);
    return out;
}

Intensity intensity_and_X0(const SymExpr& chi) {
    if (!chi.is_single_monomial())
        throw SolverError(SolverError::Kind::NonMonomialChi,
                          "chi is not a single monomial: " + chi.str());
    const Monomial& m = chi.terms()[0];
    Rational alpha(0);
    std::map<std::string, Rational> rest = m.powers;
    auto it = rest.find("X");
    if (it != rest.end()) {
        alpha = it->second;
        rest.erase(it);
    }
    Intensity out;
    out.alpha = alpha;
    out.chi_coeff = SymExpr::monomial(m.coeff, rest);
    if (alpha < Rational(1))
        throw SolverError(SolverError::Kind::NonMonomialChi,
                          "sublinear tiling objective");
    if (alpha == Rational(1)) {
        out.rho = out.chi_coeff;
        return out;
    }
    Rational am1 = alpha - Rational(1);
    out.X0 = SymExpr::monomial(alpha / am1, {{"S", Rational(1)}});
    out.rho = out.chi_coeff * rational_pow(alpha, alpha) *
              rational_pow(am1, -am1) *
              SymExpr::monomial(Rational(1), {{"S", am1}});
    return out;
}

GrowthOrder default_order(const Program& p) {
    GrowthOrder order;
    for (const auto& s : p.parameters) order.growing.insert(s);
    order.bounded.insert("S");
    order.growing.erase("S");
    return order;
}

BoundResult statement_bound(const SoapStatement& s, const GrowthOrder& order) {
    BoundResult out;
    out.id = "statement " + std::to_string(s.st.id);
    out.case_condition = s.case_info.condition;
    SymExpr dsize = domain_size(s.st);
    out.tiling = solve_tiling(s);
    Intensity in = intensity_and_X0(out.tiling.chi);
    out.rho = in.rho;
    out.X0 = in.X0;
    SymExpr S = SymExpr::symbol("S");
    if (in.alpha == Rational(1)) {
        out.Q = div(dsize, in.rho);
    } else {
        std::map<std::string, SymExpr> at_x0{{"X", *in.X0}};
        std::map<std::string, SymExpr> tiles0;
        for (const auto& [v, t] : out.tiling.tiles) tiles0[v] = t.substitute(at_x0);
        SymExpr total;
        for (const auto& info : s.accesses) total += access_set_bound(info, tiles0);
        out.Q = div(dsize * (total - S), out.tiling.chi.substitute(at_x0));
    }
    out.leading = out.Q.leading_term(order);
    out.warnings = out.tiling.assumptions;
    return out;
}

} // namespace soap
