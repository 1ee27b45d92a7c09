#include "soap/symbolic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace soap {

namespace {

std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t n) {
    std::vector<std::pair<std::int64_t, int>> out;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            out.push_back({p, e});
        }
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

Rational int_pow(Rational base, std::int64_t e) {
    bool inv = e < 0;
    if (inv) e = -e;
    Rational r(1);
    while (e > 0) {
        if (e & 1) r *= base;
        base *= base;
        e >>= 1;
    }
    return inv ? Rational(1) / r : r;
}

/// Fold integer parts of prime pseudo-symbol exponents into the coefficient
/// and drop zero exponents; the canonical invariant for Monomial.
void normalize(Monomial& m) {
    if (m.coeff.is_zero()) { m.powers.clear(); return; }
    for (auto it = m.powers.begin(); it != m.powers.end();) {
        if (it->second.is_zero()) { it = m.powers.erase(it); continue; }
        if (is_prime_symbol(it->first)) {
            std::int64_t p = std::stoll(it->first.substr(1));
            std::int64_t k = it->second.floor();
            if (k != 0) {
                m.coeff *= int_pow(Rational(p), k);
                it->second -= Rational(k);
            }
            if (it->second.is_zero()) { it = m.powers.erase(it); continue; }
        }
        ++it;
    }
}

Rational total_degree(const Monomial& m) {
    Rational d(0);
    for (const auto& [s, e] : m.powers)
        if (!is_prime_symbol(s)) d += e;
    return d;
}

/// Deterministic ordering key: descending total degree, then lexicographic
/// comparison of the power map.
bool term_order(const Monomial& a, const Monomial& b) {
    Rational da = total_degree(a), db = total_degree(b);
    if (da != db) return db < da;
    auto ia = a.powers.begin(), ib = b.powers.begin();
    for (; ia != a.powers.end() && ib != b.powers.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return ia->first < ib->first;
        if (ia->second != ib->second) return ib->second < ia->second;
    }
    if (a.powers.size() != b.powers.size()) return a.powers.size() > b.powers.size();
    return false;
}

} // namespace

void GrowthOrder::add_assumption(const std::string& rel) {
    auto first_ident = [](const std::string& s) -> std::string {
        size_t i = 0;
        while (i < s.size() && !(std::isalpha((unsigned char)s[i]) || s[i] == '_')) ++i;
        size_t j = i;
        while (j < s.size() && (std::isalnum((unsigned char)s[j]) || s[j] == '_')) ++j;
        return s.substr(i, j - i);
    };
    size_t lt = rel.find('<'), gt = rel.find('>');
    std::string small, big;
    if (lt != std::string::npos) {
        small = first_ident(rel.substr(0, lt));
        big = first_ident(rel.substr(lt + 1));
    } else if (gt != std::string::npos) {
        big = first_ident(rel.substr(0, gt));
        small = first_ident(rel.substr(gt + 1));
    } else {
        throw std::invalid_argument("assumption must contain '<' or '>': " + rel);
    }
    if (small.empty() || big.empty())
        throw std::invalid_argument("cannot parse assumption: " + rel);
    assumptions.push_back({small, big});
}

SymExpr::SymExpr(Rational c) {
    if (!c.is_zero()) terms_.push_back(Monomial(c));
}

SymExpr SymExpr::symbol(const std::string& name) {
    return monomial(Rational(1), {{name, Rational(1)}});
}

SymExpr SymExpr::monomial(Rational c, std::map<std::string, Rational> powers) {
    SymExpr e;
    Monomial m(c, std::move(powers));
    normalize(m);
    if (!m.coeff.is_zero()) e.terms_.push_back(std::move(m));
    return e;
}

std::optional<Rational> SymExpr::as_rational() const {
    if (terms_.empty()) return Rational(0);
    if (terms_.size() == 1 && terms_[0].powers.empty()) return terms_[0].coeff;
    return std::nullopt;
}

void SymExpr::insert(Monomial m) {
    normalize(m);
    if (m.coeff.is_zero()) return;
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m, term_order);
    if (it != terms_.end() && it->powers == m.powers) {
        it->coeff += m.coeff;
        if (it->coeff.is_zero()) terms_.erase(it);
    } else {
        terms_.insert(it, std::move(m));
    }
}

SymExpr operator+(const SymExpr& a, const SymExpr& b) {
    SymExpr r = a;
    for (const auto& m : b.terms_) r.insert(m);
    return r;
}

SymExpr SymExpr::operator-() const {
    SymExpr r = *this;
    for (auto& m : r.terms_) m.coeff = -m.coeff;
    return r;
}

SymExpr operator-(const SymExpr& a, const SymExpr& b) { return a + (-b); }

SymExpr operator*(const SymExpr& a, const SymExpr& b) {
    SymExpr r;
    for (const auto& ma : a.terms_)
        for (const auto& mb : b.terms_) {
            Monomial m(ma.coeff * mb.coeff, ma.powers);
            for (const auto& [s, e] : mb.powers) {
                auto [it, fresh] = m.powers.emplace(s, e);
                if (!fresh) it->second += e;
            }
            r.insert(std::move(m));
        }
    return r;
}

bool operator==(const SymExpr& a, const SymExpr& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (size_t i = 0; i < a.terms_.size(); ++i)
        if (a.terms_[i].coeff != b.terms_[i].coeff ||
            a.terms_[i].powers != b.terms_[i].powers)
            return false;
    return true;
}

SymExpr rational_pow(const Rational& base, const Rational& q) {
    if (base.is_zero()) {
        if (q <= Rational(0)) throw std::domain_error("0 raised to nonpositive power");
        return SymExpr(Rational(0));
    }
    if (q.is_integer()) return SymExpr(int_pow(base, q.num()));
    if (base.is_negative())
        throw std::domain_error("fractional power of negative constant");
    Monomial m(Rational(1));
    for (auto [p, e] : factorize(base.num()))
        m.powers["#" + std::to_string(p)] += q * Rational(e);
    for (auto [p, e] : factorize(base.den()))
        m.powers["#" + std::to_string(p)] -= q * Rational(e);
    SymExpr r;
    normalize(m);
    r = SymExpr::monomial(m.coeff, m.powers);
    return r;
}

SymExpr SymExpr::pow(const Rational& q) const {
    if (q.is_zero()) return SymExpr(Rational(1));
    if (q.is_integer() && q.num() > 0 && !is_single_monomial()) {
        SymExpr r(Rational(1));
        for (std::int64_t i = 0; i < q.num(); ++i) r *= *this;
        return r;
    }
    if (terms_.empty()) {
        if (q.is_negative()) throw std::domain_error("division by zero expression");
        return SymExpr();
    }
    if (!is_single_monomial())
        throw std::domain_error("fractional or negative power of a sum");
    const Monomial& m = terms_[0];
    SymExpr r = rational_pow(m.coeff, q);
    std::map<std::string, Rational> powers;
    for (const auto& [s, e] : m.powers) powers[s] = e * q;
    return r * monomial(Rational(1), std::move(powers));
}

SymExpr div(const SymExpr& a, const SymExpr& b) { return a * b.pow(Rational(-1)); }

SymExpr SymExpr::substitute(const std::map<std::string, SymExpr>& bindings) const {
    SymExpr out;
    for (const auto& m : terms_) {
        SymExpr term = SymExpr(m.coeff);
        for (const auto& [s, e] : m.powers) {
            auto it = bindings.find(s);
            if (it == bindings.end())
                term *= monomial(Rational(1), {{s, e}});
            else
                term *= it->second.pow(e);
        }
        out += term;
    }
    return out;
}

double SymExpr::evaluate(const std::map<std::string, double>& point) const {
    double total = 0;
    for (const auto& m : terms_) {
        double v = m.coeff.to_double();
        for (const auto& [s, e] : m.powers) {
            double base;
            if (is_prime_symbol(s)) {
                base = (double)std::stoll(s.substr(1));
            } else {
                auto it = point.find(s);
                if (it == point.end())
                    throw std::invalid_argument("unbound symbol in evaluate: " + s);
                base = it->second;
            }
            v *= std::pow(base, e.to_double());
        }
        total += v;
    }
    return total;
}

std::set<std::string> SymExpr::symbols() const {
    std::set<std::string> out;
    for (const auto& m : terms_)
        for (const auto& [s, e] : m.powers)
            if (!is_prime_symbol(s)) out.insert(s);
    return out;
}

namespace {

/// Strict dominance of m1 over m2 as all growing symbols tend to infinity.
bool dominates(const Monomial& m1, const Monomial& m2, const GrowthOrder& order,
               const std::vector<std::pair<std::string, std::string>>& closure) {
    Rational g1(0), g2(0), b1(0), b2(0);
    std::map<std::string, Rational> delta;
    auto classify = [&](const Monomial& m, Rational& g, Rational& b, int sign) {
        for (const auto& [s, e] : m.powers) {
            if (is_prime_symbol(s)) continue;
            if (order.growing.count(s)) {
                g += e;
                delta[s] += sign > 0 ? e : -e;
            } else if (order.bounded.count(s)) {
                b += e;
            } else {
                throw UnclassifiedSymbol(s);
            }
        }
    };
    classify(m1, g1, b1, +1);
    classify(m2, g2, b2, -1);
    if (g1 != g2) return g2 < g1;
    bool growing_equal = true;
    for (const auto& [s, d] : delta)
        if (!d.is_zero()) { growing_equal = false; break; }
    if (growing_equal) return b2 < b1;
    // Equal total growing degree, different exponent vectors: resolvable only
    // through declared assumptions. Reduce the exponent difference by shifting
    // weight from assumed-smaller to assumed-larger symbols.
    for (bool progress = true; progress;) {
        progress = false;
        for (const auto& [small, big] : closure) {
            auto is_ = delta.find(small), ib = delta.find(big);
            if (is_ == delta.end() || ib == delta.end()) continue;
            if (is_->second < Rational(0) && ib->second > Rational(0)) {
                Rational t = std::min(-is_->second, ib->second);
                is_->second += t;
                ib->second -= t;
                progress = true;
            }
        }
    }
    for (const auto& [s, d] : delta)
        if (!d.is_zero()) return false;
    return true;
}

} // namespace

SymExpr SymExpr::leading_term(const GrowthOrder& order) const {
    if (terms_.size() <= 1) return *this;
    auto closure = order.assumptions;
    // transitive closure of the "grows slower than" relation
    for (bool grew = true; grew;) {
        grew = false;
        for (size_t i = 0; i < closure.size(); ++i)
            for (size_t j = 0; j < closure.size(); ++j)
                if (closure[i].second == closure[j].first) {
                    std::pair<std::string, std::string> c{closure[i].first,
                                                         closure[j].second};
                    if (std::find(closure.begin(), closure.end(), c) == closure.end()) {
                        closure.push_back(c);
                        grew = true;
                    }
                }
    }
    SymExpr out;
    for (const auto& m : terms_) {
        bool dominated = false;
        for (const auto& other : terms_) {
            if (&other == &m) continue;
            if (dominates(other, m, order, closure)) { dominated = true; break; }
        }
        if (!dominated) out.insert(m);
    }
    return out;
}

namespace {

std::string exponent_str(const std::string& base, const Rational& e) {
    if (e.is_one()) return base;
    if (e == Rational(1, 2)) return "sqrt(" + base + ")";
    if (e == Rational(1, 3)) return "cbrt(" + base + ")";
    if (e.is_integer()) return base + "^" + std::to_string(e.num());
    return base + "^(" + e.str() + ")";
}

std::string monomial_str(const Monomial& m) {
    std::vector<std::string> num, den;
    std::int64_t cn = m.coeff.num() < 0 ? -m.coeff.num() : m.coeff.num();
    if (cn != 1 || m.powers.empty() ||
        std::all_of(m.powers.begin(), m.powers.end(),
                    [](const auto& p) { return p.second.is_negative(); }))
        num.push_back(std::to_string(cn));
    if (m.coeff.den() != 1) den.push_back(std::to_string(m.coeff.den()));
    for (const auto& [s, e] : m.powers) {
        std::string base = is_prime_symbol(s) ? s.substr(1) : s;
        if (e.is_negative())
            den.push_back(exponent_str(base, -e));
        else
            num.push_back(exponent_str(base, e));
    }
    std::string ns;
    for (size_t i = 0; i < num.size(); ++i)
        ns += (i ? "*" : "") + num[i];
    if (den.empty()) return ns;
    std::string ds;
    for (size_t i = 0; i < den.size(); ++i)
        ds += (i ? "*" : "") + den[i];
    if (den.size() > 1) ds = "(" + ds + ")";
    return ns + "/" + ds;
}

} // namespace

std::string SymExpr::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (size_t i = 0; i < terms_.size(); ++i) {
        bool neg = terms_[i].coeff.is_negative();
        if (i == 0)
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        out += monomial_str(terms_[i]);
    }
    return out;
}

} // namespace soap
