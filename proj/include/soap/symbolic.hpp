#ifndef SOAP_SYMBOLIC_HPP
#define SOAP_SYMBOLIC_HPP

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "soap/rational.hpp"

namespace soap {

struct UnclassifiedSymbol : std::runtime_error {
    explicit UnclassifiedSymbol(const std::string& sym)
        : std::runtime_error("symbol not classified in growth order: " + sym) {}
};

/// One power-product term: coeff * prod_s s^powers[s].
/// Radical numeric constants are carried as pseudo-symbols "#p" (p prime)
/// with fractional exponents kept in [0,1); the integer part of a prime's
/// exponent is folded into the rational coefficient. This keeps values such
/// as sqrt(2) or 3^(3/2) exact and canonically comparable.
struct Monomial {
    Rational coeff;
    std::map<std::string, Rational> powers;

    Monomial() : coeff(0) {}
    explicit Monomial(Rational c) : coeff(c) {}
    Monomial(Rational c, std::map<std::string, Rational> p)
        : coeff(c), powers(std::move(p)) {}
};

inline bool is_prime_symbol(const std::string& s) { return !s.empty() && s[0] == '#'; }

/// Declares which symbols tend to infinity (growing) and which are treated
/// as asymptotically dominated (bounded, e.g. the memory size S).
/// Assumptions are pairs (small, big) meaning "small grows slower than big";
/// they are used only when comparing monomials, never for simplification.
struct GrowthOrder {
    std::set<std::string> growing;
    std::set<std::string> bounded;
    std::vector<std::pair<std::string, std::string>> assumptions;

    /// Accepts "T < N", "T<N/2", "N > T".
    void add_assumption(const std::string& rel);
};

class SymExpr {
public:
    SymExpr() = default;
    SymExpr(Rational c);                       // constant
    SymExpr(std::int64_t c) : SymExpr(Rational(c)) {}
    static SymExpr symbol(const std::string& name);
    static SymExpr monomial(Rational c, std::map<std::string, Rational> powers);

    const std::vector<Monomial>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_single_monomial() const { return terms_.size() == 1; }
    /// Constant with no symbols at all (prime pseudo-symbols included).
    std::optional<Rational> as_rational() const;

    friend SymExpr operator+(const SymExpr& a, const SymExpr& b);
    friend SymExpr operator-(const SymExpr& a, const SymExpr& b);
    friend SymExpr operator*(const SymExpr& a, const SymExpr& b);
    SymExpr operator-() const;
    SymExpr& operator+=(const SymExpr& o) { return *this = *this + o; }
    SymExpr& operator-=(const SymExpr& o) { return *this = *this - o; }
    SymExpr& operator*=(const SymExpr& o) { return *this = *this * o; }

    friend bool operator==(const SymExpr& a, const SymExpr& b);
    friend bool operator!=(const SymExpr& a, const SymExpr& b) { return !(a == b); }

    /// Raise to a rational power. Integer exponents work on any expression;
    /// fractional exponents require a single monomial with positive rational
    /// coefficient (factored into prime pseudo-symbols).
    SymExpr pow(const Rational& q) const;

    SymExpr substitute(const std::map<std::string, SymExpr>& bindings) const;
    double evaluate(const std::map<std::string, double>& point) const;

    SymExpr leading_term(const GrowthOrder& order) const;

    std::set<std::string> symbols() const;      // excludes prime pseudo-symbols
    std::string str() const;

private:
    void insert(Monomial m);                    // canonicalizing insert
    std::vector<Monomial> terms_;               // sorted by deterministic key
};

/// divide: a * b^-1, valid when b is a single monomial.
SymExpr div(const SymExpr& a, const SymExpr& b);

/// Exact q-th power of a positive rational via prime factorization; the
/// result is a constant monomial possibly carrying prime pseudo-symbols.
SymExpr rational_pow(const Rational& base, const Rational& q);

} // namespace soap

#endif
