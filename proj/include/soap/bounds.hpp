#ifndef SOAP_BOUNDS_HPP
#define SOAP_BOUNDS_HPP

#include <optional>

#include "soap/soap_normalize.hpp"

namespace soap {

struct SolverError : std::runtime_error {
    enum class Kind { UnboundedTile, DegenerateProgram, NonMonomialChi, EmptyDomain };
    Kind kind;
    SolverError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

/// Number of iteration points of the loop nest, as a polynomial in the
/// parameters (iterated integration, exact to the stated leading order).
SymExpr domain_size(const Statement& st);

/// Size of the access set of one array group when each iteration variable
/// spans a tile of the given size: input-only groups get
/// 2*prod E - prod(E - t), in-out groups prod E - prod(E - t), where E is the
/// tile of the variable indexing each dimension and t the offset-set size.
SymExpr access_set_bound(const AccessInfo& info,
                         const std::map<std::string, SymExpr>& tiles);

/// max prod_v b_v^objective[v]  s.t.  sum_k c_k * prod_v b_v^a_kv <= X, b >= 1.
struct GpProblem {
    std::vector<std::string> vars;
    // (c_k, exponent map a_k); exponents are nonnegative rationals
    std::vector<std::pair<Rational, std::map<std::string, Rational>>> terms;
    std::map<std::string, Rational> objective;  // default 1 per var
};

struct GpSolution {
    Rational alpha;                        // chi(X) = coeff * X^alpha
    SymExpr coeff;                         // exact constant, may carry radicals
    std::map<std::string, SymExpr> tiles;  // var -> monomial in X; pinned -> 1
    std::vector<std::string> pinned;       // vars held at 1
    std::vector<size_t> active;            // indices into merged terms
    std::vector<Rational> theta;           // AM-GM certificate weights
    double numeric_value = 0;              // numeric optimum at X = kVerifyX
    double numeric_gap = 0;                // |numeric - symbolic| / symbolic

    SymExpr chi() const;                   // coeff * X^alpha
};

/// Exact solve guided by a numeric pre-solve; the returned weights form a
/// weighted AM-GM certificate chi <= coeff*X^alpha and the tiles witness
/// achievability. Throws SolverError on failure.
GpSolution solve_gp(const GpProblem& p);

/// Numeric reference: multi-start projected ascent in log space.
double numeric_gp_max(const GpProblem& p, double X, int starts = 24,
                      unsigned seed = 1);

struct TileSolution {
    GpSolution gp;
    std::map<std::string, SymExpr> tiles;       // per loop variable
    SymExpr chi;                                // product of tile sizes
    std::vector<std::string> constraint_arrays; // per-array labels
    std::vector<SymExpr> constraint_terms;      // access-set sizes at the tiles
    std::vector<std::string> assumptions;       // regime notes (offset<tile, ...)
};

TileSolution solve_tiling(const SoapStatement& s);

struct Intensity {
    SymExpr rho;                  // max over X of chi(X)/(X-S)
    std::optional<SymExpr> X0;    // maximizer; empty when alpha == 1
    Rational alpha;
    SymExpr chi_coeff;
};

/// Closed-form intensity for chi(X) = C*X^alpha, alpha >= 1:
/// alpha > 1: X0 = alpha*S/(alpha-1), rho = C*alpha^alpha/(alpha-1)^(alpha-1)
///            * S^(alpha-1); alpha == 1: rho = C, X0 unbounded.
Intensity intensity_and_X0(const SymExpr& chi);

struct BoundResult {
    std::string id;
    SymExpr Q;                    // full parametric bound
    SymExpr leading;              // leading term under the growth order
    SymExpr rho;
    std::optional<SymExpr> X0;
    TileSolution tiling;
    std::string case_condition;
    std::vector<std::string> warnings;
};

/// I/O lower bound for one normalized statement case:
/// alpha > 1: Q = |D| * (sum_j |A_j|(X0) - S) / chi(X0); alpha == 1: |D|/C.
BoundResult statement_bound(const SoapStatement& s, const GrowthOrder& order);

/// Growth order used by default: parameters grow, S is bounded.
GrowthOrder default_order(const Program& p);

} // namespace soap

#endif
