#ifndef SOAP_FRONTEND_HPP
#define SOAP_FRONTEND_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "soap/symbolic.hpp"

namespace soap {

struct ParseError : std::runtime_error {
    enum class Kind { Syntax, NonAffineBound, NonAffineIndex };
    Kind kind;
    int line;
    int col;
    ParseError(Kind k, int line_, int col_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ", col " +
                             std::to_string(col_) + ": " + msg),
          kind(k), line(line_), col(col_) {}
};

/// Affine function of iteration variables: sum of coeff(var)*var + constant.
/// Coefficients and the constant are SymExpr in the program parameters
/// (integer literals or a symbolic stride parameter).
struct IndexExpr {
    std::map<std::string, SymExpr> coeffs;
    SymExpr constant;

    friend bool operator==(const IndexExpr& a, const IndexExpr& b) {
        return a.coeffs == b.coeffs && a.constant == b.constant;
    }
    std::string str() const;
};

struct ArrayAccess {
    std::string array;
    std::vector<IndexExpr> idx;

    friend bool operator==(const ArrayAccess& a, const ArrayAccess& b) {
        return a.array == b.array && a.idx == b.idx;
    }
};

struct LoopDim {
    std::string var;
    SymExpr lower;   // inclusive
    SymExpr upper;   // exclusive, range(lower, upper)

    friend bool operator==(const LoopDim& a, const LoopDim& b) {
        return a.var == b.var && a.lower == b.lower && a.upper == b.upper;
    }
};

struct Statement {
    int id = 0;
    std::vector<LoopDim> loops;          // outermost first
    ArrayAccess output;
    std::vector<ArrayAccess> inputs;     // source order; += puts output first
    bool is_update = false;

    const LoopDim* find_loop(const std::string& var) const;
    friend bool operator==(const Statement& a, const Statement& b) {
        return a.loops == b.loops && a.output == b.output &&
               a.inputs == b.inputs && a.is_update == b.is_update;
    }
};

struct Program {
    std::vector<std::string> parameters;
    std::vector<Statement> statements;

    friend bool operator==(const Program& a, const Program& b) {
        return a.parameters == b.parameters && a.statements == b.statements;
    }
};

/// Per-array simple-overlap description of one statement's accesses.
struct AccessInfo {
    enum class Status { Conforming, VariableMismatch };

    std::string array;
    std::vector<ArrayAccess> accesses;            // output last when included
    std::vector<IndexExpr> base;                  // first input access
    std::vector<std::vector<std::int64_t>> translations;  // one per access
    std::vector<std::set<std::int64_t>> offset_sets;      // t-hat per dimension
    bool includes_output = false;
    Status status = Status::Conforming;
    std::string reason;
    /// Dimensions whose index mixes two or more iteration variables
    /// (e.g. r + sw*w); candidates for the non-injective projection.
    std::vector<int> noninjective_dims;

    size_t offset_count(size_t dim) const { return offset_sets[dim].size(); }
};

Program parse_program(const std::string& source);
std::string render_program(const Program& p);

std::vector<AccessInfo> extract_accesses(const Statement& st);

} // namespace soap

#endif
