#ifndef SOAP_SOAP_NORMALIZE_HPP
#define SOAP_SOAP_NORMALIZE_HPP

#include <string>
#include <vector>

#include "soap/frontend.hpp"

namespace soap {

struct SoapError : std::runtime_error {
    enum class Kind { CannotProveDisjoint, NoFreeVariable, UnsupportedAccess };
    Kind kind;
    SoapError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct DisjointnessWitness {
    std::string array;
    std::string component_a;             // rendered index vectors
    std::string component_b;
    std::vector<std::string> certificate;  // inequalities / divisibility facts
    bool set_disjoint;  // true: accessed sets disjoint; false: distinct at
                        // every shared iteration point
};

struct CaseInfo {
    enum class Regime { None, Injective, Overlap };
    Regime regime = Regime::None;
    std::string condition;  // predicate on stride parameters, empty if None
};

/// A statement in normal form: every per-array access group is a simple
/// overlap with injective components.
struct SoapStatement {
    Statement st;                         // rewritten accesses
    std::vector<AccessInfo> accesses;     // all conforming
    std::vector<std::pair<std::string, std::string>> version_dims;  // (array, var)
    CaseInfo case_info;
    std::vector<DisjointnessWitness> witnesses;
};

/// Splits a non-conforming access group into virtual arrays, one per distinct
/// access function, proving pairwise disjointness. Returns the renamed
/// per-component access groups; throws CannotProveDisjoint otherwise.
std::vector<AccessInfo> split_disjoint(const Statement& st, const AccessInfo& info,
                                       std::vector<DisjointnessWitness>& witnesses);

/// Appends a version dimension indexed by the innermost loop variable absent
/// from the array's access function; the output access gets v+1, inputs v.
Statement add_version_dimension(const Statement& st, const std::string& array,
                                std::string& version_var);

/// Full normalization: split, project non-injective dimensions into stride
/// regimes, add version dimensions. One SoapStatement per case regime.
std::vector<SoapStatement> normalize_statement(const Statement& st);

struct NormalizedProgram {
    Program source;
    std::vector<std::vector<SoapStatement>> statements;  // cases per statement
};

NormalizedProgram normalize_program(const Program& p);

} // namespace soap

#endif
