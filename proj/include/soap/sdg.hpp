#ifndef SOAP_SDG_HPP
#define SOAP_SDG_HPP

#include "soap/bounds.hpp"

namespace soap {

struct SdgError : std::runtime_error {
    enum class Kind { EnumerationCapExceeded, IncompatibleIterationSpaces };
    Kind kind;
    SdgError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

/// Data-flow graph over arrays: one node per (virtual) array, edges from the
/// inputs of each statement to its output.
struct Sdg {
    struct Node {
        std::string array;
        bool is_input = false;   // never produced by a statement
        int producer = -1;       // statement index into stmts
        bool versioned = false;
        SymExpr size;            // number of element versions produced
    };

    Program source;
    std::vector<SoapStatement> stmts;   // one normalization case per statement
    std::vector<Node> nodes;
    std::map<std::string, int> index;
    std::vector<std::pair<int, int>> edges;  // node indices, input -> output

    std::vector<int> non_input_nodes() const;
};

/// Normalizes the program and builds the graph. Statements with several
/// stride regimes use case `case_choice` (clamped per statement).
Sdg build_sdg(const Program& p, size_t case_choice = 0);

struct SubgraphIntensity {
    std::vector<int> members;
    SymExpr rho;            // single monomial in S
    bool unbounded = false; // merge failed; treat the intensity as infinite
    bool exact = true;      // false when the per-group sum fallback was used
    std::vector<std::string> warnings;
};

/// Intensity of the merged statement computing the given member arrays:
/// iteration spaces are unified through shared-array accesses, the compute
/// count is the sum of per-producer tile products, and groups of identical
/// monomials are solved exactly; distinct groups combine by the numerically
/// verified max rule with a provable sum fallback.
SubgraphIntensity subgraph_intensity(const Sdg& g, const std::vector<int>& members);

struct SdgBound {
    SymExpr Q;
    SymExpr leading;
    std::map<std::string, SymExpr> rho_max;  // per non-input array
    std::vector<std::string> best_fusion;    // arrays of the max-rho subgraph
    SymExpr rho_best;                        // its intensity
    std::vector<std::string> warnings;
};

/// Sum over non-input arrays of |A| / max_{H containing A} rho_H, over all
/// subgraphs up to `cap` non-input nodes.
SdgBound sdg_bound(const Sdg& g, const GrowthOrder& order, size_t cap = 20);

} // namespace soap

#endif
