#ifndef SOAP_ORACLE_HPP
#define SOAP_ORACLE_HPP

#include "soap/sdg.hpp"

namespace soap {

struct OracleError : std::runtime_error {
    enum class Kind {
        TooLarge,
        UnboundParameter,
        InfeasibleCapacity,
        SoundnessViolation
    };
    Kind kind;
    OracleError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

/// Concrete computation DAG at fixed parameter values. Vertex indices are a
/// topological order (parents precede children).
struct Cdag {
    struct Vertex {
        bool is_input = false;
        std::string array;
        std::vector<std::int64_t> index;  // element index vector
        int version = 0;                  // write count for this element
        int stmt = -1;                    // producing statement, compute only
        std::vector<std::int64_t> iter;   // iteration vector, compute only
    };
    std::vector<Vertex> vertices;
    std::vector<std::vector<int>> parents;
    std::vector<std::vector<int>> children;
    std::vector<int> inputs;   // indegree 0; carry blue pebbles initially
    std::vector<int> outputs;  // outdegree 0; must end with blue pebbles

    size_t compute_count() const;
};

/// Enumerates the concrete iteration domains in program order and
/// materializes one vertex per computed element version.
Cdag build_cdag(const Program& p, const std::map<std::string, std::int64_t>& params,
                size_t vertex_cap = 10000);

struct PebbleMove {
    enum class Kind { Load, Store, Compute };
    Kind kind;
    int vertex;
    int evicted = -1;  // red pebble removed to make room, -1 if none
};

struct PebbleResult {
    std::int64_t cost = 0;  // exact optimum, or best upper bound when !exact
    bool exact = true;
    std::int64_t lower = 0;  // search bounds, meaningful when !exact
    std::int64_t upper = 0;
    std::vector<PebbleMove> moves;  // witness sequence when exact
};

/// Exact minimum I/O: uniform-cost search over (red, blue) states with
/// per-blue-set dominance pruning; discards happen implicitly as evictions.
/// When the expanded-state budget runs out the result is flagged inexact and
/// carries the best search bounds.
PebbleResult pebble_exact(const Cdag& g, std::int64_t S,
                          std::size_t budget = 2000000,
                          bool allow_recompute = true);

/// Upper-bound witness: computes in topological order with LRU eviction,
/// storing values that are still needed. No recomputation.
std::int64_t pebble_greedy(const Cdag& g, std::int64_t S,
                           std::vector<PebbleMove>* moves = nullptr);

/// Replays a move sequence from the initial state and checks every rule:
/// capacity, load-from-blue, store-from-red, compute-with-red-parents, and
/// blue pebbles on all outputs at the end. Returns the I/O count.
std::int64_t validate_moves(const Cdag& g, std::int64_t S,
                            const std::vector<PebbleMove>& moves);

/// Minimum vertex cut separating the inputs from H, via max-flow with unit
/// vertex capacities. By default H members are themselves eligible as cut
/// vertices; with exclude_members the cut must avoid H, which models phases
/// that compute all of H from outside values.
std::size_t min_dominator(const Cdag& g, const std::vector<int>& H,
                          bool exclude_members = false);

struct OracleReport {
    SymExpr symbolic;        // bound that was evaluated
    double bound = 0;        // its value at the concrete parameters and S
    PebbleResult optimal;
    std::int64_t greedy = 0;
    double gap = 0;          // optimal - bound
};

/// Sandwich check bound <= exact optimum <= greedy on a concrete instance.
/// Throws SoundnessViolation if the evaluated bound exceeds the optimum.
OracleReport verify_bound(const Program& p,
                          const std::map<std::string, std::int64_t>& params,
                          std::int64_t S, std::size_t budget = 2000000,
                          bool allow_recompute = true);

} // namespace soap

#endif
