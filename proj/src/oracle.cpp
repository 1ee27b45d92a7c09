#include "soap/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <queue>
#include <unordered_map>

namespace soap {

namespace {

using Bits = std::vector<std::uint64_t>;

struct BitsHash {
    size_t operator()(const Bits& b) const {
        size_t h = 1469598103934665603ull;
        for (auto w : b) {
            h ^= w;
            h *= 1099511628211ull;
        }
        return h;
    }
};

std::int64_t eval_int(const SymExpr& e, const std::map<std::string, double>& env) {
    return (std::int64_t)std::llround(e.evaluate(env));
}

std::string element_key(const std::string& array,
                        const std::vector<std::int64_t>& idx) {
    std::string k = array;
    for (auto v : idx) k += "," + std::to_string(v);
    return k;
}

} // namespace

size_t Cdag::compute_count() const {
    size_t n = 0;
    for (const auto& v : vertices)
        if (!v.is_input) ++n;
    return n;
}

Cdag build_cdag(const Program& p, const std::map<std::string, std::int64_t>& params,
                size_t vertex_cap) {
    for (const auto& par : p.parameters)
        if (!params.count(par))
            throw OracleError(OracleError::Kind::UnboundParameter,
                              "parameter " + par + " has no concrete value");
    Cdag g;
    std::map<std::string, int> writer;       // element -> last producing vertex
    std::map<std::string, int> write_count;  // element -> versions written

    auto add_vertex = [&](Cdag::Vertex v) {
        if (g.vertices.size() >= vertex_cap)
            throw OracleError(OracleError::Kind::TooLarge,
                              "concrete graph exceeds " +
                                  std::to_string(vertex_cap) + " vertices");
        g.vertices.push_back(std::move(v));
        g.parents.emplace_back();
        return (int)g.vertices.size() - 1;
    };

    std::map<std::string, double> env;
    for (const auto& [k, v] : params) env[k] = (double)v;

    for (const auto& st : p.statements) {
        std::vector<std::int64_t> point(st.loops.size());
        auto index_of = [&](const ArrayAccess& a) {
            std::vector<std::int64_t> idx;
            for (const auto& ix : a.idx) {
                double v = ix.constant.evaluate(env);
                for (const auto& [var, c] : ix.coeffs)
                    v += c.evaluate(env) * env.at(var);
                idx.push_back((std::int64_t)std::llround(v));
            }
            return idx;
        };
        auto self_access = [&](const ArrayAccess& a) {
            return st.is_update && a.array == st.output.array &&
                   a.idx.size() == st.output.idx.size() &&
                   std::equal(a.idx.begin(), a.idx.end(), st.output.idx.begin());
        };
        auto emit = [&]() {
            std::vector<int> par;
            for (const auto& in : st.inputs) {
                auto idx = index_of(in);
                std::string key = element_key(in.array, idx);
                auto it = writer.find(key);
                if (it == writer.end()) {
                    // the initial value of an accumulator is implicit
                    if (self_access(in)) continue;
                    Cdag::Vertex v;
                    v.is_input = true;
                    v.array = in.array;
                    v.index = idx;
                    writer[key] = add_vertex(std::move(v));
                    it = writer.find(key);
                }
                if (std::find(par.begin(), par.end(), it->second) == par.end())
                    par.push_back(it->second);
            }
            Cdag::Vertex v;
            v.array = st.output.array;
            v.index = index_of(st.output);
            v.stmt = st.id;
            v.iter = point;
            std::string key = element_key(v.array, v.index);
            v.version = ++write_count[key];
            int id = add_vertex(std::move(v));
            g.parents[id] = par;
            writer[key] = id;
        };
        auto enumerate = [&](auto&& self, size_t depth) -> void {
            if (depth == st.loops.size()) {
                emit();
                return;
            }
            const auto& l = st.loops[depth];
            std::int64_t lo = eval_int(l.lower, env);
            std::int64_t hi = eval_int(l.upper, env);
            for (std::int64_t x = lo; x < hi; ++x) {
                env[l.var] = (double)x;
                point[depth] = x;
                self(self, depth + 1);
            }
            env.erase(l.var);
        };
        enumerate(enumerate, 0);
    }

    g.children.assign(g.vertices.size(), {});
    for (size_t v = 0; v < g.vertices.size(); ++v)
        for (int u : g.parents[v]) g.children[u].push_back((int)v);
    for (size_t v = 0; v < g.vertices.size(); ++v) {
        if (g.parents[v].empty() && g.vertices[v].is_input) g.inputs.push_back((int)v);
        if (g.children[v].empty() && !g.vertices[v].is_input)
            g.outputs.push_back((int)v);
    }
    return g;
}

PebbleResult pebble_exact(const Cdag& g, std::int64_t S, std::size_t budget,
                          bool allow_recompute) {
    int V = (int)g.vertices.size();
    if (V > 64)
        throw OracleError(OracleError::Kind::TooLarge,
                          "exact pebbling search supports up to 64 vertices, "
                          "the graph has " + std::to_string(V));
    bool track_done = !allow_recompute;
    using Mask = std::uint64_t;
    auto bit = [](int v) { return (Mask)1 << v; };

    Mask out_mask = 0, init_blue = 0, input_mask = 0;
    for (int o : g.outputs) out_mask |= bit(o);
    for (int i : g.inputs) {
        init_blue |= bit(i);
        input_mask |= bit(i);
    }
    std::vector<Mask> pmask(V, 0);  // operand masks per compute vertex
    Mask leaf_mask = 0;             // vertices nothing reads
    for (int v = 0; v < V; ++v) {
        for (int u : g.parents[v]) pmask[v] |= bit(u);
        if (g.children[v].empty()) leaf_mask |= bit(v);
    }

    struct Node {
        Mask red, blue, done;
        std::int64_t cost;
        int parent;
        std::vector<PebbleMove> moves;  // the move plus any free computes
    };
    std::vector<Node> nodes;
    // per (blue, done) group, the best known (red, cost) pairs: a state is
    // dominated when a cheaper-or-equal state with superset red pebbles exists
    struct GroupHash {
        size_t operator()(const std::pair<Mask, Mask>& k) const {
            return BitsHash{}(Bits{k.first, k.second});
        }
    };
    std::unordered_map<std::pair<Mask, Mask>,
                       std::vector<std::pair<Mask, std::int64_t>>, GroupHash>
        frontier;

    // inserts unless dominated; evicts entries the new state dominates
    auto admit = [&](const Node& n) {
        auto& lst = frontier[{n.blue, n.done}];
        for (const auto& [red, cost] : lst)
            if (cost <= n.cost && (n.red & ~red) == 0) return false;
        std::erase_if(lst, [&](const auto& e) {
            return n.cost <= e.second && (e.first & ~n.red) == 0;
        });
        lst.push_back({n.red, n.cost});
        return true;
    };
    // a queued state is stale when a strictly better state displaced it
    auto stale = [&](const Node& n) {
        auto it = frontier.find({n.blue, n.done});
        if (it == frontier.end()) return true;
        for (const auto& [red, cost] : it->second)
            if (red == n.red && cost == n.cost) return false;
        return true;
    };

    // admissible and consistent remaining-cost estimate: every output still
    // lacking a blue pebble needs a store, and every input feeding a vertex
    // that must still be recomputed (reverse-reachable from an unavailable
    // output through unavailable vertices) needs a load
    auto heuristic = [&](Mask red, Mask blue) {
        std::int64_t h = std::popcount(out_mask & ~blue);
        Mask unavail = ~(red | blue);
        Mask needed = out_mask & unavail;
        Mask ops = 0;
        bool grew = needed != 0;
        while (grew) {
            grew = false;
            Mask scan = needed;
            while (scan) {
                int v = std::countr_zero(scan);
                scan &= scan - 1;
                ops |= pmask[v];
                Mask up = pmask[v] & unavail & ~needed;
                if (up) {
                    needed |= up;
                    grew = true;
                }
            }
        }
        return h + std::popcount(ops & input_mask & ~red);
    };
    // computing into a free slot is never worse than not computing (the extra
    // red pebble can be evicted for free later), so free computes are applied
    // eagerly; only valid when recomputation is allowed
    auto closure = [&](Mask& red, std::vector<PebbleMove>* mv) {
        if (track_done) return;
        int reds = std::popcount(red);
        bool more = reds < S;
        while (more) {
            more = false;
            for (int v = 0; v < V && reds < S; ++v) {
                if ((input_mask & bit(v)) || (red & bit(v))) continue;
                if (pmask[v] & ~red) continue;
                red |= bit(v);
                ++reds;
                more = reds < S;
                if (mv) mv->push_back({PebbleMove::Kind::Compute, v, -1});
            }
        }
    };

    using QE = std::pair<std::int64_t, int>;  // cost + heuristic, node index
    // pop the lowest f; ties go to the newest node, which dives through
    // equal-cost plateaus instead of sweeping them breadth-first
    auto qcmp = [](const QE& a, const QE& b) {
        return a.first > b.first ||
               (a.first == b.first && a.second < b.second);
    };
    std::priority_queue<QE, std::vector<QE>, decltype(qcmp)> pq(qcmp);
    {
        Node init{0, init_blue, 0, 0, -1, {}};
        closure(init.red, &init.moves);
        admit(init);
        pq.push({heuristic(init.red, init.blue), 0});
        nodes.push_back(std::move(init));
    }

    PebbleResult res;
    std::size_t expanded = 0;
    std::int64_t best_lower = 0;
    while (!pq.empty()) {
        auto [prio, ni] = pq.top();
        pq.pop();
        Node n = nodes[ni];
        if (stale(n)) continue;
        best_lower = std::max(best_lower, prio);
        // stores are deferred to eviction time, so once every output carries a
        // pebble the only remaining cost is one store per red-only output and
        // the popped priority is the true total
        if ((out_mask & ~(n.blue | n.red)) == 0) {
            Mask pending = out_mask & ~n.blue;
            res.cost = res.lower = res.upper = n.cost + std::popcount(pending);
            res.exact = true;
            for (int cur = ni; cur >= 0; cur = nodes[cur].parent)
                for (auto it = nodes[cur].moves.rbegin();
                     it != nodes[cur].moves.rend(); ++it)
                    res.moves.push_back(*it);
            std::reverse(res.moves.begin(), res.moves.end());
            while (pending) {
                int v = std::countr_zero(pending);
                pending &= pending - 1;
                res.moves.push_back({PebbleMove::Kind::Store, v, -1});
            }
            return res;
        }
        if (++expanded > budget) break;

        int reds = std::popcount(n.red);
        auto push = [&](Mask red, Mask blue, Mask done, std::int64_t c,
                        std::vector<PebbleMove> mvs) {
            closure(red, &mvs);
            Node s{red, blue, done, c, ni, std::move(mvs)};
            if (!admit(s)) return;
            pq.push({c + heuristic(s.red, s.blue), (int)nodes.size()});
            nodes.push_back(std::move(s));
        };
        // a store is only ever useful right before its vertex leaves fast
        // memory (or at the very end for outputs), so each eviction branches
        // into discard and store-then-evict instead of free-standing stores
        auto add_red = [&](int v, std::int64_t c, PebbleMove::Kind kind,
                           Mask keep) {
            Mask done = n.done;
            if (track_done && kind == PebbleMove::Kind::Compute) done |= bit(v);
            if (reds < S) {
                push(n.red | bit(v), n.blue, done, n.cost + c, {{kind, v, -1}});
                return;
            }
            Mask evictable = n.red & ~keep;
            while (evictable) {
                int r = std::countr_zero(evictable);
                evictable &= evictable - 1;
                push((n.red & ~bit(r)) | bit(v), n.blue, done, n.cost + c,
                     {{kind, v, r}});
                if (!(n.blue & bit(r)))
                    push((n.red & ~bit(r)) | bit(v), n.blue | bit(r), done,
                         n.cost + c + 1,
                         {{PebbleMove::Kind::Store, r, -1}, {kind, v, r}});
            }
        };
        for (int v = 0; v < V; ++v) {
            bool computable = !(input_mask & bit(v)) && !(n.red & bit(v)) &&
                              (!track_done || !(n.done & bit(v)));
            // with the closure applied, free computes are exhausted already
            if (computable && (reds == S || track_done) && !(pmask[v] & ~n.red))
                add_red(v, 0, PebbleMove::Kind::Compute, pmask[v]);
            // loading is only useful for operands of later computes
            if ((n.blue & bit(v)) && !(n.red & bit(v)) && !(leaf_mask & bit(v)))
                add_red(v, 1, PebbleMove::Kind::Load, 0);
        }
    }
    // budget exhausted: report search bounds
    res.exact = false;
    res.lower = best_lower;
    res.upper = pebble_greedy(g, S);
    res.cost = res.upper;
    return res;
}

std::int64_t pebble_greedy(const Cdag& g, std::int64_t S,
                           std::vector<PebbleMove>* moves) {
    int V = (int)g.vertices.size();
    std::vector<int> uses(V, 0);
    for (int v = 0; v < V; ++v) uses[v] = (int)g.children[v].size();
    std::vector<bool> blue(V, false), red(V, false), is_out(V, false);
    for (int i : g.inputs) blue[i] = true;
    for (int o : g.outputs) is_out[o] = true;

    std::vector<std::int64_t> last_use(V, -1);
    std::int64_t clock = 0, io = 0;
    int in_cache = 0;

    auto record = [&](PebbleMove::Kind k, int v, int ev) {
        if (moves) moves->push_back({k, v, ev});
    };
    auto evict_one = [&](const std::vector<int>& pinned) {
        int victim = -1;
        for (int v = 0; v < V; ++v) {
            if (!red[v]) continue;
            if (std::find(pinned.begin(), pinned.end(), v) != pinned.end())
                continue;
            if (victim < 0 || last_use[v] < last_use[victim]) victim = v;
        }
        if (!blue[victim] && (uses[victim] > 0 || is_out[victim])) {
            blue[victim] = true;
            ++io;
            record(PebbleMove::Kind::Store, victim, -1);
        }
        red[victim] = false;
        --in_cache;
        return victim;
    };
    for (int v = 0; v < V; ++v) {
        if (g.vertices[v].is_input) continue;
        const auto& par = g.parents[v];
        if ((std::int64_t)par.size() > S - 1)
            throw OracleError(OracleError::Kind::InfeasibleCapacity,
                              "vertex has " + std::to_string(par.size()) +
                                  " operands but the cache holds " +
                                  std::to_string(S));
        for (int u : par) {
            if (red[u]) continue;
            int ev = in_cache == S ? evict_one(par) : -1;
            red[u] = true;
            ++in_cache;
            ++io;
            record(PebbleMove::Kind::Load, u, ev);
        }
        for (int u : par) last_use[u] = clock++;
        int ev = in_cache == S ? evict_one(par) : -1;
        red[v] = true;
        ++in_cache;
        record(PebbleMove::Kind::Compute, v, ev);
        last_use[v] = clock++;
        for (int u : par) --uses[u];
    }
    for (int o : g.outputs)
        if (!blue[o]) {
            blue[o] = true;
            ++io;
            record(PebbleMove::Kind::Store, o, -1);
        }
    return io;
}

std::int64_t validate_moves(const Cdag& g, std::int64_t S,
                            const std::vector<PebbleMove>& moves) {
    int V = (int)g.vertices.size();
    std::vector<bool> red(V, false), blue(V, false);
    for (int i : g.inputs) blue[i] = true;
    std::int64_t in_cache = 0, io = 0;
    auto fail = [](const std::string& m) -> std::int64_t {
        throw std::runtime_error("invalid pebbling move: " + m);
    };
    for (const auto& mv : moves) {
        if (mv.evicted >= 0) {
            if (!red[mv.evicted]) fail("evicting a vertex without a red pebble");
            red[mv.evicted] = false;
            --in_cache;
        }
        switch (mv.kind) {
        case PebbleMove::Kind::Load:
            if (!blue[mv.vertex]) fail("load without a blue pebble");
            if (!red[mv.vertex]) {
                red[mv.vertex] = true;
                ++in_cache;
            }
            ++io;
            break;
        case PebbleMove::Kind::Store:
            if (!red[mv.vertex]) fail("store without a red pebble");
            blue[mv.vertex] = true;
            ++io;
            break;
        case PebbleMove::Kind::Compute:
            if (g.vertices[mv.vertex].is_input) fail("computing an input");
            for (int u : g.parents[mv.vertex])
                if (!red[u]) fail("computing with a missing operand");
            if (!red[mv.vertex]) {
                red[mv.vertex] = true;
                ++in_cache;
            }
            break;
        }
        if (in_cache > S) fail("cache capacity exceeded");
    }
    for (int o : g.outputs)
        if (!blue[o]) fail("an output was never stored");
    return io;
}

std::size_t min_dominator(const Cdag& g, const std::vector<int>& H,
                          bool exclude_members) {
    if (H.empty()) return 0;
    int V = (int)g.vertices.size();
    int N = 2 * V + 2, s = 2 * V, t = 2 * V + 1;
    const std::int64_t INF = 1 << 28;
    struct E {
        int to;
        std::int64_t cap;
        int rev;
    };
    std::vector<std::vector<E>> adj(N);
    auto add = [&](int a, int b, std::int64_t c) {
        adj[a].push_back({b, c, (int)adj[b].size()});
        adj[b].push_back({a, 0, (int)adj[a].size() - 1});
    };
    std::vector<bool> member(V, false);
    if (exclude_members)
        for (int h : H) member[h] = true;
    for (int v = 0; v < V; ++v) add(2 * v, 2 * v + 1, member[v] ? INF : 1);
    for (int v = 0; v < V; ++v)
        for (int c : g.children[v]) add(2 * v + 1, 2 * c, INF);
    for (int i : g.inputs) add(s, 2 * i, INF);
    for (int h : H) add(2 * h + 1, t, INF);

    // Dinic
    std::int64_t flow = 0;
    std::vector<int> level(N), it(N);
    auto bfs = [&]() {
        std::fill(level.begin(), level.end(), -1);
        std::queue<int> q;
        level[s] = 0;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (const auto& e : adj[u])
                if (e.cap > 0 && level[e.to] < 0) {
                    level[e.to] = level[u] + 1;
                    q.push(e.to);
                }
        }
        return level[t] >= 0;
    };
    auto dfs = [&](auto&& self, int u, std::int64_t f) -> std::int64_t {
        if (u == t) return f;
        for (int& i = it[u]; i < (int)adj[u].size(); ++i) {
            E& e = adj[u][i];
            if (e.cap > 0 && level[e.to] == level[u] + 1) {
                std::int64_t d = self(self, e.to, std::min(f, e.cap));
                if (d > 0) {
                    e.cap -= d;
                    adj[e.to][e.rev].cap += d;
                    return d;
                }
            }
        }
        return 0;
    };
    while (bfs()) {
        std::fill(it.begin(), it.end(), 0);
        while (std::int64_t f = dfs(dfs, s, INF)) flow += f;
    }
    return (std::size_t)flow;
}

OracleReport verify_bound(const Program& p,
                          const std::map<std::string, std::int64_t>& params,
                          std::int64_t S, std::size_t budget,
                          bool allow_recompute) {
    OracleReport rep;
    Sdg g = build_sdg(p);
    SdgBound sb = sdg_bound(g, default_order(p));
    rep.symbolic = sb.Q;
    std::map<std::string, double> pt;
    for (const auto& [k, v] : params) pt[k] = (double)v;
    pt["S"] = (double)S;
    rep.bound = sb.Q.is_zero() ? 0.0 : sb.Q.evaluate(pt);

    Cdag c = build_cdag(p, params);
    rep.optimal = pebble_exact(c, S, budget, allow_recompute);
    rep.greedy = pebble_greedy(c, S);
    rep.gap = (double)rep.optimal.cost - rep.bound;
    if (rep.optimal.exact) {
        if (rep.bound > (double)rep.optimal.cost + 1e-9)
            throw OracleError(OracleError::Kind::SoundnessViolation,
                              "derived bound " + std::to_string(rep.bound) +
                                  " exceeds the exact optimum " +
                                  std::to_string(rep.optimal.cost));
        if (rep.optimal.cost > rep.greedy)
            throw OracleError(OracleError::Kind::SoundnessViolation,
                              "exact optimum exceeds the greedy upper bound");
    }
    return rep;
}

} // namespace soap
