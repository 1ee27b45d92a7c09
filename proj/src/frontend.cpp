#include "soap/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace soap {

namespace {

struct Cursor {
    const std::string& s;
    size_t pos = 0;
    int line;

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool consume(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    void expect(char c, const std::string& what) {
        if (!consume(c)) fail("expected '" + std::string(1, c) + "' " + what);
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(ParseError::Kind::Syntax, line, (int)pos + 1, msg);
    }
    std::string ident() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum((unsigned char)s[pos]) || s[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected identifier");
        if (std::isdigit((unsigned char)s[start]))
            fail("identifier cannot start with a digit");
        return s.substr(start, pos - start);
    }
};

/// expr := term (('+'|'-') term)* ; term := factor ('*' factor)* ;
/// factor := INT | IDENT | '(' expr ')' | '-' factor
SymExpr parse_expr(Cursor& c);

SymExpr parse_factor(Cursor& c) {
    c.skip_ws();
    if (c.consume('-')) return -parse_factor(c);
    if (c.consume('(')) {
        SymExpr e = parse_expr(c);
        c.expect(')', "to close parenthesis");
        return e;
    }
    char ch = c.peek();
    if (std::isdigit((unsigned char)ch)) {
        size_t start = c.pos;
        while (c.pos < c.s.size() && std::isdigit((unsigned char)c.s[c.pos]))
            ++c.pos;
        return SymExpr(Rational(std::stoll(c.s.substr(start, c.pos - start))));
    }
    return SymExpr::symbol(c.ident());
}

SymExpr parse_term(Cursor& c) {
    SymExpr e = parse_factor(c);
    while (c.peek() == '*') {
        c.consume('*');
        e *= parse_factor(c);
    }
    return e;
}

SymExpr parse_expr(Cursor& c) {
    SymExpr e = parse_term(c);
    for (;;) {
        if (c.consume('+'))
            e += parse_term(c);
        else if (c.consume('-'))
            e -= parse_term(c);
        else
            return e;
    }
}

void check_affine_bound(const SymExpr& e, int line) {
    for (const auto& m : e.terms()) {
        Rational deg(0);
        for (const auto& [s, p] : m.powers)
            if (!is_prime_symbol(s)) {
                if (p.is_negative() || !p.is_integer())
                    throw ParseError(ParseError::Kind::NonAffineBound, line, 1,
                                     "loop bound is not affine");
                deg += p;
            }
        if (Rational(1) < deg)
            throw ParseError(ParseError::Kind::NonAffineBound, line, 1,
                             "loop bound is not affine");
    }
}

/// Split a polynomial into an affine function of the iteration variables.
IndexExpr to_index_expr(const SymExpr& e, const std::set<std::string>& iter_vars,
                        int line) {
    IndexExpr out;
    for (const auto& m : e.terms()) {
        std::string var;
        std::map<std::string, Rational> rest;
        for (const auto& [s, p] : m.powers) {
            if (iter_vars.count(s)) {
                if (!var.empty() || p != Rational(1))
                    throw ParseError(ParseError::Kind::NonAffineIndex, line, 1,
                                     "array index is not affine in iteration "
                                     "variables");
                var = s;
            } else {
                rest[s] = p;
            }
        }
        SymExpr part = SymExpr::monomial(m.coeff, rest);
        if (var.empty())
            out.constant += part;
        else
            out.coeffs[var] += part;
    }
    for (auto it = out.coeffs.begin(); it != out.coeffs.end();)
        it = it->second.is_zero() ? out.coeffs.erase(it) : std::next(it);
    return out;
}

ArrayAccess parse_access(Cursor& c, const std::string& name,
                         const std::set<std::string>& iter_vars) {
    ArrayAccess acc;
    acc.array = name;
    c.expect('[', "after array name");
    for (;;) {
        acc.idx.push_back(to_index_expr(parse_expr(c), iter_vars, c.line));
        if (c.consume(',')) continue;
        c.expect(']', "to close array index");
        break;
    }
    return acc;
}

/// Collect every name[...] access on the right-hand side; function names,
/// arithmetic operators, and bare identifiers are accepted and ignored.
void scan_rhs(Cursor& c, const std::set<std::string>& iter_vars,
              std::vector<ArrayAccess>& out) {
    while (!c.eof()) {
        char ch = c.peek();
        if (std::isalpha((unsigned char)ch) || ch == '_') {
            std::string name = c.ident();
            if (c.peek() == '[')
                out.push_back(parse_access(c, name, iter_vars));
        } else if (std::isdigit((unsigned char)ch)) {
            while (c.pos < c.s.size() && std::isdigit((unsigned char)c.s[c.pos]))
                ++c.pos;
        } else if (std::string("+-*/(),").find(ch) != std::string::npos) {
            ++c.pos;
        } else {
            c.fail("unexpected character in expression");
        }
    }
}

int indent_of(const std::string& line) {
    int n = 0;
    for (char ch : line) {
        if (ch == ' ') ++n;
        else if (ch == '\t') n += 8;
        else break;
    }
    return n;
}

} // namespace

const LoopDim* Statement::find_loop(const std::string& var) const {
    for (const auto& l : loops)
        if (l.var == var) return &l;
    return nullptr;
}

Program parse_program(const std::string& source) {
    Program prog;
    std::vector<std::pair<int, LoopDim>> loop_stack;  // (indent, loop)
    std::set<std::string> iter_vars;
    bool have_params = false;
    int stmt_id = 0;

    std::istringstream in(source);
    std::string raw;
    for (int lineno = 1; std::getline(in, raw); ++lineno) {
        std::string text = raw;
        if (auto h = text.find('#'); h != std::string::npos) text.erase(h);
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        while (!text.empty() && (text.back() == '\r' || text.back() == ' '))
            text.pop_back();
        int indent = indent_of(text);
        Cursor c{text, (size_t)indent, lineno};

        if (!have_params) {
            std::string kw = c.ident();
            if (kw != "params") c.fail("file must start with a 'params:' line");
            c.expect(':', "after 'params'");
            if (!c.eof())
                for (;;) {
                    prog.parameters.push_back(c.ident());
                    if (!c.consume(',')) break;
                }
            have_params = true;
            continue;
        }

        while (!loop_stack.empty() && indent <= loop_stack.back().first) {
            iter_vars.erase(loop_stack.back().second.var);
            loop_stack.pop_back();
        }

        size_t mark = c.pos;
        std::string first = c.ident();
        if (first == "for") {
            LoopDim loop;
            loop.var = c.ident();
            if (c.ident() != "in") c.fail("expected 'in'");
            if (c.ident() != "range") c.fail("expected 'range'");
            c.expect('(', "after 'range'");
            loop.lower = parse_expr(c);
            c.expect(',', "between range bounds");
            loop.upper = parse_expr(c);
            c.expect(')', "to close 'range'");
            c.expect(':', "after loop header");
            if (!c.eof()) c.fail("trailing text after loop header");
            check_affine_bound(loop.lower, lineno);
            check_affine_bound(loop.upper, lineno);
            for (const auto& bound : {loop.lower, loop.upper})
                for (const auto& s : bound.symbols())
                    if (!iter_vars.count(s) &&
                        std::find(prog.parameters.begin(), prog.parameters.end(),
                                  s) == prog.parameters.end())
                        c.fail("loop bound references undeclared symbol: " + s);
            if (iter_vars.count(loop.var))
                c.fail("loop variable shadows an outer loop: " + loop.var);
            if (auto ext = (loop.upper - loop.lower).as_rational();
                ext && *ext <= Rational(0))
                c.fail("loop domain is empty for all parameter values");
            iter_vars.insert(loop.var);
            loop_stack.push_back({indent, loop});
            continue;
        }

        // assignment: name[...] = rhs  |  name[...] += rhs
        c.pos = mark;
        std::string name = c.ident();
        if (c.peek() != '[') c.fail("expected an array access on the left");
        Statement st;
        st.id = stmt_id++;
        for (const auto& [ind, l] : loop_stack) st.loops.push_back(l);
        if (st.loops.empty()) c.fail("assignment outside of any loop");
        st.output = parse_access(c, name, iter_vars);
        c.skip_ws();
        if (c.consume('+')) {
            c.expect('=', "after '+' in assignment");
            st.is_update = true;
        } else {
            c.expect('=', "in assignment");
        }
        if (st.is_update) st.inputs.push_back(st.output);
        scan_rhs(c, iter_vars, st.inputs);
        auto check_params = [&](const ArrayAccess& a) {
            for (const auto& ix : a.idx) {
                std::set<std::string> syms = ix.constant.symbols();
                for (const auto& [v, coeff] : ix.coeffs)
                    for (const auto& s : coeff.symbols()) syms.insert(s);
                for (const auto& s : syms)
                    if (std::find(prog.parameters.begin(), prog.parameters.end(),
                                  s) == prog.parameters.end())
                        c.fail("array index references undeclared symbol: " + s);
            }
        };
        check_params(st.output);
        for (const auto& a : st.inputs) check_params(a);
        prog.statements.push_back(std::move(st));
    }
    if (!have_params)
        throw ParseError(ParseError::Kind::Syntax, 1, 1, "empty program");
    return prog;
}

std::string IndexExpr::str() const {
    std::string out;
    auto append = [&](const std::string& piece, bool neg) {
        if (out.empty())
            out = neg ? "-" + piece : piece;
        else
            out += (neg ? " - " : " + ") + piece;
    };
    for (const auto& [v, coeff] : coeffs) {
        if (auto r = coeff.as_rational()) {
            Rational a = *r;
            bool neg = a.is_negative();
            if (neg) a = -a;
            append(a.is_one() ? v : a.str() + "*" + v, neg);
        } else {
            append(coeff.str() + "*" + v, false);
        }
    }
    if (!constant.is_zero() || out.empty()) {
        if (auto r = constant.as_rational()) {
            Rational a = *r;
            bool neg = a.is_negative();
            if (neg) a = -a;
            append(a.str(), neg);
        } else {
            append(constant.str(), false);
        }
    }
    return out;
}

namespace {

std::string access_str(const ArrayAccess& a) {
    std::string out = a.array + "[";
    for (size_t i = 0; i < a.idx.size(); ++i)
        out += (i ? ", " : "") + a.idx[i].str();
    return out + "]";
}

} // namespace

std::string render_program(const Program& p) {
    std::string out = "params:";
    for (size_t i = 0; i < p.parameters.size(); ++i)
        out += (i ? ", " : " ") + p.parameters[i];
    out += "\n";
    for (const auto& st : p.statements) {
        std::string pad;
        for (const auto& l : st.loops) {
            out += pad + "for " + l.var + " in range(" + l.lower.str() + ", " +
                   l.upper.str() + "):\n";
            pad += "    ";
        }
        out += pad + access_str(st.output) + (st.is_update ? " += f(" : " = f(");
        bool first = true;
        for (size_t i = st.is_update ? 1 : 0; i < st.inputs.size(); ++i) {
            out += (first ? "" : ", ") + access_str(st.inputs[i]);
            first = false;
        }
        out += ")\n";
    }
    return out;
}

std::vector<AccessInfo> extract_accesses(const Statement& st) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<ArrayAccess>> groups;
    for (const auto& a : st.inputs) {
        if (!groups.count(a.array)) order.push_back(a.array);
        groups[a.array].push_back(a);
    }
    if (!groups.count(st.output.array)) order.push_back(st.output.array);
    // the output participates in the joint decomposition of its array group
    groups[st.output.array].push_back(st.output);

    std::vector<AccessInfo> out;
    for (const auto& name : order) {
        AccessInfo info;
        info.array = name;
        info.accesses = groups[name];
        info.includes_output = (name == st.output.array);
        info.base = info.accesses.front().idx;
        size_t dims = info.base.size();
        info.offset_sets.assign(dims, {});
        for (const auto& acc : info.accesses) {
            std::vector<std::int64_t> t(dims, 0);
            bool ok = acc.idx.size() == dims;
            for (size_t d = 0; ok && d < dims; ++d) {
                if (acc.idx[d].coeffs != info.base[d].coeffs) { ok = false; break; }
                auto diff = (acc.idx[d].constant - info.base[d].constant).as_rational();
                if (!diff || !diff->is_integer()) { ok = false; break; }
                t[d] = diff->num();
            }
            if (!ok) {
                info.status = AccessInfo::Status::VariableMismatch;
                info.reason = "accesses to " + name +
                              " are not equal up to a constant translation";
                info.translations.clear();
                for (auto& s : info.offset_sets) s.clear();
                break;
            }
            info.translations.push_back(t);
            for (size_t d = 0; d < dims; ++d)
                if (t[d] != 0) info.offset_sets[d].insert(t[d]);
        }
        for (size_t d = 0; d < dims; ++d)
            if (info.base[d].coeffs.size() >= 2)
                info.noninjective_dims.push_back((int)d);
        out.push_back(std::move(info));
    }
    return out;
}

} // namespace soap
