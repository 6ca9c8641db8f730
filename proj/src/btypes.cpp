#include "cao/btypes.hpp"

#include "cao/frontend.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace cao {

// ---------------------------------------------------------------- constructors

namespace {
MTypePtr mk(MType t) { return std::make_shared<const MType>(std::move(t)); }
MType node(MType::Kind k) {
    MType t;
    t.kind = k;
    return t;
}
}  // namespace

MTypePtr mt_call(std::string role, std::string method, FormulaPtr phi) {
    MType t = node(MType::Kind::Call);
    t.role = std::move(role);
    t.method = std::move(method);
    t.phi = std::move(phi);
    return mk(std::move(t));
}
MTypePtr mt_term(FormulaPtr phi) {
    MType t = node(MType::Kind::Term);
    t.phi = std::move(phi);
    return mk(std::move(t));
}
MTypePtr mt_skip() {
    static MTypePtr s = mk(node(MType::Kind::Skip));
    return s;
}
MTypePtr mt_seq(MTypePtr a, MTypePtr b) {
    MType t = node(MType::Kind::Seq);
    t.sub = {std::move(a), std::move(b)};
    return mk(std::move(t));
}
MTypePtr mt_seq(const std::vector<MTypePtr>& xs) {
    if (xs.empty()) return mt_skip();
    MTypePtr r = xs.back();
    for (size_t i = xs.size() - 1; i-- > 0;) r = mt_seq(xs[i], r);
    return r;
}
MTypePtr mt_star(MTypePtr a) {
    MType t = node(MType::Kind::Star);
    t.sub = {std::move(a)};
    return mk(std::move(t));
}
MTypePtr mt_choice(std::vector<MTypePtr> xs) {
    if (xs.empty()) throw SpecError("active choice needs at least one branch");
    MType t = node(MType::Kind::Choice);
    t.sub = std::move(xs);
    return mk(std::move(t));
}
MTypePtr mt_branch(std::vector<std::string> methods, bool any, FormulaPtr phi, MTypePtr l1, MTypePtr l2) {
    MType t = node(MType::Kind::Branch);
    t.methods = std::move(methods);
    t.any_method = any;
    t.phi = std::move(phi);
    t.sub = {std::move(l1), std::move(l2)};
    return mk(std::move(t));
}

std::string to_string(const MTypePtr& t) {
    switch (t->kind) {
    case MType::Kind::Call: return t->role + "!" + t->method + "(" + to_string(t->phi) + ")";
    case MType::Kind::Term: return "down(" + to_string(t->phi) + ")";
    case MType::Kind::Skip: return "skip";
    case MType::Kind::Seq: {
        std::string a = to_string(t->sub[0]);
        if (t->sub[0]->kind == MType::Kind::Seq) a = "(" + a + ")";
        return a + " . " + to_string(t->sub[1]);
    }
    case MType::Kind::Star: {
        std::string a = to_string(t->sub[0]);
        if (t->sub[0]->kind == MType::Kind::Seq || t->sub[0]->kind == MType::Kind::Star) a = "(" + a + ")";
        return a + "*";
    }
    case MType::Kind::Choice: {
        std::string s = "+{";
        for (size_t i = 0; i < t->sub.size(); ++i) s += (i ? ", " : "") + to_string(t->sub[i]);
        return s + "}";
    }
    case MType::Kind::Branch: {
        std::string ms = "M";
        if (!t->any_method) {
            ms = "{";
            for (size_t i = 0; i < t->methods.size(); ++i) ms += (i ? ", " : "") + t->methods[i];
            ms += "}";
        }
        return "&(" + ms + ", " + to_string(t->phi) + "){" + to_string(t->sub[0]) + ", " + to_string(t->sub[1]) + "}";
    }
    }
    return "?";
}

int depth(const MTypePtr& t) {
    int d = 0;
    for (const auto& s : t->sub) d = std::max(d, depth(s));
    return d + 1;
}

std::string to_string(const Protocol& p) {
    return "?" + p.method + "(" + to_string(p.pre) + ") . " + to_string(p.body);
}

// ---------------------------------------------------------------- type syntax

namespace {

class TypeParser {
public:
    explicit TypeParser(const std::string& s) : s_(s) {}

    Protocol protocol() {
        ws();
        expect('?');
        Protocol p;
        p.method = qualified();
        p.pre = formula_arg();
        ws();
        if (peek() == '.') {
            ++i_;
            p.body = seq();
        } else {
            p.body = mt_skip();
        }
        end();
        return p;
    }

    MTypePtr type_eof() {
        auto t = seq();
        end();
        return t;
    }

private:
    const std::string& s_;
    size_t i_ = 0;

    [[noreturn]] void fail(const std::string& m) const {
        throw SpecError("method type: " + m + " at offset " + std::to_string(i_));
    }
    void ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    char peek() {
        ws();
        return i_ < s_.size() ? s_[i_] : '\0';
    }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++i_;
    }
    void end() {
        if (peek() != '\0') fail("trailing input");
    }
    std::string ident() {
        ws();
        size_t j = i_;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
        if (j == i_) fail("expected identifier");
        std::string r = s_.substr(i_, j - i_);
        i_ = j;
        return r;
    }
    bool keyword(const std::string& k) {
        ws();
        if (s_.compare(i_, k.size(), k) != 0) return false;
        size_t j = i_ + k.size();
        if (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) return false;
        i_ = j;
        return true;
    }
    std::string qualified() {
        std::string c = ident();
        expect('.');
        return c + "." + ident();
    }
    // Text up to the next top-level stop character.
    std::string balanced(const std::string& stops) {
        ws();
        size_t j = i_;
        int depth = 0;
        while (j < s_.size()) {
            char c = s_[j];
            if (depth == 0 && stops.find(c) != std::string::npos) break;
            if (c == '(' || c == '[' || c == '{') ++depth;
            if (c == ')' || c == ']' || c == '}') {
                if (depth == 0) break;
                --depth;
            }
            ++j;
        }
        std::string r = s_.substr(i_, j - i_);
        i_ = j;
        return r;
    }
    FormulaPtr formula_text(const std::string& t) {
        try {
            return parse_formula(t);
        } catch (const LogicError& e) {
            fail(std::string("in formula '") + t + "': " + e.what());
        }
    }
    FormulaPtr formula_arg() {
        expect('(');
        auto f = formula_text(balanced(")"));
        expect(')');
        return f;
    }

    MTypePtr seq() {
        std::vector<MTypePtr> xs{postfix()};
        while (peek() == '.') {
            ++i_;
            xs.push_back(postfix());
        }
        return mt_seq(xs);
    }
    MTypePtr postfix() {
        MTypePtr a = prim();
        while (peek() == '*') {
            ++i_;
            a = mt_star(a);
        }
        return a;
    }
    MTypePtr prim() {
        char c = peek();
        if (c == '(') {
            ++i_;
            auto t = seq();
            expect(')');
            return t;
        }
        if (c == '+') {
            ++i_;
            expect('{');
            std::vector<MTypePtr> xs{seq()};
            while (peek() == ',') {
                ++i_;
                xs.push_back(seq());
            }
            expect('}');
            return mt_choice(std::move(xs));
        }
        if (c == '&') {
            ++i_;
            expect('(');
            std::vector<std::string> ms;
            bool any = false;
            if (peek() == '{') {
                ++i_;
                if (peek() != '}') {
                    ms.push_back(qualified());
                    while (peek() == ',') {
                        ++i_;
                        ms.push_back(qualified());
                    }
                }
                expect('}');
            } else if (keyword("M")) {
                any = true;
            } else {
                fail("expected method set or M");
            }
            expect(',');
            auto phi = formula_text(balanced(")"));
            expect(')');
            expect('{');
            auto l1 = seq();
            expect(',');
            auto l2 = seq();
            expect('}');
            return mt_branch(std::move(ms), any, phi, l1, l2);
        }
        if (keyword("skip")) return mt_skip();
        if (keyword("down")) return mt_term(formula_arg());
        std::string role = ident();
        expect('!');
        std::string m = qualified();
        return mt_call(role, m, formula_arg());
    }
};

}  // namespace

MTypePtr parse_mtype(const std::string& text) { return TypeParser(text).type_eof(); }
Protocol parse_protocol(const std::string& text) { return TypeParser(text).protocol(); }

// ---------------------------------------------------------------- spec files

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// Splits "head : rest" at the first top-level colon.
std::pair<std::string, std::string> split_colon(const std::string& s) {
    int depth = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (c == ':' && depth == 0) return {trim(s.substr(0, i)), trim(s.substr(i + 1))};
    }
    return {trim(s), ""};
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

// Position of a standalone keyword at depth 0.
size_t find_keyword(const std::string& s, const std::string& k) {
    int depth = 0;
    for (size_t i = 0; i + k.size() <= s.size(); ++i) {
        char c = s[i];
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (depth == 0 && s.compare(i, k.size(), k) == 0) {
            bool lb = i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1]));
            bool rb = i + k.size() == s.size() || !std::isalnum(static_cast<unsigned char>(s[i + k.size()]));
            if (lb && rb) return i;
        }
    }
    return std::string::npos;
}

}  // namespace

SpecFile parse_spec(const std::string& text, const std::string& file) {
    SpecFile sf;
    // strip comments, split at top-level ';' keeping start lines
    std::vector<std::pair<int, std::string>> stmts;
    std::string cur;
    int line = 1, start = 1, depth = 0;
    bool fresh = true;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
            while (i < text.size() && text[i] != '\n') ++i;
            if (i < text.size()) {
                ++line;
                cur += ' ';
            }
            continue;
        }
        if (c == '\n') ++line;
        if (fresh && !std::isspace(static_cast<unsigned char>(c))) {
            start = line;
            fresh = false;
        }
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (c == ';' && depth == 0) {
            stmts.emplace_back(start, trim(cur));
            cur.clear();
            fresh = true;
            continue;
        }
        cur += c;
    }
    if (!trim(cur).empty()) stmts.emplace_back(start, trim(cur));

    for (const auto& [ln, st] : stmts) {
        auto err = [&, ln = ln](const std::string& m) { return SpecError(file + ":" + std::to_string(ln) + ": " + m); };
        auto formula = [&](const std::string& t) {
            try {
                return parse_formula(t);
            } catch (const LogicError& e) {
                throw err(e.what());
            }
        };
        try {
            auto ws = words(st);
            if (ws.empty()) continue;
            const std::string& kw = ws[0];
            if (kw == "roles") {
                std::string rest = trim(st.substr(5));
                std::stringstream in(rest);
                std::string item;
                while (std::getline(in, item, ',')) {
                    auto arrow = item.find("->");
                    if (arrow == std::string::npos) throw err("role needs 'X -> this.f'");
                    std::string x = trim(item.substr(0, arrow));
                    std::string f = trim(item.substr(arrow + 2));
                    if (f.rfind("this.", 0) == 0) f = f.substr(5);
                    if (x.empty() || f.empty()) throw err("malformed role '" + trim(item) + "'");
                    sf.roles.push_back({x, f});
                }
            } else if (kw == "type") {
                auto [head, body] = split_colon(st.substr(4));
                Protocol p = parse_protocol(body);
                if (p.method != head) throw err("type for " + head + " receives " + p.method);
                if (sf.types.count(head)) throw err("duplicate type for " + head);
                sf.types[head] = p;
            } else if (kw == "invariant") {
                auto [head, body] = split_colon(st.substr(9));
                auto hw = words(head);
                if (hw.size() != 4 || hw[1] != "at" || (hw[2] != "loop" && hw[2] != "line"))
                    throw err("expected 'invariant C.m at loop N : phi' or 'at line N'");
                LoopInvariant li;
                li.method = hw[0];
                int n = std::stoi(hw[3]);
                (hw[2] == "loop" ? li.ordinal : li.line) = n;
                li.inv = formula(body);
                sf.loop_invariants.push_back(li);
            } else if (kw == "class") {
                auto [head, body] = split_colon(st.substr(5));
                auto hw = words(head);
                if (hw.size() != 2 || hw[0] != "invariant") throw err("expected 'class invariant C : phi'");
                sf.class_invariants[hw[1]] = formula(body);
            } else if (kw == "contract") {
                auto [head, body] = split_colon(st.substr(8));
                size_t r = find_keyword(body, "requires"), e = find_keyword(body, "ensures");
                if (r == std::string::npos || e == std::string::npos || e < r)
                    throw err("expected 'contract C.m : requires phi ensures psi'");
                Contract c;
                c.pre = formula(body.substr(r + 8, e - r - 8));
                c.post = formula(body.substr(e + 7));
                sf.contracts[head] = c;
            } else if (kw == "assume") {
                size_t e = find_keyword(st, "ensures");
                if (e == std::string::npos || ws.size() < 3) throw err("expected 'assume C.m ensures psi'");
                sf.assumptions[ws[1]] = formula(st.substr(e + 7));
            } else if (kw == "infer") {
                if (ws.size() != 2) throw err("expected 'infer C.m'");
                sf.infer.push_back(ws[1]);
            } else {
                throw err("unknown declaration '" + kw + "'");
            }
        } catch (const SpecError& e) {
            std::string m = e.what();
            if (m.rfind(file + ":", 0) == 0) throw;
            throw err(m);
        } catch (const std::invalid_argument&) {
            throw err("expected a number");
        }
    }
    return sf;
}

SpecFile load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str(), path);
}

TypeEnv TypeEnv::of(const Program& p, const std::vector<Role>& roles) {
    TypeEnv env;
    env.roles = roles;
    for (const auto& c : p.classes) {
        for (const auto& m : c.methods) {
            std::vector<std::string> ps;
            for (const auto& prm : m.params) ps.push_back(prm.name);
            env.params[m.qualified()] = ps;
            env.methods.push_back(m.qualified());
        }
    }
    return env;
}

// ---------------------------------------------------------------- translations

namespace {

const Sort kPos{Sort::Kind::Pos, ""};
const Sort kAny{Sort::Kind::Any, ""};

TermPtr var(const std::string& n) { return t_var(n); }
TermPtr plus(const std::string& n, long k) {
    return t_app(k >= 0 ? "+" : "-", {var(n), t_const(Value(k >= 0 ? k : -k))});
}

EvTerm evt(Event::Kind k, std::vector<TermPtr> args) {
    EvTerm e;
    e.kind = k;
    e.args = std::move(args);
    return e;
}

FormulaPtr non_noev(const std::string& p) {
    EvTerm no;
    return f_and(f_pred("isEvent", var(p)), f_not(f_evat(var(p), no)));
}

bool mentions_result(const FormulaPtr& f) { return mentions_var(f, "result"); }

class Alpha {
public:
    explicit Alpha(const TypeEnv& env) : env_(env) {}

    FormulaPtr top(const MTypePtr& L) {
        FormulaPtr body = go(L);
        std::set<std::string> used;
        collect_roles(L, used);
        for (auto it = used.rbegin(); it != used.rend(); ++it) {
            const Role* r = role(*it);
            FormulaPtr bind = f_stateat(t_const(Value(1)), f_eq(var(*it), t_field(r->field)));
            body = f_exists(*it, {Sort::Kind::Obj, ""}, f_and(bind, body));
        }
        return body;
    }

private:
    const TypeEnv& env_;
    int n_ = 0;

    std::string fresh(const std::string& base) { return base + "'" + std::to_string(++n_); }

    const Role* role(const std::string& x) const {
        for (const auto& r : env_.roles)
            if (r.name == x) return &r;
        throw SpecError("role " + x + " is not bound to a field");
    }
    static void collect_roles(const MTypePtr& L, std::set<std::string>& out) {
        if (L->kind == MType::Kind::Call) out.insert(L->role);
        for (const auto& s : L->sub) collect_roles(s, out);
    }

    // exactly one visible event, at position i
    FormulaPtr only_at(const std::string& i) {
        std::string j = fresh("j");
        return f_forall(j, kPos, f_implies(non_noev(j), f_eq(var(j), var(i))));
    }

    FormulaPtr go(const MTypePtr& L) {
        switch (L->kind) {
        case MType::Kind::Call: {
            auto it = env_.params.find(L->method);
            if (it == env_.params.end()) throw SpecError("unknown method " + L->method);
            std::string i = fresh("i");
            std::vector<std::string> es;
            std::map<std::string, TermPtr> sub;
            std::vector<TermPtr> args{t_wild(), var(L->role), t_wild(), t_method(L->method)};
            for (const auto& prm : it->second) {
                es.push_back(fresh("e"));
                sub[prm] = var(es.back());
                args.push_back(var(es.back()));
            }
            FormulaPtr body = f_and({f_evat(var(i), evt(Event::Kind::InvEv, args)),
                                     f_stateat(plus(i, -1), subst(L->phi, sub)), only_at(i)});
            for (size_t k = es.size(); k-- > 0;) body = f_exists(es[k], kAny, body);
            return f_exists(i, kPos, body);
        }
        case MType::Kind::Term: {
            std::string i = fresh("i"), e = fresh("e");
            FormulaPtr body = f_and({f_evat(var(i), evt(Event::Kind::FutEv, {t_wild(), t_wild(), t_wild(), var(e)})),
                                     f_stateat(plus(i, -1), subst(L->phi, {{"result", var(e)}})), only_at(i)});
            return f_exists(i, kPos, f_exists(e, kAny, body));
        }
        case MType::Kind::Skip: {
            std::string l = fresh("l");
            EvTerm no;
            return f_forall(l, kPos, f_or(f_evat(var(l), no), f_stateat(var(l), f_true())));
        }
        case MType::Kind::Choice: {
            std::vector<FormulaPtr> xs;
            for (const auto& s : L->sub) xs.push_back(go(s));
            return f_or(xs);
        }
        case MType::Kind::Seq: {
            std::string i = fresh("i"), n = fresh("n");
            FormulaPtr a = relativize(go(L->sub[0]), kPos, n, f_cmp("<=", var(n), var(i)));
            FormulaPtr b = relativize(go(L->sub[1]), kPos, n, f_cmp(">=", var(n), var(i)));
            return f_exists(i, kPos, f_and({f_pred("isState", var(i)), a, b}));
        }
        case MType::Kind::Star: {
            std::string X = fresh("X"), x = fresh("x"), a = fresh("a"), b = fresh("b"), p = fresh("p"), k = fresh("k"),
                        l = fresh("l"), m = fresh("m"), n = fresh("n");
            auto in = [&](const std::string& v) { return f_member(var(v), X); };
            FormulaPtr states = f_forall(x, kPos, f_implies(in(x), f_pred("isState", var(x))));
            FormulaPtr nonempty = f_exists(a, kPos, in(a));
            // visible events lie between the first and last element of X
            std::string a2 = fresh("a"), b2 = fresh("b");
            FormulaPtr covered = f_forall(
                p, kPos,
                f_implies(non_noev(p),
                          f_and(f_exists(a2, kPos, f_and(in(a2), f_cmp("<=", var(a2), var(p)))),
                                f_exists(b2, kPos, f_and(in(b2), f_cmp("<=", var(p), var(b2)))))));
            FormulaPtr between = f_exists(m, kPos, f_and({in(m), f_cmp("<", var(k), var(m)), f_cmp("<", var(m), var(l))}));
            FormulaPtr seg = relativize(go(L->sub[0]), kPos, n,
                                        f_and(f_cmp("<=", var(k), var(n)), f_cmp("<=", var(n), var(l))));
            FormulaPtr consecutive = f_forall(
                k, kPos,
                f_implies(in(k), f_forall(l, kPos,
                                          f_implies(in(l), f_implies(f_and(f_cmp("<", var(k), var(l)), f_not(between)),
                                                                     seg)))));
            (void)b;
            return f_exists_set(X, f_and({states, nonempty, covered, consecutive}));
        }
        case MType::Kind::Branch: {
            std::string j = fresh("j"), v = fresh("v"), m = fresh("m"), l = fresh("l"), n = fresh("n");
            FormulaPtr read = f_evat(var(j), evt(Event::Kind::FutREv, {t_wild(), t_wild(), var(m), var(v), t_wild()}));
            FormulaPtr from = f_true();
            if (!L->any_method) {
                std::vector<FormulaPtr> ms;
                for (const auto& x : L->methods) ms.push_back(f_eq(var(m), t_method(x)));
                from = f_or(ms);
            }
            EvTerm no;
            FormulaPtr first =
                f_forall(l, kPos, f_implies(f_and(f_cmp("<", var(l), var(j)), f_pred("isEvent", var(l))), f_evat(var(l), no)));
            FormulaPtr cond = f_stateat(plus(j, 1), subst(L->phi, {{"result", var(v)}}));
            FormulaPtr guard = f_cmp(">=", var(n), plus(j, 1));
            FormulaPtr b1 = relativize(go(L->sub[0]), kPos, n, guard);
            FormulaPtr b2 = relativize(go(L->sub[1]), kPos, n, guard);
            FormulaPtr body = f_and({read, from, first, f_implies(cond, b1), f_implies(f_not(cond), b2)});
            return f_exists(j, kPos, f_exists(v, kAny, f_exists(m, {Sort::Kind::Method, ""}, body)));
        }
        }
        return f_false();
    }
};

}  // namespace

FormulaPtr alpha_pst(const FormulaPtr& phi) {
    TermPtr last = t_var("last");
    if (!mentions_result(phi)) return f_stateat(last, phi);
    std::string v = "v'pst";
    FormulaPtr ev = f_evat(t_app("-", {last, t_const(Value(1))}),
                           evt(Event::Kind::FutEv, {t_wild(), t_wild(), t_wild(), t_var(v)}));
    return f_exists(v, kAny, f_and(ev, f_stateat(last, subst(phi, {{"result", t_var(v)}}))));
}

FormulaPtr alpha_p2(const std::set<std::string>& ms) {
    std::vector<FormulaPtr> alts;
    for (const auto& m : ms) alts.push_back(f_eq(t_var("m"), t_method(m)));
    FormulaPtr body = f_and(f_evat(t_const(Value(2)), evt(Event::Kind::FutREv, {t_var("X"), t_var("f"), t_var("m"),
                                                                                t_var("v"), t_var("i")})),
                            f_or(alts));
    body = f_exists("i", {Sort::Kind::Nat, ""}, body);
    body = f_exists("v", kAny, body);
    body = f_exists("m", {Sort::Kind::Method, ""}, body);
    body = f_exists("f", {Sort::Kind::Fut, ""}, body);
    return f_exists("X", {Sort::Kind::Obj, ""}, body);
}

FormulaPtr alpha_met(const MTypePtr& L, const TypeEnv& env) { return Alpha(env).top(L); }

LocalTrace after_receive(const LocalTrace& theta) {
    if (theta.hs.size() < 3) throw SpecError("trace has no receive event");
    auto* e = std::get_if<Event>(&theta.hs[1]);
    if (!e || e->kind != Event::Kind::InvREv) throw SpecError("trace does not start with invREv");
    return slice(theta, 3, theta.hs.size());
}

// ---------------------------------------------------------------- matcher

namespace {

Value gval(const SymPtr& s) {
    if (!s || !s->ground) throw SpecError("trace is not concrete");
    return s->val;
}

class Matcher {
public:
    Matcher(const LocalTrace& t, const TypeEnv& env, const EvalConfig& cfg) : t_(t), env_(env), cfg_(cfg) {
        for (size_t i = 0; i < t.hs.size(); ++i) {
            const HistElem& h = t.hs[i];
            if (is_state(h)) continue;
            if (auto* e = std::get_if<Event>(&h); e && e->kind == Event::Kind::NoEv) continue;
            sk_.push_back(i + 1);
        }
    }

    TV top(const MTypePtr& L) {
        const auto& first = std::get<ObjState>(t_.hs.front());
        std::set<std::string> used;
        collect(L, used);
        for (const auto& x : used) {
            const Role* r = nullptr;
            for (const auto& rr : env_.roles)
                if (rr.name == x) r = &rr;
            if (!r) throw SpecError("role " + x + " is not bound to a field");
            auto it = first.rho.find(r->field);
            if (it == first.rho.end()) return TV::False;  // no such field: the binding conjunct fails
            roles_[x] = gval(it->second);
        }
        return go(L, 0, sk_.size());
    }

private:
    const LocalTrace& t_;
    const TypeEnv& env_;
    const EvalConfig& cfg_;
    std::vector<size_t> sk_;  // 1-based positions of visible events
    std::map<std::string, Value> roles_;
    std::map<std::tuple<const MType*, size_t, size_t>, TV> memo_;

    static void collect(const MTypePtr& L, std::set<std::string>& out) {
        if (L->kind == MType::Kind::Call) out.insert(L->role);
        for (const auto& s : L->sub) collect(s, out);
    }

    const ObjState* state(size_t pos) const {
        if (pos < 1 || pos > t_.hs.size()) return nullptr;
        return std::get_if<ObjState>(&t_.hs[pos - 1]);
    }
    const Event* event(size_t k) const { return std::get_if<Event>(&t_.hs[sk_[k] - 1]); }

    TV fos(const FormulaPtr& phi, size_t pos, const Beta& b) {
        const ObjState* s = state(pos);
        if (!s) return TV::False;
        try {
            return eval_fos(phi, *s, b, cfg_);
        } catch (const LogicError&) {
            return TV::Unknown;
        }
    }

    TV go(const MTypePtr& L, size_t a, size_t b) {
        auto key = std::make_tuple(L.get(), a, b);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        TV r = compute(L, a, b);
        memo_[key] = r;
        return r;
    }

    TV compute(const MTypePtr& L, size_t a, size_t b) {
        switch (L->kind) {
        case MType::Kind::Skip: return a == b ? TV::True : TV::False;
        case MType::Kind::Call: {
            if (b != a + 1) return TV::False;
            const Event* e = event(a);
            if (!e || e->kind != Event::Kind::InvEv || e->method != L->method) return TV::False;
            if (!(gval(e->callee) == roles_.at(L->role))) return TV::False;
            const auto& ps = env_.params.at(L->method);
            if (ps.size() != e->args.size()) return TV::False;
            Beta beta;
            for (size_t k = 0; k < ps.size(); ++k) beta[ps[k]] = LVal::of(gval(e->args[k]));
            return fos(L->phi, sk_[a] - 1, beta);
        }
        case MType::Kind::Term: {
            if (b != a + 1) return TV::False;
            const Event* e = event(a);
            if (!e || e->kind != Event::Kind::FutEv) return TV::False;
            return fos(L->phi, sk_[a] - 1, {{"result", LVal::of(gval(e->val))}});
        }
        case MType::Kind::Choice: {
            TV r = TV::False;
            for (const auto& s : L->sub) {
                r = tv_or(r, go(s, a, b));
                if (r == TV::True) break;
            }
            return r;
        }
        case MType::Kind::Seq: {
            TV r = TV::False;
            for (size_t c = a; c <= b && r != TV::True; ++c) {
                TV x = go(L->sub[0], a, c);
                if (x == TV::False) continue;
                r = tv_or(r, tv_and(x, go(L->sub[1], c, b)));
            }
            return r;
        }
        case MType::Kind::Star: {
            if (a == b) return TV::True;
            TV r = TV::False;
            for (size_t c = a + 1; c <= b && r != TV::True; ++c) {
                TV x = go(L->sub[0], a, c);
                if (x == TV::False) continue;
                r = tv_or(r, tv_and(x, go(L, c, b)));
            }
            return r;
        }
        case MType::Kind::Branch: {
            if (a >= b) return TV::False;
            const Event* e = event(a);
            if (!e || e->kind != Event::Kind::FutREv) return TV::False;
            if (!L->any_method &&
                std::find(L->methods.begin(), L->methods.end(), e->method) == L->methods.end())
                return TV::False;
            TV c = fos(L->phi, sk_[a] + 1, {{"result", LVal::of(gval(e->val))}});
            TV t1 = c == TV::False ? TV::True : go(L->sub[0], a + 1, b);
            TV t2 = c == TV::True ? TV::True : go(L->sub[1], a + 1, b);
            return tv_and(tv_or(tv_not(c), t1), tv_or(c, t2));
        }
        }
        return TV::False;
    }
};

}  // namespace

TV match_trace(const LocalTrace& slice_, const MTypePtr& L, const TypeEnv& env, const EvalConfig& cfg) {
    if (slice_.hs.empty()) return TV::False;
    return Matcher(slice_, env, cfg).top(L);
}

MTypePtr normalize(const MTypePtr& L) {
    switch (L->kind) {
    case MType::Kind::Seq: {
        MTypePtr a = normalize(L->sub[0]), b = normalize(L->sub[1]);
        if (a->kind == MType::Kind::Skip) return b;
        if (b->kind == MType::Kind::Skip) return a;
        if (a == L->sub[0] && b == L->sub[1]) return L;
        return mt_seq(a, b);
    }
    case MType::Kind::Choice: {
        if (L->sub.size() == 1) return normalize(L->sub[0]);
        std::vector<MTypePtr> xs;
        bool same = true;
        for (const auto& s : L->sub) {
            xs.push_back(normalize(s));
            same = same && xs.back() == s;
        }
        return same ? L : mt_choice(std::move(xs));
    }
    case MType::Kind::Star: {
        MTypePtr a = normalize(L->sub[0]);
        return a == L->sub[0] ? L : mt_star(a);
    }
    case MType::Kind::Branch: {
        MTypePtr a = normalize(L->sub[0]), b = normalize(L->sub[1]);
        if (a == L->sub[0] && b == L->sub[1]) return L;
        return mt_branch(L->methods, L->any_method, L->phi, a, b);
    }
    default: return L;
    }
}

// ---------------------------------------------------------------- points-to

namespace {

struct PSet {
    bool top = false;
    std::set<std::string> ms;
    bool join(const PSet& o) {
        bool ch = false;
        if (o.top && !top) top = ch = true;
        for (const auto& m : o.ms) ch = ms.insert(m).second || ch;
        return ch;
    }
    bool operator==(const PSet& o) const { return top == o.top && ms == o.ms; }
};

using Env = std::map<std::string, PSet>;

class Analysis {
public:
    explicit Analysis(const Program& p) : p_(p) {}

    PointsTo run() {
        for (const auto& c : p_.classes)
            for (const auto& m : c.methods)
                for_each_stmt(m.body, [&](const Stmt& s) {
                    if (s.kind == Stmt::Kind::Get) sites_[s.pp];
                });
        bool changed = true;
        while (changed) {
            changed_ = false;
            for (const auto& c : p_.classes)
                for (const auto& m : c.methods) method(c, m);
            changed = changed_;
        }
        PointsTo out;
        std::set<std::string> all;
        for (const auto& c : p_.classes)
            for (const auto& m : c.methods) all.insert(m.qualified());
        for (const auto& [pp, s] : sites_) out.sites[pp] = s.top ? all : s.ms;
        return out;
    }

private:
    const Program& p_;
    std::map<std::pair<std::string, std::string>, PSet> fields_;  // (class, field)
    std::map<std::pair<std::string, std::string>, PSet> params_;  // (C.m, param)
    std::map<int, PSet> sites_;
    bool changed_ = false;
    const ClassDecl* cls_ = nullptr;

    void add(PSet& dst, const PSet& src) { changed_ = dst.join(src) || changed_; }

    static bool fut_typed(const DataType& t) { return t.kind == DataType::Kind::Fut; }
    static bool may_hold_fut(const DataType& t) {
        if (t.kind == DataType::Kind::Fut || t.kind == DataType::Kind::Any) return true;
        return t.kind == DataType::Kind::List && t.elem && may_hold_fut(*t.elem);
    }

    PSet eval(const Expr& e, const Env& env) {
        switch (e.kind) {
        case Expr::Kind::Lit: return {};
        case Expr::Kind::Var: {
            auto it = env.find(e.name);
            return it != env.end() ? it->second : PSet{};
        }
        case Expr::Kind::Field: return fields_[{cls_->name, e.name}];
        default: {
            // futures flowing through lists or other operators: give up precision
            PSet r;
            if (may_hold_fut(e.type)) r.top = true;
            return r;
        }
        }
    }

    void method(const ClassDecl& c, const MethodDecl& m) {
        cls_ = &c;
        Env env;
        for (const auto& prm : m.params) env[prm.name] = params_[{m.qualified(), prm.name}];
        block(m.body, env, m);
    }

    void block(const Block& b, Env& env, const MethodDecl& m) {
        for (const auto& sp : b) stmt(*sp, env, m);
    }

    void stmt(const Stmt& s, Env& env, const MethodDecl& m) {
        switch (s.kind) {
        case Stmt::Kind::Assign: env[s.var] = eval(*s.expr, env); break;
        case Stmt::Kind::FieldAssign: add(fields_[{cls_->name, s.field}], eval(*s.expr, env)); break;
        case Stmt::Kind::Get: {
            add(sites_[s.pp], eval(*s.expr, env));
            if (!s.var.empty()) {
                PSet r;
                const DataType* et = s.expr->type.elem.get();
                if (et && may_hold_fut(*et)) r.top = true;
                env[s.var] = r;
            }
            break;
        }
        case Stmt::Kind::Call: {
            std::string callee = s.callee_class + "." + s.method;
            const MethodDecl* cm = p_.find_method(callee);
            if (cm) {
                for (size_t i = 0; i < s.args.size() && i < cm->params.size(); ++i)
                    add(params_[{callee, cm->params[i].name}], eval(*s.args[i], env));
            }
            if (!s.var.empty()) env[s.var] = PSet{false, {callee}};
            break;
        }
        case Stmt::Kind::If: {
            Env e1 = env, e2 = env;
            block(s.then_b, e1, m);
            block(s.else_b, e2, m);
            env = e1;
            for (auto& [k, v] : e2) env[k].join(v);
            break;
        }
        case Stmt::Kind::While: {
            while (true) {
                Env body = env;
                block(s.body, body, m);
                bool grew = false;
                for (auto& [k, v] : body) grew = env[k].join(v) || grew;
                if (!grew) break;
            }
            break;
        }
        default: break;
        }
    }
};

}  // namespace

PointsTo points_to_all(const Program& p) { return Analysis(p).run(); }

std::set<std::string> points_to(const Program& p, int site) {
    PointsTo all = points_to_all(p);
    auto it = all.sites.find(site);
    if (it == all.sites.end()) throw SpecError("unknown get site " + std::to_string(site));
    return it->second;
}

nlohmann::json to_json(const PointsTo& pt) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [pp, ms] : pt.sites) j.push_back({{"site", pp}, {"methods", ms}});
    return j;
}

}  // namespace cao
