#pragma once

// Random instances and brute-force oracles shared by the property tests and the acceptance run.

#include "cao/bpl.hpp"
#include "cao/btypes.hpp"
#include "cao/frontend.hpp"
#include "cao/local.hpp"

#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace gen {

using Rng = std::mt19937_64;

inline int pick(Rng& r, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(r); }
inline bool coin(Rng& r, double p = 0.5) { return std::bernoulli_distribution(p)(r); }

// ---- method types against the two-callee protocol (roles S, L; Comp.cmp(data), Log.log(msg)) ----

inline const char* kProtocolProgram = R"(class Comp() {
  Int cmp(Int data) { return data; }
}
class Log() {
  Int log(Int msg) { return msg; }
}
class T(Comp S, Log L) {
  Int n = 0;
  Int test(Int x) { return x; }
}
main { Comp c = Comp(); Log l = Log(); T t = T(c, l); t!test(1); }
)";

struct Protocol2 {
    cao::Program prog = cao::load_program(kProtocolProgram);
    cao::TypeEnv env = cao::TypeEnv::of(prog, {{"S", "S"}, {"L", "L"}});
};

inline std::string small(Rng& r) { return std::to_string(pick(r, -1, 3)); }

inline cao::FormulaPtr call_phi(Rng& r, const std::string& param) {
    switch (pick(r, 0, 4)) {
    case 0: return cao::f_true();
    case 1: return cao::parse_formula(param + " >= " + small(r));
    case 2: return cao::parse_formula(param + " = x");
    case 3: return cao::parse_formula("this.n <= " + small(r));
    default: return cao::parse_formula(param + " < x + " + small(r));
    }
}
inline cao::FormulaPtr result_phi(Rng& r) {
    switch (pick(r, 0, 3)) {
    case 0: return cao::f_true();
    case 1: return cao::parse_formula("result >= " + small(r));
    case 2: return cao::parse_formula("result < x");
    default: return cao::parse_formula("x <= " + small(r) + " | result = 0");
    }
}

inline cao::MTypePtr random_type(Rng& r, int depth) {
    using namespace cao;
    int k = depth <= 1 ? pick(r, 0, 2) : pick(r, 0, 6);
    switch (k) {
    case 0: return coin(r) ? mt_call("S", "Comp.cmp", call_phi(r, "data")) : mt_call("L", "Log.log", call_phi(r, "msg"));
    case 1: return mt_term(result_phi(r));
    case 2: return mt_skip();
    case 3: return mt_seq(random_type(r, depth - 1), random_type(r, depth - 1));
    case 4: return mt_star(random_type(r, depth - 1));
    case 5: {
        std::vector<MTypePtr> xs;
        int n = pick(r, 1, 3);
        for (int i = 0; i < n; ++i) xs.push_back(random_type(r, depth - 1));
        return mt_choice(xs);
    }
    default: {
        int w = pick(r, 0, 2);
        std::vector<std::string> ms = w == 0 ? std::vector<std::string>{"Comp.cmp"}
                                      : w == 1 ? std::vector<std::string>{"Log.log"}
                                               : std::vector<std::string>{};
        return mt_branch(ms, w == 2, result_phi(r), random_type(r, depth - 1), random_type(r, depth - 1));
    }
    }
}

class TraceBuilder {
public:
    explicit TraceBuilder(Rng& r) : r_(r) { push_state(); }

    void event(cao::Event e) {
        t_.hs.push_back(std::move(e));
        push_state();
    }
    void noise() {
        if (coin(r_, 0.2)) event(cao::Event::noev());
    }
    cao::SymPtr obj(const std::string& n) { return cao::s_val(cao::Value::object(n)); }
    cao::SymPtr num(int v) { return cao::s_val(cao::Value(v)); }
    cao::SymPtr fut(int f) { return cao::s_val(cao::Value::future(static_cast<uint64_t>(f))); }

    // Walks the type, occasionally taking a wrong turn so that roughly half the traces do not match.
    void walk(const cao::MTypePtr& L) {
        using K = cao::MType::Kind;
        noise();
        switch (L->kind) {
        case K::Call: {
            cao::Event e;
            e.kind = cao::Event::Kind::InvEv;
            e.obj = obj("X");
            bool s = L->role == "S";
            if (coin(r_, 0.1)) s = !s;
            e.callee = obj(s ? "X1" : "X2");
            e.fut = fut(++futs_);
            e.method = L->method;
            if (coin(r_, 0.1)) e.method = L->method == "Comp.cmp" ? "Log.log" : "Comp.cmp";
            e.args = {num(pick(r_, -1, 3))};
            event(e);
            break;
        }
        case K::Term: {
            cao::Event e;
            e.kind = cao::Event::Kind::FutEv;
            e.obj = obj("X");
            e.fut = fut(100);
            e.method = "T.test";
            e.val = num(pick(r_, -1, 3));
            event(e);
            break;
        }
        case K::Skip:
            if (coin(r_, 0.05)) walk(cao::mt_term(cao::f_true()));
            break;
        case K::Seq:
            walk(L->sub[0]);
            walk(L->sub[1]);
            break;
        case K::Star: {
            int n = pick(r_, 0, 2);
            for (int i = 0; i < n; ++i) walk(L->sub[0]);
            break;
        }
        case K::Choice: walk(L->sub[static_cast<size_t>(pick(r_, 0, static_cast<int>(L->sub.size()) - 1))]); break;
        case K::Branch: {
            cao::Event e;
            e.kind = cao::Event::Kind::FutREv;
            e.obj = obj("X");
            e.fut = fut(pick(r_, 1, 3));
            e.method = L->any_method || coin(r_, 0.1) ? (coin(r_) ? "Comp.cmp" : "Log.log") : L->methods[0];
            e.val = num(pick(r_, -1, 3));
            e.pp = pick(r_, 0, 2);
            event(e);
            walk(L->sub[static_cast<size_t>(pick(r_, 0, 1))]);
            break;
        }
        }
    }

    const cao::LocalTrace& trace() const { return t_; }

private:
    Rng& r_;
    cao::LocalTrace t_;
    int futs_ = 0;

    void push_state() {
        cao::ObjState s;
        s.sigma["x"] = num(pick(r_, 0, 3));
        s.rho["S"] = obj("X1");
        s.rho["L"] = obj("X2");
        s.rho["n"] = num(pick(r_, 0, 3));
        t_.hs.push_back(s);
    }
};

// A slice of at most max_len positions shaped after L, or nullopt when the walk is too long.
inline std::optional<cao::LocalTrace> trace_for(Rng& r, const cao::MTypePtr& L, size_t max_len = 16) {
    TraceBuilder b(r);
    b.walk(L);
    if (b.trace().hs.size() > max_len) return std::nullopt;
    return b.trace();
}

// ---- straight-line await-free programs over bounded integers ----

struct Hoare {
    std::string source;
    cao::FormulaPtr pre, post;
};

inline std::string lin(Rng& r) {
    static const char* vs[] = {"x", "y", "t", "s", "this.f"};
    std::string a = vs[pick(r, 0, 4)];
    switch (pick(r, 0, 4)) {
    case 0: return a;
    case 1: return a + " + " + std::to_string(pick(r, 0, 3));
    case 2: return a + " - " + vs[pick(r, 0, 4)];
    case 3: return "2 * " + a;
    default: return a + " + " + vs[pick(r, 0, 4)];
    }
}
inline std::string cond(Rng& r) {
    static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
    return lin(r) + " " + ops[pick(r, 0, 5)] + " " + lin(r);
}
inline std::string assign(Rng& r) {
    static const char* lhs[] = {"t", "s", "this.f"};
    return std::string(lhs[pick(r, 0, 2)]) + " = " + lin(r) + ";";
}

inline cao::FormulaPtr random_post(Rng& r) {
    static const char* terms[] = {"x", "y", "t", "s", "this.f", "result"};
    static const char* ops[] = {"<", "<=", ">", ">=", "=", "!="};
    auto atom = [&] {
        std::string a = terms[pick(r, 0, 5)];
        std::string b = coin(r) ? std::string(terms[pick(r, 0, 5)]) : std::to_string(pick(r, -2, 8));
        if (coin(r, 0.3)) b += " + " + std::to_string(pick(r, 0, 4));
        return a + " " + ops[pick(r, 0, 5)] + " " + b;
    };
    std::string s = atom();
    int n = pick(r, 0, 2);
    for (int i = 0; i < n; ++i) s = "(" + s + ")" + (coin(r) ? " & " : " | ") + "(" + atom() + ")";
    return cao::parse_formula(s);
}

inline Hoare random_hoare(Rng& r, bool allow_if = true) {
    std::ostringstream body;
    int n = pick(r, 1, 5);
    for (int i = 0; i < n; ++i) {
        if (allow_if && coin(r, 0.25)) {
            body << "    if (" << cond(r) << ") { " << assign(r) << " } else { " << assign(r) << " }\n";
        } else {
            body << "    " << assign(r) << "\n";
        }
    }
    std::ostringstream src;
    src << "class G() {\n  Int f = 0;\n  Int m(Int x, Int y) {\n    Int t = 0;\n    Int s = 0;\n"
        << body.str() << "    return t;\n  }\n}\nmain { G g = G(); g!m(0, 0); }\n";
    Hoare h;
    h.source = src.str();
    h.pre = cao::parse_formula("x >= 0 & x <= 4 & y >= 0 & y <= 4 & this.f >= 0 & this.f <= 4");
    h.post = random_post(r);
    return h;
}

// Runs the body on every input in 0..4 and evaluates the post on the final state.
// True: the triple holds everywhere; False: a counterexample exists; nullopt: evaluation failed.
inline std::optional<bool> brute_force(const cao::Program& p, const cao::FormulaPtr& post) {
    const cao::ClassDecl& c = p.classes.at(0);
    const cao::MethodDecl& m = c.methods.at(0);
    for (int x = 0; x <= 4; ++x)
        for (int y = 0; y <= 4; ++y)
            for (int f = 0; f <= 4; ++f) {
                cao::Heap rho{{"f", cao::s_val(cao::Value(f))}};
                cao::ObjState st = cao::entry_state(m, {cao::s_val(cao::Value(x)), cao::s_val(cao::Value(y))}, rho);
                cao::FreshGen g;
                auto ts = cao::stmt_traces(p, c, m, m.body, cao::s_val(cao::Value::object("G")),
                                           cao::s_val(cao::Value::future(1)), st, g);
                if (ts.size() != 1) return std::nullopt;
                const auto& t = ts[0];
                const cao::Event* last = nullptr;
                for (const auto& h : t.hs)
                    if (auto* e = std::get_if<cao::Event>(&h); e && e->kind == cao::Event::Kind::FutEv) last = e;
                if (!last || !last->val->ground) return std::nullopt;
                cao::Beta b{{"result", cao::LVal::of(last->val->val)}};
                cao::TV v;
                try {
                    v = cao::eval_fos(post, t.last(), b);
                } catch (const cao::LogicError&) {
                    return std::nullopt;
                }
                if (v == cao::TV::Unknown) return std::nullopt;
                if (v == cao::TV::False) return false;
            }
    return true;
}

// ---- verification conditions over bounded integer variables ----

struct Vc {
    std::vector<cao::FormulaPtr> gamma;
    cao::FormulaPtr phi;
    cao::SortMap sorts;
};

inline Vc random_vc(Rng& r) {
    static const char* vs[] = {"a", "b", "c"};
    static const char* ops[] = {"<", "<=", ">", ">=", "=", "!="};
    auto term = [&] {
        std::string s = vs[pick(r, 0, 2)];
        switch (pick(r, 0, 3)) {
        case 0: return s;
        case 1: return s + " + " + vs[pick(r, 0, 2)];
        case 2: return s + " - " + std::to_string(pick(r, 0, 3));
        default: return std::to_string(pick(r, -1, 5));
        }
    };
    auto atom = [&] { return term() + " " + ops[pick(r, 0, 5)] + " " + term(); };
    auto formula = [&] {
        std::string s = atom();
        int n = pick(r, 0, 2);
        for (int i = 0; i < n; ++i) {
            std::string c = pick(r, 0, 2) == 0 ? " -> " : coin(r) ? " & " : " | ";
            s = "(" + s + ")" + c + "(" + atom() + ")";
        }
        if (coin(r, 0.2)) s = "!(" + s + ")";
        return s;
    };
    Vc v;
    for (const char* x : vs) {
        v.gamma.push_back(cao::parse_formula(std::string(x) + " >= 0 & " + x + " <= 4"));
        v.sorts[x] = {cao::Sort::Kind::Int, ""};
    }
    int n = pick(r, 0, 2);
    for (int i = 0; i < n; ++i) v.gamma.push_back(cao::parse_formula(formula()));
    v.phi = cao::parse_formula(formula());
    return v;
}

// Enumerates a, b, c in 0..4: true if gamma -> phi holds everywhere.
inline std::optional<bool> brute_force(const Vc& v) {
    cao::ObjState none;
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; b <= 4; ++b)
            for (int c = 0; c <= 4; ++c) {
                cao::Beta beta{{"a", cao::LVal::of(cao::Value(a))},
                               {"b", cao::LVal::of(cao::Value(b))},
                               {"c", cao::LVal::of(cao::Value(c))}};
                cao::TV g = cao::TV::True;
                for (const auto& h : v.gamma) g = cao::tv_and(g, cao::eval_fos(h, none, beta));
                if (g == cao::TV::Unknown) return std::nullopt;
                if (g == cao::TV::False) continue;
                cao::TV p = cao::eval_fos(v.phi, none, beta);
                if (p == cao::TV::Unknown) return std::nullopt;
                if (p == cao::TV::False) return false;
            }
    return true;
}

}  // namespace gen
