#include "cao/local.hpp"

#include "cao/frontend.hpp"

namespace cao {

Heap rho_id(const ClassDecl& c, int k, const Heap& refs) {
    Heap h;
    for (const auto& r : c.params) {
        auto it = refs.find(r.name);
        h[r.name] = it != refs.end() ? it->second : s_val(Value::object(r.name));
    }
    for (const auto& f : c.fields) h[f.name] = s_field(f.name, k);
    return h;
}

Heap initial_heap(const ClassDecl& c, const std::map<std::string, std::string>& refs) {
    Heap h;
    for (const auto& r : c.params) {
        auto it = refs.find(r.name);
        h[r.name] = s_val(Value::object(it != refs.end() ? it->second : r.name));
    }
    ObjState empty;
    for (const auto& f : c.fields) {
        SymPtr v = f.init ? eval_expr(*f.init, empty) : nullptr;
        h[f.name] = v && v->ground ? v : s_val(default_value(f.type));
    }
    return h;
}

ObjState entry_state(const MethodDecl& m, const std::vector<SymPtr>& args, const Heap& rho) {
    ObjState s;
    s.rho = rho;
    for (size_t i = 0; i < m.params.size(); ++i) s.sigma[m.params[i].name] = i < args.size() ? args[i] : s_val(Value());
    for (const auto& l : method_locals(m)) s.sigma[l.name] = s_val(default_value(l.type));
    return s;
}

namespace {

struct Frame {
    const Block* b;
    size_t i;
};

struct Cursor {
    std::vector<Frame> stack;
    LocalTrace tr;
    std::map<const Stmt*, int> unrolls;
    const ObjState& state() const { return tr.last(); }
};

class Gen {
public:
    Gen(const Program& p, const ClassDecl& c, const MethodDecl& m, SymPtr X, SymPtr fut, FreshGen& gen,
        const LocalOptions& opt, LocalDiag* diag)
        : c_(c), m_(m), X_(std::move(X)), fut_(std::move(fut)), gen_(gen), opt_(opt), diag_(diag) {
        (void)p;
    }

    std::vector<LocalTrace> run(Cursor start) {
        std::vector<LocalTrace> out;
        std::vector<Cursor> work;
        work.push_back(std::move(start));
        while (!work.empty()) {
            Cursor cur = std::move(work.back());
            work.pop_back();
            step(std::move(cur), work, out);
        }
        return out;
    }

private:
    const ClassDecl& c_;
    const MethodDecl& m_;
    SymPtr X_, fut_;
    FreshGen& gen_;
    const LocalOptions& opt_;
    LocalDiag* diag_;

    Event ev(Event::Kind k) const {
        Event e;
        e.kind = k;
        e.obj = X_;
        e.fut = fut_;
        return e;
    }

    void stuck(const Stmt& s, const std::string& what) {
        if (diag_) diag_->stuck.push_back(m_.qualified() + ":" + std::to_string(s.loc.line) + ": undefined " + what);
    }

    static void push(Cursor& c, Event e, ObjState s) {
        c.tr.hs.emplace_back(std::move(e));
        c.tr.hs.emplace_back(std::move(s));
    }

    // Runs cur until it finishes (pushed to out), branches (pushed to work) or dies.
    void step(Cursor cur, std::vector<Cursor>& work, std::vector<LocalTrace>& out) {
        while (true) {
            if (cur.stack.empty()) {
                out.push_back(std::move(cur.tr));
                return;
            }
            Frame& fr = cur.stack.back();
            if (fr.i >= fr.b->size()) {
                cur.stack.pop_back();
                continue;
            }
            const Stmt& s = *(*fr.b)[fr.i];
            const ObjState st = cur.state();
            switch (s.kind) {
            case Stmt::Kind::Skip: ++fr.i; break;
            case Stmt::Kind::Assign:
            case Stmt::Kind::FieldAssign: {
                SymPtr v = eval_expr(*s.expr, st);
                if (!v) return stuck(s, "expression " + print_expr(*s.expr));
                ObjState n = st;
                if (s.kind == Stmt::Kind::Assign) {
                    n.sigma[s.var] = v;
                } else {
                    n.rho[s.field] = v;
                }
                ++fr.i;
                push(cur, Event::noev(), std::move(n));
                break;
            }
            case Stmt::Kind::Get: {
                SymPtr f = eval_expr(*s.expr, st);
                if (!f) return stuck(s, "future " + print_expr(*s.expr));
                SymPtr v = gen_.fresh(s.var.empty() ? "v" : s.var);
                Event e = ev(Event::Kind::FutREv);
                e.fut = f;
                e.val = v;
                e.pp = s.pp;
                ObjState n = st;
                if (!s.var.empty()) n.sigma[s.var] = v;
                ++fr.i;
                push(cur, std::move(e), std::move(n));
                break;
            }
            case Stmt::Kind::Call: {
                SymPtr target = st.rho.count(s.target) ? st.rho.at(s.target) : nullptr;
                if (!target) return stuck(s, "call target " + s.target);
                Event e = ev(Event::Kind::InvEv);
                e.callee = target;
                e.method = s.callee_class + "." + s.method;
                for (const auto& a : s.args) {
                    SymPtr v = eval_expr(*a, st);
                    if (!v) return stuck(s, "argument " + print_expr(*a));
                    e.args.push_back(v);
                }
                SymPtr f = gen_.fresh(s.var.empty() ? "fut" : s.var);
                e.fut = f;
                ObjState n = st;
                if (!s.var.empty()) n.sigma[s.var] = f;
                ++fr.i;
                push(cur, std::move(e), std::move(n));
                break;
            }
            case Stmt::Kind::Await: {
                Event e = ev(s.await_future ? Event::Kind::SuspEv : Event::Kind::CondEv);
                e.pp = s.pp;
                if (s.await_future) {
                    e.val = eval_expr(*s.expr, st);
                    if (!e.val) return stuck(s, "guard " + print_expr(*s.expr));
                } else {
                    e.guard = s.expr;
                }
                Event r = e;
                r.kind = s.await_future ? Event::Kind::SuspREv : Event::Kind::CondREv;
                int j = gen_.fresh_heap();
                Heap refs;
                for (const auto& p : c_.params) refs[p.name] = st.rho.at(p.name);
                ObjState fresh{st.sigma, rho_id(c_, j, refs)};
                push(cur, std::move(e), st);
                cur.tr.hs.emplace_back(Diamond{});
                cur.tr.hs.emplace_back(fresh);
                push(cur, std::move(r), fresh);
                ++fr.i;
                break;
            }
            case Stmt::Kind::Return: {
                SymPtr v = eval_expr(*s.expr, st);
                if (!v) return stuck(s, "result " + print_expr(*s.expr));
                Event e = ev(Event::Kind::FutEv);
                e.method = m_.qualified();
                e.val = v;
                push(cur, std::move(e), st);
                out.push_back(std::move(cur.tr));
                return;
            }
            case Stmt::Kind::If:
            case Stmt::Kind::While: {
                SymPtr c = eval_expr(*s.expr, st);
                if (!c) return stuck(s, "condition " + print_expr(*s.expr));
                bool loop = s.kind == Stmt::Kind::While;
                // else branch first on the work stack so the then branch is produced first
                for (int branch = 1; branch >= 0; --branch) {
                    SymPtr cond = branch == 0 ? c : s_unary("!", c);
                    if (opt_.prune_false && is_false(cond)) continue;
                    Cursor nc = cur;
                    if (!is_true(cond)) nc.tr.sc.insert(cond);
                    nc.tr.path += branch == 0 ? 'T' : 'F';
                    Frame& nf = nc.stack.back();
                    if (loop) {
                        if (branch == 0) {
                            if (++nc.unrolls[&s] > opt_.unroll) {
                                if (diag_) diag_->budget_exhausted = true;
                                continue;
                            }
                            nc.stack.push_back({&s.body, 0});
                        } else {
                            nc.unrolls.erase(&s);
                            ++nf.i;
                        }
                    } else {
                        ++nf.i;
                        nc.stack.push_back({branch == 0 ? &s.then_b : &s.else_b, 0});
                    }
                    work.push_back(std::move(nc));
                }
                return;
            }
            }
        }
    }
};

}  // namespace

std::vector<LocalTrace> stmt_traces(const Program& p, const ClassDecl& c, const MethodDecl& m, const Block& b, SymPtr X,
                                    SymPtr fut, const ObjState& st, FreshGen& gen, const LocalOptions& opt,
                                    LocalDiag* diag) {
    Gen g(p, c, m, std::move(X), std::move(fut), gen, opt, diag);
    Cursor start;
    start.stack.push_back({&b, 0});
    start.tr = singleton(st);
    return g.run(std::move(start));
}

std::vector<LocalTrace> method_traces(const Program& p, const ClassDecl& c, const MethodDecl& m, SymPtr X, SymPtr fut,
                                      const ObjState& st, FreshGen& gen, const LocalOptions& opt, LocalDiag* diag) {
    Event inv;
    inv.kind = Event::Kind::InvREv;
    inv.obj = X;
    inv.fut = fut;
    inv.method = m.qualified();
    for (const auto& prm : m.params) inv.args.push_back(st.sigma.at(prm.name));
    Gen g(p, c, m, std::move(X), std::move(fut), gen, opt, diag);
    Cursor start;
    start.stack.push_back({&m.body, 0});
    start.tr = singleton(st);
    start.tr.hs.emplace_back(std::move(inv));
    start.tr.hs.emplace_back(st);
    return g.run(std::move(start));
}

std::vector<LocalTrace> symbolic_method_traces(const Program& p, const ClassDecl& c, const MethodDecl& m,
                                               FreshGen& gen, const LocalOptions& opt, LocalDiag* diag) {
    SymPtr X = gen.fresh("X");
    SymPtr fut = gen.fresh("f");
    Heap refs;
    for (const auto& r : c.params) refs[r.name] = gen.fresh(r.name);
    std::vector<SymPtr> args;
    for (const auto& prm : m.params) args.push_back(gen.fresh(prm.name));
    ObjState st = entry_state(m, args, rho_id(c, gen.fresh_heap(), refs));
    return method_traces(p, c, m, X, fut, st, gen, opt, diag);
}

}  // namespace cao
