// Method-type calculus: symbolic execution of a method body against its type,
// with updates for assignments and verification conditions at the leaves.
#include "cao/bpl.hpp"

#include "cao/frontend.hpp"

#include <algorithm>
#include <functional>

namespace cao {

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Proved: return "proved";
    case Verdict::Refuted: return "refuted-candidate";
    case Verdict::Unknown: return "unknown";
    }
    return "?";
}

namespace {

using Items = std::vector<MTypePtr>;
using Stmts = std::vector<const Stmt*>;

void flatten_into(const MTypePtr& L, Items& out) {
    if (L->kind == MType::Kind::Seq) {
        flatten_into(L->sub[0], out);
        flatten_into(L->sub[1], out);
    } else if (L->kind != MType::Kind::Skip) {
        out.push_back(L);
    }
}
Items flatten(const MTypePtr& L) {
    Items r;
    flatten_into(normalize(L), r);
    return r;
}
MTypePtr type_of(const Items& it) { return it.empty() ? mt_skip() : mt_seq(it); }
Items concat(Items a, const Items& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// A choice or branch followed by more protocol takes the rest into each alternative.
Items distribute(Items it) {
    if (it.size() < 2) return it;
    const MTypePtr& h = it[0];
    Items rest(it.begin() + 1, it.end());
    if (h->kind == MType::Kind::Choice) {
        std::vector<MTypePtr> alts;
        for (const auto& a : h->sub) alts.push_back(type_of(concat(flatten(a), rest)));
        return {mt_choice(alts)};
    }
    if (h->kind == MType::Kind::Branch) {
        return {mt_branch(h->methods, h->any_method, h->phi, type_of(concat(flatten(h->sub[0]), rest)),
                          type_of(concat(flatten(h->sub[1]), rest)))};
    }
    return it;
}

std::string args_text(const std::vector<ExprPtr>& xs) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + print_expr(*xs[i]);
    return s;
}

std::string stmt_head(const Stmt& s) {
    std::string lhs = s.var.empty() ? "" : s.var + " = ";
    switch (s.kind) {
    case Stmt::Kind::Skip: return "skip";
    case Stmt::Kind::Assign: return lhs + print_expr(*s.expr);
    case Stmt::Kind::FieldAssign: return "this." + s.field + " = " + print_expr(*s.expr);
    case Stmt::Kind::Get: return lhs + print_expr(*s.expr) + ".get_" + std::to_string(s.pp);
    case Stmt::Kind::Call: return lhs + s.target + "!" + s.method + "(" + args_text(s.args) + ")";
    case Stmt::Kind::Await: return "await_" + std::to_string(s.pp) + " " + print_expr(*s.expr) + (s.await_future ? "?" : "");
    case Stmt::Kind::Return: return "return " + print_expr(*s.expr);
    case Stmt::Kind::If: return "if (" + print_expr(*s.expr) + ") ...";
    case Stmt::Kind::While: return "while (" + print_expr(*s.expr) + ") ...";
    }
    return "?";
}

std::string gamma_text(const std::vector<FormulaPtr>& g) {
    std::string s;
    for (size_t i = 0; i < g.size(); ++i) s += (i ? ", " : "") + to_string(g[i]);
    return s.empty() ? "." : s;
}

Sort parse_sort(const std::string& s) {
    static const std::map<std::string, Sort::Kind> k = {
        {"Int", Sort::Kind::Int},   {"Rat", Sort::Kind::Rat},     {"Bool", Sort::Kind::Bool}, {"N", Sort::Kind::Nat},
        {"I", Sort::Kind::Pos},     {"Fut", Sort::Kind::Fut},     {"O", Sort::Kind::Obj},     {"M", Sort::Kind::Method},
        {"Any", Sort::Kind::Any},   {"List", Sort::Kind::List},   {"Heap", Sort::Kind::Heap}, {"Unit", Sort::Kind::Unit}};
    auto it = k.find(s);
    if (it != k.end()) return {it->second, ""};
    return {Sort::Kind::Obj, s};
}

Verdict all_of(const std::vector<ProofNode>& xs) {
    bool unknown = false;
    for (const auto& x : xs) {
        if (x.status == Verdict::Refuted) return Verdict::Refuted;
        if (x.status == Verdict::Unknown) unknown = true;
    }
    return unknown ? Verdict::Unknown : Verdict::Proved;
}
Verdict any_of(const std::vector<ProofNode>& xs) {
    bool unknown = false;
    for (const auto& x : xs) {
        if (x.status == Verdict::Proved) return Verdict::Proved;
        if (x.status == Verdict::Unknown) unknown = true;
    }
    return unknown ? Verdict::Unknown : Verdict::Refuted;
}

struct PState {
    std::vector<FormulaPtr> gamma;
    Update U;
};

class Prover {
public:
    Prover(const Program& p, const ClassDecl& c, const MethodDecl& m, const Scheme* s) : p_(p), c_(c), m_(m), s_(s) {
        for (const auto& prm : m.params) sorts_[prm.name] = sort_of(prm.type);
        for_each_stmt(m.body, [&](const Stmt& st) {
            if (st.is_decl) sorts_[st.var] = sort_of(st.decl_type);
        });
        for (const auto& f : c.fields) sorts_["@" + f.name] = sort_of(f.type);
        for (const auto& r : c.params) sorts_["@" + r.name] = sort_of(r.type);
        sorts_["result"] = sort_of(m.ret);
        sorts_["heap"] = {Sort::Kind::Heap, ""};
        int ord = 0;
        std::function<void(const Block&)> walk = [&](const Block& b) {
            for (const auto& st : b) {
                if (st->kind == Stmt::Kind::While) ordinal_[st.get()] = ++ord;
                walk(st->then_b);
                walk(st->else_b);
                walk(st->body);
            }
        };
        walk(m.body);
    }

    Stmts body() const { return block(m_.body, {}); }

    static Stmts block(const Block& b, const Stmts& rest) {
        Stmts r;
        for (const auto& s : b) r.push_back(s.get());
        r.insert(r.end(), rest.begin(), rest.end());
        return r;
    }

    ProofNode met(PState st, const Stmts& ss, size_t i, Items L) {
        L = distribute(std::move(L));
        while (i < ss.size() && ss[i]->kind == Stmt::Kind::Skip && i + 1 < ss.size()) ++i;
        ProofNode n;
        n.sequent = sequent(st, ss, i, type_of(L));
        if (i == ss.size() || ss[i]->kind == Stmt::Kind::Skip) {
            if (L.empty()) return leaf(n, "met-skip", Verdict::Proved, "");
            if (L[0]->kind == MType::Kind::Choice) return choice(n, st, ss, i, L[0]);
            return leaf(n, "met-skip", Verdict::Refuted, "statement ends but the type expects " + to_string(type_of(L)));
        }
        const Stmt& s = *ss[i];
        if (!L.empty() && L[0]->kind == MType::Kind::Choice && s.kind != Stmt::Kind::If) return choice(n, st, ss, i, L[0]);
        switch (s.kind) {
        case Stmt::Kind::Skip: break;
        case Stmt::Kind::Assign: {
            st.U = upd_seq(st.U, upd_assign(s.var, term_of_expr(*s.expr)));
            return wrap(n, "met-V", {met(std::move(st), ss, i + 1, std::move(L))});
        }
        case Stmt::Kind::FieldAssign: {
            st.U = upd_seq(st.U, upd_assign("heap", t_app("store", {t_var("heap"), field_name(s.field), term_of_expr(*s.expr)})));
            return wrap(n, "met-F", {met(std::move(st), ss, i + 1, std::move(L))});
        }
        case Stmt::Kind::Call: return call(n, std::move(st), ss, i, std::move(L));
        case Stmt::Kind::Get: return get(n, std::move(st), ss, i, std::move(L));
        case Stmt::Kind::If: return branch_if(n, std::move(st), ss, i, std::move(L));
        case Stmt::Kind::While: return loop(n, std::move(st), ss, i, std::move(L));
        case Stmt::Kind::Return: {
            if (L.size() != 1 || L[0]->kind != MType::Kind::Term)
                return leaf(n, "met-return", Verdict::Refuted,
                            "return but the type expects " + (L.empty() ? std::string("nothing") : to_string(type_of(L))));
            FormulaPtr goal = apply_update(st.U, subst(L[0]->phi, {{"result", term_of_expr(*s.expr)}}));
            return wrap(n, "met-return", {vc("met-return", st.gamma, goal)});
        }
        case Stmt::Kind::Await:
            return leaf(n, "met-await", Verdict::Unknown, "await is not covered by the method-type rules");
        }
        return leaf(n, "met", Verdict::Unknown, "unhandled statement");
    }

    ProofNode pst(PState st, const Stmts& ss, size_t i, const FormulaPtr& post) {
        while (i < ss.size() && ss[i]->kind == Stmt::Kind::Skip) ++i;
        ProofNode n;
        n.sequent = gamma_text(st.gamma) + " ==> " + to_string(st.U) + "[" + (i < ss.size() ? stmt_head(*ss[i]) : "skip") +
                    " ~>pst " + to_string(post) + "]";
        if (i == ss.size()) return wrap(n, "pst-end", {vc("pst-end", st.gamma, apply_update(st.U, post))});
        const Stmt& s = *ss[i];
        switch (s.kind) {
        case Stmt::Kind::Skip: break;
        case Stmt::Kind::Assign:
            st.U = upd_seq(st.U, upd_assign(s.var, term_of_expr(*s.expr)));
            return wrap(n, "pst-V", {pst(std::move(st), ss, i + 1, post)});
        case Stmt::Kind::FieldAssign:
            st.U = upd_seq(st.U, upd_assign("heap", t_app("store", {t_var("heap"), field_name(s.field), term_of_expr(*s.expr)})));
            return wrap(n, "pst-F", {pst(std::move(st), ss, i + 1, post)});
        case Stmt::Kind::Call: {
            TermPtr f = fresh("f", {Sort::Kind::Fut, ""});
            if (!s.var.empty()) st.U = upd_seq(st.U, upd_assign(s.var, f));
            return wrap(n, "pst-call", {pst(std::move(st), ss, i + 1, post)});
        }
        case Stmt::Kind::Get: {
            Sort so = s.var.empty() ? Sort{Sort::Kind::Any, ""} : var_sort(s.var);
            TermPtr v = fresh(s.var.empty() ? "v" : s.var, so);
            std::vector<ProofNode> kids;
            if (auto a = assumption(s, v, kids)) st.gamma.push_back(a);
            if (!s.var.empty()) st.U = upd_seq(st.U, upd_assign(s.var, v));
            kids.push_back(pst(std::move(st), ss, i + 1, post));
            return wrap(n, "pst-get", std::move(kids));
        }
        case Stmt::Kind::Await: {
            // the heap is arbitrary after a suspension
            TermPtr h = fresh("heap", {Sort::Kind::Heap, ""});
            st.U = upd_seq(st.U, upd_assign("heap", h));
            if (!s.await_future) st.gamma.push_back(apply_update(st.U, formula_of_expr(*s.expr)));
            return wrap(n, "pst-await", {pst(std::move(st), ss, i + 1, post)});
        }
        case Stmt::Kind::Return:
            st.U = upd_seq(st.U, upd_assign("result", term_of_expr(*s.expr)));
            return wrap(n, "pst-return", {vc("pst-return", st.gamma, apply_update(st.U, post))});
        case Stmt::Kind::If: {
            FormulaPtr e = apply_update(st.U, formula_of_expr(*s.expr));
            std::vector<ProofNode> kids;
            for (int b = 0; b < 2; ++b) {
                PState sb = st;
                sb.gamma.push_back(b == 0 ? e : f_not(e));
                ProofNode k;
                if (inconsistent(sb.gamma)) {
                    k.sequent = gamma_text(sb.gamma) + " ==> false";
                    kids.push_back(leaf(k, "infeasible", Verdict::Proved, "branch condition contradicts the context"));
                } else {
                    kids.push_back(pst(std::move(sb), block(b == 0 ? s.then_b : s.else_b, tail(ss, i + 1)), 0, post));
                }
            }
            return wrap(n, "pst-if", std::move(kids));
        }
        case Stmt::Kind::While: {
            FormulaPtr inv = invariant(s);
            if (!inv) return missing_invariant(n, s);
            FormulaPtr e = formula_of_expr(*s.expr);
            std::vector<ProofNode> kids;
            kids.push_back(vc("loop-init", st.gamma, apply_update(st.U, inv)));
            kids.push_back(pst(PState{{inv, e}, {}}, block(s.body, {}), 0, inv));
            kids.push_back(pst(PState{{inv, f_not(e)}, {}}, tail(ss, i + 1), 0, post));
            return wrap(n, "pst-while", std::move(kids));
        }
        }
        return leaf(n, "pst", Verdict::Unknown, "unhandled statement");
    }

    ProofNode vc(const std::string& rule, const std::vector<FormulaPtr>& gamma0, const FormulaPtr& goal) {
        ProofNode n;
        std::vector<FormulaPtr> gamma;
        std::set<std::string> seen;
        for (const auto& g : gamma0)
            if (g->kind != Formula::Kind::True && seen.insert(to_string(g)).second) gamma.push_back(g);
        n.rule = rule;
        n.is_vc = true;
        for (const auto& g : gamma) n.hyps.push_back(to_string(g));
        n.goal = to_string(goal);
        std::set<std::string> fv = free_vars(goal);
        for (const auto& g : gamma) {
            auto s = free_vars(g);
            fv.insert(s.begin(), s.end());
        }
        for (const auto& [k, v] : sorts_)
            if (fv.count(k) || k[0] == '@') n.sorts[k] = v;
        n.sequent = gamma_text(gamma) + " ==> " + n.goal;
        n.vc = discharge_vc(gamma, goal, sorts_);
        n.status = n.vc.v == Validity::Valid ? Verdict::Proved
                   : n.vc.v == Validity::Invalid ? Verdict::Refuted
                                                 : Verdict::Unknown;
        return n;
    }

    FormulaPtr invariant(const Stmt& s) const {
        if (!s_) return nullptr;
        for (const auto& li : s_->spec.loop_invariants) {
            if (li.method != m_.qualified()) continue;
            if (li.line && li.line == s.loc.line) return li.inv;
            auto it = ordinal_.find(&s);
            if (li.ordinal && it != ordinal_.end() && li.ordinal == it->second) return li.inv;
        }
        return nullptr;
    }

private:
    const Program& p_;
    const ClassDecl& c_;
    const MethodDecl& m_;
    const Scheme* s_;
    SortMap sorts_;
    int fresh_ = 0;
    std::map<const Stmt*, int> ordinal_;
    std::set<std::string> assuming_;  // callee proofs in progress

    static TermPtr field_name(const std::string& f) {
        // select/store carry the bare field name as second argument
        return t_field(f)->args[1];
    }

    Sort var_sort(const std::string& v) const {
        auto it = sorts_.find(v);
        return it == sorts_.end() ? Sort{Sort::Kind::Any, ""} : it->second;
    }

    TermPtr fresh(const std::string& base, const Sort& s) {
        std::string n = base + "'" + std::to_string(++fresh_);
        sorts_[n] = s;
        return t_var(n);
    }

    static Stmts tail(const Stmts& ss, size_t i) { return Stmts(ss.begin() + static_cast<long>(std::min(i, ss.size())), ss.end()); }

    std::string sequent(const PState& st, const Stmts& ss, size_t i, const MTypePtr& L) const {
        return gamma_text(st.gamma) + " ==> " + to_string(st.U) + "[" + (i < ss.size() ? stmt_head(*ss[i]) : "skip") +
               " ~> " + to_string(L) + "]";
    }

    bool inconsistent(const std::vector<FormulaPtr>& g) { return discharge_vc(g, f_false(), sorts_).v == Validity::Valid; }

    ProofNode leaf(ProofNode n, const std::string& rule, Verdict v, const std::string& note) {
        n.rule = rule;
        n.status = v;
        n.note = note;
        return n;
    }
    static ProofNode wrap(ProofNode n, const std::string& rule, std::vector<ProofNode> kids, bool any = false) {
        n.rule = rule;
        n.any = any;
        n.children = std::move(kids);
        n.status = any ? any_of(n.children) : all_of(n.children);
        return n;
    }

    ProofNode missing_invariant(ProofNode n, const Stmt& s) {
        auto it = ordinal_.find(&s);
        std::string where = "line " + std::to_string(s.loc.line) +
                            (it != ordinal_.end() ? " (loop " + std::to_string(it->second) + ")" : "");
        return leaf(n, "while", Verdict::Unknown, "no loop invariant for the loop at " + where);
    }

    // Selects one alternative of a choice for a non-branching statement.
    ProofNode choice(ProofNode n, const PState& st, const Stmts& ss, size_t i, const MTypePtr& ch) {
        std::vector<ProofNode> kids;
        for (const auto& a : ch->sub) {
            kids.push_back(met(st, ss, i, flatten(a)));
            if (kids.back().status == Verdict::Proved) break;
        }
        return wrap(n, "oplus-select", std::move(kids), true);
    }

    ProofNode call(ProofNode n, PState st, const Stmts& ss, size_t i, Items L) {
        const Stmt& s = *ss[i];
        std::string callee = s.callee_class + "." + s.method;
        if (L.empty() || L[0]->kind != MType::Kind::Call)
            return leaf(n, "met-call", Verdict::Refuted,
                        "call of " + callee + " but the type expects " + (L.empty() ? "nothing" : to_string(L[0])));
        const MType& a = *L[0];
        std::string field;
        if (s_)
            for (const auto& r : s_->env.roles)
                if (r.name == a.role) field = r.field;
        if (field.empty()) field = a.role;
        if (field != s.target || a.method != callee)
            return leaf(n, "met-call", Verdict::Refuted,
                        "call " + s.target + "!" + callee + " does not match " + a.role + "!" + a.method);
        std::map<std::string, TermPtr> args;
        const MethodDecl* cm = p_.find_method(callee);
        if (cm)
            for (size_t k = 0; k < cm->params.size() && k < s.args.size(); ++k)
                args[cm->params[k].name] = term_of_expr(*s.args[k]);
        FormulaPtr goal = apply_update(st.U, subst(a.phi, args));
        std::vector<ProofNode> kids;
        kids.push_back(vc("met-call", st.gamma, goal));
        TermPtr f = fresh("f", {Sort::Kind::Fut, ""});
        if (!s.var.empty()) st.U = upd_seq(st.U, upd_assign(s.var, f));
        kids.push_back(met(std::move(st), ss, i + 1, Items(L.begin() + 1, L.end())));
        return wrap(n, "met-call", std::move(kids));
    }

    // Callee postcondition at a get whose resolver is unique: psi[result := v],
    // justified by a pst proof of the callee body under its precondition.
    FormulaPtr assumption(const Stmt& s, const TermPtr& v, std::vector<ProofNode>& kids) {
        if (!s_) return nullptr;
        auto it = s_->pt.sites.find(s.pp);
        if (it == s_->pt.sites.end() || it->second.size() != 1) return nullptr;
        const std::string& callee = *it->second.begin();
        auto a = s_->spec.assumptions.find(callee);
        if (a == s_->spec.assumptions.end()) return nullptr;
        ProofNode prem;
        prem.sequent = "[" + callee + " ~>pst " + to_string(a->second) + "]";
        if (assuming_.count(callee) || callee == m_.qualified()) {
            kids.push_back(leaf(prem, "ex-assume", Verdict::Unknown, "recursive assumption"));
        } else {
            FormulaPtr pre = f_true();
            if (auto t = s_->types.find(callee); t != s_->types.end()) pre = t->second.pre;
            else if (auto c = s_->spec.contracts.find(callee); c != s_->spec.contracts.end() && c->second.pre)
                pre = c->second.pre;
            ProofResult r = prove_pst(*s_, callee, pre, a->second);
            prem.rule = "ex-assume";
            prem.children.push_back(r.tree);
            prem.status = r.verdict;
            kids.push_back(prem);
        }
        return simplify(subst(a->second, {{"result", v}}));
    }

    ProofNode get(ProofNode n, PState st, const Stmts& ss, size_t i, Items L) {
        const Stmt& s = *ss[i];
        if (L.empty() || L[0]->kind != MType::Kind::Branch)
            return leaf(n, "met-get", Verdict::Refuted,
                        "read at get_" + std::to_string(s.pp) + " but the type expects " +
                            (L.empty() ? "nothing" : to_string(L[0])));
        const MType& b = *L[0];
        std::vector<ProofNode> kids;
        ProofNode ex1;
        ex1.sequent = "p2(" + std::to_string(s.pp) + ")";
        if (b.any_method) {
            kids.push_back(leaf(ex1, "ex1", Verdict::Proved, "every method resolves"));
        } else if (!s_) {
            kids.push_back(leaf(ex1, "ex1", Verdict::Unknown, "no points-to information"));
        } else {
            std::set<std::string> allowed(b.methods.begin(), b.methods.end());
            auto it = s_->pt.sites.find(s.pp);
            std::set<std::string> pts = it == s_->pt.sites.end() ? std::set<std::string>{} : it->second;
            std::string list;
            bool ok = true;
            for (const auto& m : pts) {
                list += (list.empty() ? "" : ", ") + m;
                ok = ok && allowed.count(m);
            }
            kids.push_back(leaf(ex1, "ex1", ok ? Verdict::Proved : Verdict::Refuted,
                                "points-to {" + list + "}" + (ok ? " within" : " not within") + " the resolvers"));
        }
        Sort so = s.var.empty() ? Sort{Sort::Kind::Any, ""} : var_sort(s.var);
        TermPtr v = fresh(s.var.empty() ? "v" : s.var, so);
        FormulaPtr assume = assumption(s, v, kids);
        FormulaPtr c = apply_update(st.U, subst(b.phi, {{"result", v}}));
        PState base = st;
        if (assume) base.gamma.push_back(assume);
        if (!s.var.empty()) base.U = upd_seq(base.U, upd_assign(s.var, v));
        for (int k = 0; k < 2; ++k) {
            PState sb = base;
            sb.gamma.push_back(k == 0 ? c : f_not(c));
            if (inconsistent(sb.gamma)) {
                ProofNode x;
                x.sequent = gamma_text(sb.gamma) + " ==> false";
                kids.push_back(leaf(x, "infeasible", Verdict::Proved, "branch condition contradicts the context"));
            } else {
                kids.push_back(met(std::move(sb), ss, i + 1, flatten(b.sub[k])));
            }
        }
        return wrap(n, "met-get", std::move(kids));
    }

    ProofNode branch_if(ProofNode n, PState st, const Stmts& ss, size_t i, Items L) {
        const Stmt& s = *ss[i];
        std::vector<MTypePtr> alts;
        if (L.size() == 1 && L[0]->kind == MType::Kind::Choice) alts = L[0]->sub;
        else alts = {type_of(L)};
        FormulaPtr e = apply_update(st.U, formula_of_expr(*s.expr));
        std::vector<ProofNode> kids;
        for (int b = 0; b < 2; ++b) {
            PState sb = st;
            sb.gamma.push_back(b == 0 ? e : f_not(e));
            Stmts cont = block(b == 0 ? s.then_b : s.else_b, tail(ss, i + 1));
            ProofNode k;
            k.sequent = sequent(sb, cont, 0, type_of(L));
            if (inconsistent(sb.gamma)) {
                kids.push_back(leaf(k, "infeasible", Verdict::Proved, "branch condition contradicts the context"));
                continue;
            }
            // singletons first, then the whole choice
            std::vector<ProofNode> tries;
            for (const auto& a : alts) {
                tries.push_back(met(sb, cont, 0, flatten(a)));
                if (tries.back().status == Verdict::Proved) break;
            }
            // keeping the whole choice only helps when the next statement branches again
            size_t nx = 0;
            while (nx < cont.size() && cont[nx]->kind == Stmt::Kind::Skip) ++nx;
            bool next_if = nx < cont.size() && cont[nx]->kind == Stmt::Kind::If;
            if (alts.size() > 1 && next_if && tries.back().status != Verdict::Proved)
                tries.push_back(met(sb, cont, 0, {mt_choice(alts)}));
            kids.push_back(wrap(k, b == 0 ? "select-then" : "select-else", std::move(tries), true));
        }
        return wrap(n, "met-if", std::move(kids));
    }

    ProofNode loop(ProofNode n, PState st, const Stmts& ss, size_t i, Items L) {
        const Stmt& s = *ss[i];
        if (L.empty() || L[0]->kind != MType::Kind::Star)
            return leaf(n, "met-while", Verdict::Refuted,
                        "loop but the type expects " + (L.empty() ? std::string("nothing") : to_string(L[0])));
        FormulaPtr inv = invariant(s);
        if (!inv) return missing_invariant(n, s);
        FormulaPtr e = formula_of_expr(*s.expr);
        std::vector<ProofNode> kids;
        kids.push_back(vc("while-init", st.gamma, apply_update(st.U, inv)));
        kids.push_back(pst(PState{{inv, e}, {}}, block(s.body, {}), 0, inv));
        kids.push_back(met(PState{{inv, e}, {}}, block(s.body, {}), 0, flatten(L[0]->sub[0])));
        kids.push_back(met(PState{{inv, f_not(e)}, {}}, tail(ss, i + 1), 0, Items(L.begin() + 1, L.end())));
        return wrap(n, "met-while", std::move(kids));
    }
};

const ClassDecl& class_of(const Program& p, const std::string& method, const MethodDecl*& m) {
    m = p.find_method(method);
    auto dot = method.find('.');
    const ClassDecl* c = dot == std::string::npos ? nullptr : p.find_class(method.substr(0, dot));
    if (!m || !c) throw SpecError("unknown method " + method);
    return *c;
}

}  // namespace

// ---------------------------------------------------------------- entry points

namespace {

// Unproved leaves that decide the verdict; failed alternatives of a proved choice are skipped.
void open_leaves(const std::string& m, const ProofNode& n, std::vector<std::string>& out) {
    if (n.status == Verdict::Proved) return;
    if (n.children.empty()) {
        std::string s = m + " [" + n.rule + "] ";
        s += n.is_vc ? n.sequent + " (" + validity_name(n.vc.v) + ")" : n.note.empty() ? n.sequent : n.note;
        out.push_back(s);
        return;
    }
    for (const auto& c : n.children)
        if (!n.any || c.status == n.status) open_leaves(m, c, out);
}

std::vector<std::string> open_of(const std::string& m, const ProofNode& n) {
    std::vector<std::string> out;
    open_leaves(m, n, out);
    return out;
}

}  // namespace

ProofResult prove_method(const Scheme& s, const std::string& method) {
    ProofResult r;
    r.method = method;
    auto it = s.types.find(method);
    if (it == s.types.end()) {
        r.tree.rule = "method";
        r.tree.sequent = method;
        r.tree.note = "no method type";
        r.open.push_back(method + ": no method type given");
        return r;
    }
    const MethodDecl* m = nullptr;
    const ClassDecl& c = class_of(*s.program, method, m);
    Prover pv(*s.program, c, *m, &s);
    PState st;
    if (it->second.pre && it->second.pre->kind != Formula::Kind::True) st.gamma.push_back(it->second.pre);
    ProofNode body = pv.met(st, pv.body(), 0, flatten(it->second.body));
    r.tree.rule = "method";
    r.tree.sequent = to_string(it->second);
    r.tree.children.push_back(std::move(body));
    r.tree.status = r.tree.children[0].status;
    r.verdict = r.tree.status;
    r.open = open_of(r.method, r.tree);
    return r;
}

ProofResult prove_pst(const Scheme& s, const std::string& method, const FormulaPtr& pre, const FormulaPtr& post) {
    ProofResult r;
    r.method = method;
    const MethodDecl* m = nullptr;
    const ClassDecl& c = class_of(*s.program, method, m);
    Prover pv(*s.program, c, *m, &s);
    PState st;
    if (pre) st.gamma.push_back(pre);
    r.tree = pv.pst(st, pv.body(), 0, post ? post : f_true());
    r.verdict = r.tree.status;
    r.open = open_of(r.method, r.tree);
    return r;
}

ProofResult prove_pst_block(const Program& p, const ClassDecl& c, const MethodDecl& m, const Block& b,
                            const FormulaPtr& pre, const FormulaPtr& post) {
    ProofResult r;
    r.method = m.qualified();
    Prover pv(p, c, m, nullptr);
    PState st;
    if (pre) st.gamma.push_back(pre);
    r.tree = pv.pst(st, Prover::block(b, {}), 0, post ? post : f_true());
    r.verdict = r.tree.status;
    r.open = open_of(r.method, r.tree);
    return r;
}

// ---------------------------------------------------------------- schemes

namespace {

void walk_type(const MTypePtr& L, const std::function<void(const MType&)>& f) {
    f(*L);
    for (const auto& s : L->sub) walk_type(s, f);
}

MTypePtr map_type(const MTypePtr& L, const std::function<MTypePtr(const MTypePtr&)>& f) {
    MTypePtr r = f(L);
    if (r != L) return r;
    switch (L->kind) {
    case MType::Kind::Seq: return mt_seq(map_type(L->sub[0], f), map_type(L->sub[1], f));
    case MType::Kind::Star: return mt_star(map_type(L->sub[0], f));
    case MType::Kind::Choice: {
        std::vector<MTypePtr> xs;
        for (const auto& s : L->sub) xs.push_back(map_type(s, f));
        return mt_choice(xs);
    }
    case MType::Kind::Branch:
        return mt_branch(L->methods, L->any_method, L->phi, map_type(L->sub[0], f), map_type(L->sub[1], f));
    default: return L;
    }
}

FormulaPtr pre_of(const Scheme& s, const std::string& m) {
    if (auto t = s.types.find(m); t != s.types.end()) return t->second.pre;
    if (auto c = s.spec.contracts.find(m); c != s.spec.contracts.end()) return c->second.pre;
    return nullptr;
}

}  // namespace

Scheme make_scheme(const Program& p, const SpecFile& spec) {
    Scheme s;
    s.program = &p;
    s.spec = spec;
    s.types = spec.types;
    std::vector<Role> roles = spec.roles;
    if (!spec.infer.empty()) {
        // inferred types name roles after the reference fields
        for (const auto& c : p.classes)
            for (const auto& r : c.params)
                if (std::none_of(roles.begin(), roles.end(), [&](const Role& x) { return x.name == r.name; }))
                    roles.push_back({r.name, r.name});
    }
    s.env = TypeEnv::of(p, roles);
    s.pt = points_to_all(p);
    std::map<std::string, FormulaPtr> callee_pre;
    for (const auto& [m, c] : spec.contracts)
        if (c.pre) callee_pre[m] = c.pre;
    for (const auto& [m, t] : spec.types)
        if (!callee_pre.count(m) && t.pre) callee_pre[m] = t.pre;
    for (const auto& name : spec.infer) {
        const MethodDecl* m = p.find_method(name);
        if (!m) throw SpecError("infer: unknown method " + name);
        Contract c;
        if (auto it = spec.contracts.find(name); it != spec.contracts.end()) c = it->second;
        FormulaPtr inv;
        if (auto it = spec.class_invariants.find(m->cls); it != spec.class_invariants.end()) inv = it->second;
        s.types[name] = weave_contract(name, infer_skeleton(*m, p), c.pre, c.post, inv, m->name == "run", callee_pre);
    }
    return s;
}

MTypePtr infer_skeleton(const MethodDecl& m, const Program& p) {
    std::function<Items(const Block&, size_t)> go = [&](const Block& b, size_t i) -> Items {
        Items out;
        for (; i < b.size(); ++i) {
            const Stmt& s = *b[i];
            switch (s.kind) {
            case Stmt::Kind::Call:
                out.push_back(mt_call(s.target, s.callee_class + "." + s.method, f_true()));
                break;
            case Stmt::Kind::If:
                out.push_back(mt_choice({type_of(go(s.then_b, 0)), type_of(go(s.else_b, 0))}));
                break;
            case Stmt::Kind::While: out.push_back(mt_star(type_of(go(s.body, 0)))); break;
            case Stmt::Kind::Return: out.push_back(mt_term(f_true())); break;
            case Stmt::Kind::Get: {
                // the rest of the block goes into the first branch; a final termination stays outside
                Items rest = go(b, i + 1);
                Items after;
                if (!rest.empty() && rest.back()->kind == MType::Kind::Term) {
                    after.push_back(rest.back());
                    rest.pop_back();
                }
                out.push_back(mt_branch({}, true, f_true(), type_of(rest), mt_skip()));
                out.insert(out.end(), after.begin(), after.end());
                return out;
            }
            default: break;
            }
        }
        return out;
    };
    (void)p;
    return normalize(type_of(go(m.body, 0)));
}

Protocol weave_contract(const std::string& method, const MTypePtr& L, const FormulaPtr& pre, const FormulaPtr& post,
                        const FormulaPtr& inv, bool ctor, const std::map<std::string, FormulaPtr>& callee_pre) {
    auto conj = [](FormulaPtr a, const FormulaPtr& b) { return b ? (a ? f_and(a, b) : b) : (a ? a : f_true()); };
    Protocol pr;
    pr.method = method;
    pr.pre = ctor ? conj(pre, nullptr) : conj(pre, inv);
    pr.body = map_type(L, [&](const MTypePtr& t) -> MTypePtr {
        if (t->kind == MType::Kind::Term) {
            FormulaPtr phi = t->phi->kind == Formula::Kind::True ? nullptr : t->phi;
            return mt_term(conj(conj(phi, post), inv));
        }
        if (t->kind == MType::Kind::Call && t->phi->kind == Formula::Kind::True) {
            auto it = callee_pre.find(t->method);
            if (it != callee_pre.end()) return mt_call(t->role, t->method, it->second);
        }
        return t;
    });
    return pr;
}

// ---------------------------------------------------------------- consistency

ConsistencyReport check_consistency(const Scheme& s) {
    ConsistencyReport rep;
    const Program& p = *s.program;
    SortMap sorts;
    for (const auto& c : p.classes) {
        for (const auto& f : c.fields) sorts["@" + f.name] = sort_of(f.type);
        for (const auto& m : c.methods) {
            for (const auto& prm : m.params) sorts[prm.name] = sort_of(prm.type);
            for_each_stmt(m.body, [&](const Stmt& st) {
                if (st.is_decl) sorts[st.var] = sort_of(st.decl_type);
            });
        }
    }
    for (const auto& [name, pr] : s.types) {
        walk_type(pr.body, [&](const MType& t) {
            if (t.kind != MType::Kind::Call) return;
            FormulaPtr want = pre_of(s, t.method);
            if (!want || want->kind == Formula::Kind::True) return;
            // the callee's heap is not the caller's
            std::string h = "heap'" + t.method;
            SortMap so = sorts;
            so[h] = {Sort::Kind::Heap, ""};
            FormulaPtr goal = subst(want, {{"heap", t_var(h)}});
            VcResult r = discharge_vc({t.phi}, goal, so);
            std::string detail = r.reason;
            for (const auto& [k, v] : r.model) detail += (detail == r.reason ? ": " : ", ") + k + " = " + v;
            ConsistencyItem it{name + ": " + t.role + "!" + t.method + "(" + to_string(t.phi) + ") implies " +
                                   to_string(want),
                               r.v, detail};
            rep.ok = rep.ok && r.v == Validity::Valid;
            rep.items.push_back(std::move(it));
        });
    }
    // the initial call is checked on the concrete initial state
    const Creation* target = p.find_creation(p.main.target);
    const ClassDecl* tc = target ? p.find_class(target->cls) : nullptr;
    const MethodDecl* m = tc ? tc->find_method(p.main.method) : nullptr;
    if (m) {
        FormulaPtr pre = pre_of(s, m->qualified());
        ConsistencyItem it{"initial call " + p.main.target + "!" + m->qualified(), Validity::Valid, ""};
        if (pre && pre->kind != Formula::Kind::True) {
            std::map<std::string, std::string> refs;
            for (size_t i = 0; i < tc->params.size() && i < target->args.size(); ++i)
                refs[tc->params[i].name] = target->args[i];
            ObjState st{{}, initial_heap(*tc, refs)};
            for (size_t i = 0; i < m->params.size() && i < p.main.args.size(); ++i) {
                SymPtr v = eval_expr(*p.main.args[i], ObjState{});
                if (v) st.sigma[m->params[i].name] = v;
            }
            TV t = TV::Unknown;
            try {
                t = eval_fos(pre, st);
            } catch (const LogicError& e) {
                it.detail = e.what();
            }
            it.result = t == TV::True ? Validity::Valid : t == TV::False ? Validity::Invalid : Validity::Unknown;
            if (it.detail.empty()) it.detail = std::string("precondition evaluates to ") + tv_name(t);
        }
        rep.ok = rep.ok && it.result == Validity::Valid;
        rep.items.push_back(std::move(it));
    }
    return rep;
}

// ---------------------------------------------------------------- trees

nlohmann::json to_json(const ProofNode& n) {
    nlohmann::json j;
    j["rule"] = n.rule;
    j["sequent"] = n.sequent;
    if (!n.note.empty()) j["note"] = n.note;
    j["status"] = verdict_name(n.status);
    j["combine"] = n.any ? "any" : "all";
    if (n.is_vc) {
        nlohmann::json v;
        v["hyps"] = n.hyps;
        v["goal"] = n.goal;
        nlohmann::json so = nlohmann::json::object();
        for (const auto& [k, s] : n.sorts) so[k] = to_string(s);
        v["sorts"] = so;
        v["result"] = validity_name(n.vc.v);
        if (!n.vc.model.empty()) v["model"] = n.vc.model;
        if (!n.vc.reason.empty()) v["reason"] = n.vc.reason;
        j["vc"] = v;
    }
    nlohmann::json kids = nlohmann::json::array();
    for (const auto& c : n.children) kids.push_back(to_json(c));
    j["children"] = kids;
    return j;
}

ProofNode proof_from_json(const nlohmann::json& j) {
    ProofNode n;
    n.rule = j.at("rule").get<std::string>();
    n.sequent = j.value("sequent", "");
    n.note = j.value("note", "");
    std::string st = j.at("status").get<std::string>();
    n.status = st == "proved" ? Verdict::Proved : st == "unknown" ? Verdict::Unknown : Verdict::Refuted;
    n.any = j.value("combine", "all") == "any";
    if (j.contains("vc")) {
        const auto& v = j["vc"];
        n.is_vc = true;
        n.hyps = v.at("hyps").get<std::vector<std::string>>();
        n.goal = v.at("goal").get<std::string>();
        for (const auto& [k, s] : v.at("sorts").items()) n.sorts[k] = parse_sort(s.get<std::string>());
        std::string r = v.value("result", "unknown");
        n.vc.v = r == "valid" ? Validity::Valid : r == "invalid" ? Validity::Invalid : Validity::Unknown;
        if (v.contains("model")) n.vc.model = v["model"].get<std::map<std::string, std::string>>();
        n.vc.reason = v.value("reason", "");
    }
    for (const auto& c : j.at("children")) n.children.push_back(proof_from_json(c));
    return n;
}

Verdict replay(const ProofNode& n) {
    if (n.is_vc) {
        std::vector<FormulaPtr> g;
        for (const auto& h : n.hyps) g.push_back(parse_formula(h));
        VcResult r = discharge_vc(g, parse_formula(n.goal), n.sorts);
        return r.v == Validity::Valid ? Verdict::Proved : r.v == Validity::Invalid ? Verdict::Refuted : Verdict::Unknown;
    }
    if (n.children.empty()) return n.status;
    std::vector<ProofNode> kids;
    for (const auto& c : n.children) {
        ProofNode k;
        k.status = replay(c);
        kids.push_back(k);
    }
    return n.any ? any_of(kids) : all_of(kids);
}

void collect_vcs(const ProofNode& n, std::vector<const ProofNode*>& out) {
    if (n.is_vc) out.push_back(&n);
    for (const auto& c : n.children) collect_vcs(c, out);
}

nlohmann::json to_json(const ProofResult& r) {
    nlohmann::json j;
    j["method"] = r.method;
    j["verdict"] = verdict_name(r.verdict);
    j["open"] = r.open;
    j["tree"] = to_json(r.tree);
    return j;
}

nlohmann::json to_json(const ConsistencyReport& r) {
    nlohmann::json j;
    j["ok"] = r.ok;
    nlohmann::json xs = nlohmann::json::array();
    for (const auto& it : r.items)
        xs.push_back({{"obligation", it.what}, {"result", validity_name(it.result)}, {"detail", it.detail}});
    j["items"] = xs;
    return j;
}

}  // namespace cao
