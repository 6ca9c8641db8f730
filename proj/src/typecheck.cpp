#include "cao/frontend.hpp"

#include <map>

namespace cao {

namespace {

// a accepts b: equal up to wildcards, Int widens to Rat
bool assignable(const DataType& a, const DataType& b) {
    using K = DataType::Kind;
    if (a.kind == K::Any || b.kind == K::Any) return true;
    if (a.kind == K::Rat && b.kind == K::Int) return true;
    if (a.kind != b.kind) return false;
    if (a.kind == K::Class) return a.cls == b.cls;
    if (a.kind == K::List || a.kind == K::Fut) {
        if (!a.elem || !b.elem) return true;
        if (a.kind == K::Fut) {
            // futures are invariant except for wildcards
            return *a.elem == *b.elem || a.elem->kind == K::Any || b.elem->kind == K::Any;
        }
        return assignable(*a.elem, *b.elem);
    }
    return true;
}

// least common type for == and list construction
DataType join(const DataType& a, const DataType& b) {
    using K = DataType::Kind;
    if (a.kind == K::Any) return b;
    if (b.kind == K::Any) return a;
    if (a.is_numeric() && b.is_numeric()) return a.kind == K::Rat || b.kind == K::Rat ? DataType::rat() : DataType::int_();
    if ((a.kind == K::List || a.kind == K::Fut) && a.kind == b.kind) {
        DataType e = join(a.elem ? *a.elem : DataType::any(), b.elem ? *b.elem : DataType::any());
        return a.kind == K::List ? DataType::list(e) : DataType::fut(e);
    }
    return a;
}

class Checker {
public:
    explicit Checker(Program& p) : p_(p) {}

    void run() {
        std::map<std::string, int> classes;
        for (auto& c : p_.classes)
            if (classes[c.name]++) err(c.loc, "duplicate class '" + c.name + "'");
        for (auto& c : p_.classes) check_class(c);
        check_main();
        if (!errs_.empty()) throw FrontendError(errs_);
    }

private:
    Program& p_;
    std::vector<Diagnostic> errs_;
    const ClassDecl* cls_ = nullptr;
    const MethodDecl* meth_ = nullptr;
    std::vector<std::map<std::string, DataType>> scopes_;

    void err(Loc l, std::string msg) { errs_.push_back({p_.file, l, std::move(msg)}); }

    void check_type_exists(const DataType& t, Loc l) {
        if (t.kind == DataType::Kind::Class && !p_.find_class(t.cls)) err(l, "unknown class '" + t.cls + "'");
        if (t.elem) check_type_exists(*t.elem, l);
    }

    void check_class(ClassDecl& c) {
        cls_ = &c;
        for (auto& r : c.params) {
            if (r.type.kind != DataType::Kind::Class) err(r.loc, "class parameter '" + r.name + "' must have a class type");
            check_type_exists(r.type, r.loc);
        }
        for (auto& f : c.fields) {
            check_type_exists(f.type, f.loc);
            if (f.type.kind == DataType::Kind::Class) err(f.loc, "field '" + f.name + "' cannot have a class type");
            if (f.init) {
                scopes_.clear();
                scopes_.emplace_back();
                meth_ = nullptr;
                DataType t = expr(*f.init, true);
                if (!assignable(f.type, t))
                    err(f.init->loc, "initializer of '" + f.name + "' has type " + to_string(t) + ", expected " + to_string(f.type));
            }
        }
        for (auto& m : c.methods) {
            meth_ = &m;
            check_type_exists(m.ret, m.loc);
            scopes_.clear();
            scopes_.emplace_back();
            for (auto& prm : m.params) {
                check_type_exists(prm.type, prm.loc);
                if (prm.type.kind == DataType::Kind::Class)
                    err(prm.loc, "method parameter '" + prm.name + "' cannot have a class type");
                scopes_.back()[prm.name] = prm.type;
            }
            block(m.body);
        }
        cls_ = nullptr;
        meth_ = nullptr;
    }

    const DataType* lookup_var(const std::string& n) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto f = it->find(n);
            if (f != it->end()) return &f->second;
        }
        return nullptr;
    }

    const FieldDecl* field(const std::string& n) const {
        for (const auto& f : cls_->fields)
            if (f.name == n) return &f;
        return nullptr;
    }

    const Param* ref(const std::string& n) const {
        for (const auto& r : cls_->params)
            if (r.name == n) return &r;
        return nullptr;
    }

    DataType expr(Expr& e, bool ground_only = false) {
        DataType t = infer(e, ground_only);
        e.type = t;
        return t;
    }

    DataType infer(Expr& e, bool ground_only) {
        using K = DataType::Kind;
        switch (e.kind) {
        case Expr::Kind::Lit:
            if (e.lit.is_unit()) return DataType::unit();
            if (e.lit.is_bool()) return DataType::bool_();
            if (e.lit.is_int()) return DataType::int_();
            if (e.lit.is_rat()) return DataType::rat();
            if (e.lit.is_list()) return DataType::list(DataType::any());
            if (e.lit.is_future()) return DataType::fut(DataType::any());
            return DataType::any();
        case Expr::Kind::Var: {
            if (ground_only) {
                err(e.loc, "initializer must be a constant expression");
                return DataType::any();
            }
            if (const DataType* t = lookup_var(e.name)) return *t;
            if (cls_ && ref(e.name)) return ref(e.name)->type;
            err(e.loc, "unknown variable '" + e.name + "'");
            return DataType::any();
        }
        case Expr::Kind::Field: {
            if (ground_only) {
                err(e.loc, "initializer must be a constant expression");
                return DataType::any();
            }
            if (const FieldDecl* f = field(e.name)) return f->type;
            if (const Param* r = ref(e.name)) return r->type;
            err(e.loc, "unknown field '" + e.name + "'");
            return DataType::any();
        }
        case Expr::Kind::Unary: {
            DataType a = expr(*e.a, ground_only);
            if (e.op == "-") {
                if (!a.is_numeric() && a.kind != K::Any) err(e.loc, "unary '-' needs a number, got " + to_string(a));
                return a.kind == K::Any ? DataType::int_() : a;
            }
            if (e.op == "!") {
                if (a.kind != K::Bool && a.kind != K::Any) err(e.loc, "'!' needs Bool, got " + to_string(a));
                return DataType::bool_();
            }
            if (a.kind != K::List && a.kind != K::Any) {
                err(e.loc, "'" + e.op + "' needs a list, got " + to_string(a));
                return DataType::any();
            }
            if (e.op == "len") return DataType::int_();
            if (e.op == "hd") return a.elem ? *a.elem : DataType::any();
            return a;  // tl
        }
        case Expr::Kind::Binary: {
            DataType a = expr(*e.a, ground_only);
            DataType b = expr(*e.b, ground_only);
            const std::string& op = e.op;
            if (op == "&&" || op == "||") {
                if ((a.kind != K::Bool && a.kind != K::Any) || (b.kind != K::Bool && b.kind != K::Any))
                    err(e.loc, "'" + op + "' needs Bool operands");
                return DataType::bool_();
            }
            if (op == "==" || op == "!=") {
                if (!assignable(a, b) && !assignable(b, a))
                    err(e.loc, "cannot compare " + to_string(a) + " with " + to_string(b));
                return DataType::bool_();
            }
            if (op == "Cons") {
                if (b.kind != K::List && b.kind != K::Any) {
                    err(e.loc, "second argument of Cons must be a list");
                    return DataType::any();
                }
                DataType el = b.elem ? *b.elem : DataType::any();
                if (!assignable(el, a) && !assignable(a, el))
                    err(e.loc, "Cons element " + to_string(a) + " does not fit " + to_string(b));
                return DataType::list(join(el, a));
            }
            bool an = a.is_numeric() || a.kind == K::Any, bn = b.is_numeric() || b.kind == K::Any;
            if (!an || !bn) {
                err(e.loc, "'" + op + "' needs numeric operands, got " + to_string(a) + " and " + to_string(b));
                return op == "<" || op == "<=" || op == ">" || op == ">=" ? DataType::bool_() : DataType::int_();
            }
            if (op == "<" || op == "<=" || op == ">" || op == ">=") return DataType::bool_();
            if (op == "/") return DataType::rat();
            if (a.kind == K::Rat || b.kind == K::Rat) return DataType::rat();
            return DataType::int_();
        }
        }
        return DataType::any();
    }

    void assign_to(Stmt& s, const DataType& rhs) {
        if (s.var.empty()) return;
        if (s.is_decl) {
            check_type_exists(s.decl_type, s.loc);
            if (s.decl_type.kind == DataType::Kind::Class) err(s.loc, "local '" + s.var + "' cannot have a class type");
            if (lookup_var(s.var)) err(s.loc, "variable '" + s.var + "' already declared");
            if (!assignable(s.decl_type, rhs))
                err(s.loc, "cannot assign " + to_string(rhs) + " to '" + s.var + "' of type " + to_string(s.decl_type));
            scopes_.back()[s.var] = s.decl_type;
            return;
        }
        const DataType* t = lookup_var(s.var);
        if (!t) {
            if (cls_ && ref(s.var)) {
                err(s.loc, "reference field '" + s.var + "' cannot be reassigned");
            } else {
                err(s.loc, "unknown variable '" + s.var + "'");
            }
            return;
        }
        for (const auto& prm : meth_->params)
            if (prm.name == s.var) err(s.loc, "parameter '" + s.var + "' cannot be reassigned");
        if (!assignable(*t, rhs)) err(s.loc, "cannot assign " + to_string(rhs) + " to '" + s.var + "' of type " + to_string(*t));
    }

    void block(Block& b) {
        for (auto& s : b) stmt(*s);
    }

    void scoped(Block& b) {
        scopes_.emplace_back();
        block(b);
        scopes_.pop_back();
    }

    void stmt(Stmt& s) {
        using K = DataType::Kind;
        switch (s.kind) {
        case Stmt::Kind::Skip: return;
        case Stmt::Kind::Assign: assign_to(s, expr(*s.expr)); return;
        case Stmt::Kind::FieldAssign: {
            DataType t = expr(*s.expr);
            if (ref(s.field)) {
                err(s.loc, "reference field '" + s.field + "' cannot be reassigned");
                return;
            }
            const FieldDecl* f = field(s.field);
            if (!f) {
                err(s.loc, "unknown field '" + s.field + "'");
                return;
            }
            if (!assignable(f->type, t)) err(s.loc, "cannot assign " + to_string(t) + " to field '" + s.field + "'");
            return;
        }
        case Stmt::Kind::Get: {
            DataType t = expr(*s.expr);
            if (t.kind != K::Fut && t.kind != K::Any) {
                err(s.expr->loc, "get needs a future, got " + to_string(t));
                assign_to(s, DataType::any());
                return;
            }
            assign_to(s, t.elem ? *t.elem : DataType::any());
            return;
        }
        case Stmt::Kind::Call: {
            const Param* r = ref(s.target);
            if (!r) {
                err(s.loc, "call target '" + s.target + "' is not a reference field");
                for (auto& a : s.args) expr(*a);
                assign_to(s, DataType::any());
                return;
            }
            s.callee_class = r->type.cls;
            const ClassDecl* cc = p_.find_class(r->type.cls);
            const MethodDecl* m = cc ? cc->find_method(s.method) : nullptr;
            if (!m) {
                err(s.loc, "class '" + r->type.cls + "' has no method '" + s.method + "'");
                for (auto& a : s.args) expr(*a);
                assign_to(s, DataType::any());
                return;
            }
            if (m->params.size() != s.args.size())
                err(s.loc, "method " + m->qualified() + " expects " + std::to_string(m->params.size()) + " arguments");
            for (size_t i = 0; i < s.args.size(); ++i) {
                DataType t = expr(*s.args[i]);
                if (i < m->params.size() && !assignable(m->params[i].type, t))
                    err(s.args[i]->loc, "argument " + std::to_string(i + 1) + " of " + m->qualified() + " has type " +
                                            to_string(t) + ", expected " + to_string(m->params[i].type));
            }
            assign_to(s, DataType::fut(m->ret));
            return;
        }
        case Stmt::Kind::Await: {
            DataType t = expr(*s.expr);
            if (s.await_future) {
                if (t.kind != K::Fut && t.kind != K::Any) err(s.expr->loc, "await guard '?' needs a future, got " + to_string(t));
            } else if (t.kind != K::Bool && t.kind != K::Any) {
                err(s.expr->loc, "await guard must be Bool, got " + to_string(t));
            }
            return;
        }
        case Stmt::Kind::Return: {
            DataType t = expr(*s.expr);
            if (!assignable(meth_->ret, t))
                err(s.loc, "return type " + to_string(t) + " does not match " + to_string(meth_->ret));
            return;
        }
        case Stmt::Kind::If: {
            DataType t = expr(*s.expr);
            if (t.kind != K::Bool && t.kind != K::Any) err(s.expr->loc, "condition must be Bool");
            scoped(s.then_b);
            scoped(s.else_b);
            return;
        }
        case Stmt::Kind::While: {
            DataType t = expr(*s.expr);
            if (t.kind != K::Bool && t.kind != K::Any) err(s.expr->loc, "condition must be Bool");
            scoped(s.body);
            return;
        }
        }
    }

    void check_main() {
        auto& mb = p_.main;
        std::map<std::string, const Creation*> objs;
        for (auto& c : mb.creations) {
            if (objs.count(c.var)) err(c.loc, "duplicate object '" + c.var + "'");
            objs[c.var] = &c;
        }
        for (auto& c : mb.creations) {
            const ClassDecl* cd = p_.find_class(c.cls);
            if (!cd) {
                err(c.loc, "unknown class '" + c.cls + "'");
                continue;
            }
            if (cd->params.size() != c.args.size()) {
                err(c.loc, "class " + c.cls + " expects " + std::to_string(cd->params.size()) + " references");
                continue;
            }
            for (size_t i = 0; i < c.args.size(); ++i) {
                auto it = objs.find(c.args[i]);
                if (it == objs.end()) {
                    err(c.loc, "unknown object '" + c.args[i] + "'");
                } else if (it->second->cls != cd->params[i].type.cls) {
                    err(c.loc, "object '" + c.args[i] + "' is a " + it->second->cls + ", expected " + cd->params[i].type.cls);
                }
            }
        }
        auto it = objs.find(mb.target);
        if (it == objs.end()) {
            err(mb.loc, "initial call target '" + mb.target + "' is not created in main");
            return;
        }
        const MethodDecl* m = p_.find_class(it->second->cls) ? p_.find_class(it->second->cls)->find_method(mb.method) : nullptr;
        if (!m) {
            err(mb.loc, "class " + it->second->cls + " has no method '" + mb.method + "'");
            return;
        }
        if (m->params.size() != mb.args.size()) {
            err(mb.loc, "method " + m->qualified() + " expects " + std::to_string(m->params.size()) + " arguments");
            return;
        }
        scopes_.clear();
        scopes_.emplace_back();
        cls_ = nullptr;
        for (size_t i = 0; i < mb.args.size(); ++i) {
            DataType t = expr(*mb.args[i], true);
            if (!assignable(m->params[i].type, t)) err(mb.args[i]->loc, "initial argument has type " + to_string(t));
        }
    }
};

}  // namespace

void typecheck(Program& p) { Checker(p).run(); }

}  // namespace cao
