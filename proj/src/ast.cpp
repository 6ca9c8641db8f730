#include "cao/ast.hpp"
#include "cao/frontend.hpp"

#include <sstream>

namespace cao {

bool operator==(const DataType& a, const DataType& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == DataType::Kind::Class) return a.cls == b.cls;
    if (a.kind == DataType::Kind::List || a.kind == DataType::Kind::Fut) {
        if (!a.elem || !b.elem) return !a.elem && !b.elem;
        return *a.elem == *b.elem;
    }
    return true;
}

std::string to_string(const DataType& t) {
    switch (t.kind) {
    case DataType::Kind::Unit: return "Unit";
    case DataType::Kind::Int: return "Int";
    case DataType::Kind::Rat: return "Rat";
    case DataType::Kind::Bool: return "Bool";
    case DataType::Kind::List: return "List<" + (t.elem ? to_string(*t.elem) : "?") + ">";
    case DataType::Kind::Fut: return "Fut<" + (t.elem ? to_string(*t.elem) : "?") + ">";
    case DataType::Kind::Class: return t.cls;
    case DataType::Kind::Any: return "?";
    }
    return "?";
}

Value default_value(const DataType& t) {
    switch (t.kind) {
    case DataType::Kind::Int: return Value(BigInt(0));
    case DataType::Kind::Rat: return Value(BigInt(0));
    case DataType::Kind::Bool: return Value(false);
    case DataType::Kind::List: return Value(ValueList{});
    case DataType::Kind::Fut: return Value::never();
    default: return Value::unit();
    }
}

ExprPtr mk_lit(Value v, Loc l) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Lit;
    e->lit = std::move(v);
    e->loc = l;
    return e;
}
ExprPtr mk_var(std::string n, Loc l) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Var;
    e->name = std::move(n);
    e->loc = l;
    return e;
}
ExprPtr mk_field(std::string n, Loc l) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Field;
    e->name = std::move(n);
    e->loc = l;
    return e;
}
ExprPtr mk_unary(std::string op, ExprPtr a, Loc l) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Unary;
    e->op = std::move(op);
    e->a = std::move(a);
    e->loc = l;
    return e;
}
ExprPtr mk_binary(std::string op, ExprPtr a, ExprPtr b, Loc l) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Binary;
    e->op = std::move(op);
    e->a = std::move(a);
    e->b = std::move(b);
    e->loc = l;
    return e;
}

const MethodDecl* ClassDecl::find_method(const std::string& m) const {
    for (const auto& md : methods)
        if (md.name == m) return &md;
    return nullptr;
}

bool ClassDecl::is_ref(const std::string& f) const {
    for (const auto& p : params)
        if (p.name == f) return true;
    return false;
}

const ClassDecl* Program::find_class(const std::string& c) const {
    for (const auto& cd : classes)
        if (cd.name == c) return &cd;
    return nullptr;
}

const MethodDecl* Program::find_method(const std::string& q) const {
    auto dot = q.find('.');
    if (dot == std::string::npos) return nullptr;
    const ClassDecl* c = find_class(q.substr(0, dot));
    return c ? c->find_method(q.substr(dot + 1)) : nullptr;
}

const Creation* Program::find_creation(const std::string& var) const {
    for (const auto& c : main.creations)
        if (c.var == var) return &c;
    return nullptr;
}

void for_each_stmt(const Block& b, const std::function<void(const Stmt&)>& f) {
    for (const auto& s : b) {
        f(*s);
        for_each_stmt(s->then_b, f);
        for_each_stmt(s->else_b, f);
        for_each_stmt(s->body, f);
    }
}

std::vector<Param> method_locals(const MethodDecl& m) {
    std::vector<Param> out;
    for_each_stmt(m.body, [&](const Stmt& s) {
        if (s.is_decl) out.push_back({s.var, s.decl_type, s.loc});
    });
    return out;
}

// ---- printing ----

namespace {

int prec(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/") return 6;
    return 9;
}

std::string lit_text(const Value& v) {
    if (v.is_list()) {
        // only Nil appears as a list literal in source
        std::string s;
        int n = 0;
        for (const auto& x : v.as_list()) {
            s += "Cons(" + lit_text(x) + ", ";
            ++n;
        }
        s += "Nil";
        s += std::string(n, ')');
        return s;
    }
    if (v.is_rat()) return "(" + rat_to_string(v.as_rat()) + ")";
    return to_string(v);
}

std::string pexpr(const Expr& e, int ctx) {
    switch (e.kind) {
    case Expr::Kind::Lit: return lit_text(e.lit);
    case Expr::Kind::Var: return e.name;
    case Expr::Kind::Field: return "this." + e.name;
    case Expr::Kind::Unary:
        if (e.op == "-" || e.op == "!") return e.op + pexpr(*e.a, 8);
        return e.op + "(" + pexpr(*e.a, 0) + ")";
    case Expr::Kind::Binary: {
        if (e.op == "Cons") return "Cons(" + pexpr(*e.a, 0) + ", " + pexpr(*e.b, 0) + ")";
        int p = prec(e.op);
        // left associative: right operand needs strictly higher precedence
        std::string s = pexpr(*e.a, p) + " " + e.op + " " + pexpr(*e.b, p + 1);
        return p < ctx ? "(" + s + ")" : s;
    }
    }
    return "?";
}

void pblock(std::ostringstream& os, const Block& b, int ind);

void pstmt(std::ostringstream& os, const Stmt& s, int ind) {
    std::string pad(ind * 2, ' ');
    os << pad;
    auto lhs = [&]() {
        if (s.var.empty()) return std::string();
        return (s.is_decl ? to_string(s.decl_type) + " " : std::string()) + s.var + " = ";
    };
    switch (s.kind) {
    case Stmt::Kind::Skip: os << "skip;\n"; return;
    case Stmt::Kind::Assign: os << lhs() << pexpr(*s.expr, 0) << ";\n"; return;
    case Stmt::Kind::FieldAssign: os << "this." << s.field << " = " << pexpr(*s.expr, 0) << ";\n"; return;
    case Stmt::Kind::Get: os << lhs() << pexpr(*s.expr, 9) << ".get_" << s.pp << ";\n"; return;
    case Stmt::Kind::Call: {
        os << lhs() << s.target << "!" << s.method << "(";
        for (size_t i = 0; i < s.args.size(); ++i) os << (i ? ", " : "") << pexpr(*s.args[i], 0);
        os << ");\n";
        return;
    }
    case Stmt::Kind::Await:
        os << "await_" << s.pp << " " << pexpr(*s.expr, s.await_future ? 9 : 0) << (s.await_future ? "?" : "") << ";\n";
        return;
    case Stmt::Kind::Return: os << "return " << pexpr(*s.expr, 0) << ";\n"; return;
    case Stmt::Kind::If:
        os << "if (" << pexpr(*s.expr, 0) << ") {\n";
        pblock(os, s.then_b, ind + 1);
        os << pad << "}";
        if (!s.else_b.empty()) {
            os << " else {\n";
            pblock(os, s.else_b, ind + 1);
            os << pad << "}";
        }
        os << "\n";
        return;
    case Stmt::Kind::While:
        os << "while (" << pexpr(*s.expr, 0) << ") {\n";
        pblock(os, s.body, ind + 1);
        os << pad << "}\n";
        return;
    }
}

void pblock(std::ostringstream& os, const Block& b, int ind) {
    for (const auto& s : b) pstmt(os, *s, ind);
}

}  // namespace

std::string print_expr(const Expr& e) { return pexpr(e, 0); }

std::string print_block(const Block& b, int indent) {
    std::ostringstream os;
    pblock(os, b, indent);
    return os.str();
}

std::string print_program(const Program& p) {
    std::ostringstream os;
    for (const auto& c : p.classes) {
        os << "class " << c.name << "(";
        for (size_t i = 0; i < c.params.size(); ++i)
            os << (i ? ", " : "") << to_string(c.params[i].type) << " " << c.params[i].name;
        os << ") {\n";
        for (const auto& f : c.fields) {
            os << "  " << to_string(f.type) << " " << f.name;
            if (f.init) os << " = " << pexpr(*f.init, 0);
            os << ";\n";
        }
        for (const auto& m : c.methods) {
            os << "  " << to_string(m.ret) << " " << m.name << "(";
            for (size_t i = 0; i < m.params.size(); ++i)
                os << (i ? ", " : "") << to_string(m.params[i].type) << " " << m.params[i].name;
            os << ") {\n";
            pblock(os, m.body, 2);
            os << "  }\n";
        }
        os << "}\n\n";
    }
    os << "main {\n";
    for (const auto& c : p.main.creations) {
        os << "  " << c.cls << " " << c.var << " = " << c.cls << "(";
        for (size_t i = 0; i < c.args.size(); ++i) os << (i ? ", " : "") << c.args[i];
        os << ");\n";
    }
    os << "  " << p.main.target << "!" << p.main.method << "(";
    for (size_t i = 0; i < p.main.args.size(); ++i) os << (i ? ", " : "") << pexpr(*p.main.args[i], 0);
    os << ");\n}\n";
    return os.str();
}

namespace {

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind || a->op != b->op || a->name != b->name) return false;
    if (a->kind == Expr::Kind::Lit && !(a->lit == b->lit && a->lit.is_rat() == b->lit.is_rat())) return false;
    return same_expr(a->a, b->a) && same_expr(a->b, b->b);
}

bool same_block(const Block& a, const Block& b);

bool same_stmt(const Stmt& a, const Stmt& b) {
    if (a.kind != b.kind || a.var != b.var || a.is_decl != b.is_decl || a.field != b.field || a.target != b.target ||
        a.method != b.method || a.pp != b.pp || a.await_future != b.await_future)
        return false;
    if (a.is_decl && !(a.decl_type == b.decl_type)) return false;
    if (!same_expr(a.expr, b.expr) || a.args.size() != b.args.size()) return false;
    for (size_t i = 0; i < a.args.size(); ++i)
        if (!same_expr(a.args[i], b.args[i])) return false;
    return same_block(a.then_b, b.then_b) && same_block(a.else_b, b.else_b) && same_block(a.body, b.body);
}

bool same_block(const Block& a, const Block& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!same_stmt(*a[i], *b[i])) return false;
    return true;
}

bool same_params(const std::vector<Param>& a, const std::vector<Param>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].name != b[i].name || !(a[i].type == b[i].type)) return false;
    return true;
}

}  // namespace

bool same_program(const Program& a, const Program& b) {
    if (a.classes.size() != b.classes.size()) return false;
    for (size_t i = 0; i < a.classes.size(); ++i) {
        const auto &x = a.classes[i], &y = b.classes[i];
        if (x.name != y.name || !same_params(x.params, y.params) || x.fields.size() != y.fields.size() ||
            x.methods.size() != y.methods.size())
            return false;
        for (size_t j = 0; j < x.fields.size(); ++j)
            if (x.fields[j].name != y.fields[j].name || !(x.fields[j].type == y.fields[j].type) ||
                !same_expr(x.fields[j].init, y.fields[j].init))
                return false;
        for (size_t j = 0; j < x.methods.size(); ++j) {
            const auto &m = x.methods[j], &n = y.methods[j];
            if (m.name != n.name || !(m.ret == n.ret) || !same_params(m.params, n.params) || !same_block(m.body, n.body))
                return false;
        }
    }
    const auto &m = a.main, &n = b.main;
    if (m.target != n.target || m.method != n.method || m.creations.size() != n.creations.size() ||
        m.args.size() != n.args.size())
        return false;
    for (size_t i = 0; i < m.creations.size(); ++i)
        if (m.creations[i].cls != n.creations[i].cls || m.creations[i].var != n.creations[i].var ||
            m.creations[i].args != n.creations[i].args)
            return false;
    for (size_t i = 0; i < m.args.size(); ++i)
        if (!same_expr(m.args[i], n.args[i])) return false;
    return true;
}

std::string Diagnostic::str() const {
    std::ostringstream os;
    os << file << ":" << loc.line << ":" << loc.col << ": " << message;
    return os.str();
}

namespace {
std::string join_diags(const std::vector<Diagnostic>& ds) {
    std::string s;
    for (const auto& d : ds) s += (s.empty() ? "" : "\n") + d.str();
    return s;
}
}  // namespace

FrontendError::FrontendError(std::vector<Diagnostic> ds) : std::runtime_error(join_diags(ds)), diags_(std::move(ds)) {}

}  // namespace cao
