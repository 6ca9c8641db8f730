#pragma once

#include "cao/value.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace cao {

struct Loc {
    int line = 0;
    int col = 0;
};

struct DataType {
    // Any is the element wildcard used for Nil and Never before inference.
    enum class Kind { Unit, Int, Rat, Bool, List, Fut, Class, Any };
    Kind kind = Kind::Any;
    std::shared_ptr<const DataType> elem;
    std::string cls;

    static DataType unit() { return {Kind::Unit, nullptr, ""}; }
    static DataType int_() { return {Kind::Int, nullptr, ""}; }
    static DataType rat() { return {Kind::Rat, nullptr, ""}; }
    static DataType bool_() { return {Kind::Bool, nullptr, ""}; }
    static DataType any() { return {Kind::Any, nullptr, ""}; }
    static DataType list(DataType e) { return {Kind::List, std::make_shared<DataType>(std::move(e)), ""}; }
    static DataType fut(DataType e) { return {Kind::Fut, std::make_shared<DataType>(std::move(e)), ""}; }
    static DataType class_(std::string c) { return {Kind::Class, nullptr, std::move(c)}; }

    bool is_numeric() const { return kind == Kind::Int || kind == Kind::Rat; }
};

bool operator==(const DataType& a, const DataType& b);
std::string to_string(const DataType& t);
// Default value of a data type; class types have none.
Value default_value(const DataType& t);

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
    enum class Kind { Lit, Var, Field, Unary, Binary };
    Kind kind = Kind::Lit;
    Loc loc;
    Value lit;         // Lit
    std::string name;  // Var / Field
    // Unary: "-", "!", "len", "hd", "tl"; Binary: arithmetic, comparison, "&&", "||", "Cons"
    std::string op;
    ExprPtr a, b;
    DataType type = DataType::any();  // filled by typecheck
};

ExprPtr mk_lit(Value v, Loc l = {});
ExprPtr mk_var(std::string n, Loc l = {});
ExprPtr mk_field(std::string n, Loc l = {});
ExprPtr mk_unary(std::string op, ExprPtr a, Loc l = {});
ExprPtr mk_binary(std::string op, ExprPtr a, ExprPtr b, Loc l = {});

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct Stmt {
    enum class Kind { Skip, Assign, FieldAssign, Get, Call, Await, Return, If, While };
    Kind kind = Kind::Skip;
    Loc loc;
    std::string var;  // assigned variable (may be empty for a bare call)
    bool is_decl = false;
    DataType decl_type = DataType::any();
    std::string field;  // FieldAssign
    ExprPtr expr;       // rhs / future of get / guard / returned value / if+while condition
    // Call
    std::string target;       // reference field holding the callee
    std::string callee_class; // resolved by typecheck
    std::string method;
    std::vector<ExprPtr> args;
    // Get / Await
    int pp = -1;
    bool pp_explicit = false;
    bool await_future = false;  // await e?  vs  await e
    Block then_b, else_b, body;
};

struct Param {
    std::string name;
    DataType type;
    Loc loc;
};

struct FieldDecl {
    std::string name;
    DataType type;
    ExprPtr init;  // may be null
    Loc loc;
};

struct MethodDecl {
    DataType ret;
    std::string name;
    std::string cls;
    std::vector<Param> params;
    Block body;
    Loc loc;

    std::string qualified() const { return cls + "." + name; }
};

struct ClassDecl {
    std::string name;
    std::vector<Param> params;  // reference fields
    std::vector<FieldDecl> fields;
    std::vector<MethodDecl> methods;
    Loc loc;

    const MethodDecl* find_method(const std::string& m) const;
    bool is_ref(const std::string& f) const;
};

struct Creation {
    std::string cls;
    std::string var;
    std::vector<std::string> args;
    Loc loc;
};

struct MainBlock {
    std::vector<Creation> creations;
    std::string target;
    std::string method;
    std::vector<ExprPtr> args;
    Loc loc;
};

struct Program {
    std::string file;
    std::vector<ClassDecl> classes;
    MainBlock main;

    const ClassDecl* find_class(const std::string& c) const;
    // "C.m" lookup
    const MethodDecl* find_method(const std::string& qualified) const;
    const Creation* find_creation(const std::string& var) const;
};

// Statement traversal helpers.
void for_each_stmt(const Block& b, const std::function<void(const Stmt&)>& f);

}  // namespace cao
