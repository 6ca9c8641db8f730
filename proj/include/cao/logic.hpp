#pragma once

#include "cao/trace.hpp"

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cao {

// Three-valued verdicts: the evaluator is a tester over finite carriers.
enum class TV { False, True, Unknown };
TV tv_not(TV a);
TV tv_and(TV a, TV b);
TV tv_or(TV a, TV b);
const char* tv_name(TV t);

struct LogicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Sort {
    // Pos is the sort of trace positions; Obj/Method/Fut are finite carriers.
    enum class Kind { Int, Rat, Bool, Nat, Pos, Fut, Obj, Method, Any, List, Heap, Unit };
    Kind kind = Kind::Any;
    std::string cls;  // class name for Obj, if given
    bool operator==(const Sort&) const = default;
};
std::string to_string(const Sort& s);
Sort sort_of(const DataType& t);

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    // Var: logical variable, else program variable (incl. heap, result) of the state in scope.
    // FieldName: bare field name as argument of select/store.
    // Method: method-name constant C.m. Wild: '_' (only inside event terms, desugared away).
    enum class Kind { Var, Const, FieldName, Method, App, Wild };
    Kind kind = Kind::Const;
    std::string name;  // Var / FieldName / Method / App function symbol
    Value val;         // Const
    std::vector<TermPtr> args;
};

TermPtr t_var(std::string n);
TermPtr t_const(Value v);
TermPtr t_field(std::string f);  // select(heap, f)
TermPtr t_method(std::string m);
TermPtr t_app(std::string f, std::vector<TermPtr> args);
TermPtr t_wild();

// Event term. kind empty = diamond.
struct EvTerm {
    bool diamond = false;
    Event::Kind kind = Event::Kind::NoEv;
    std::vector<TermPtr> args;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    enum class Kind {
        True, False,
        Atom,      // boolean term holds
        Eq,        // t = t'
        Not, And, Or, Implies, Iff,
        Exists, Forall,        // first-order, var : sort
        ExistsSet, ForallSet,  // monadic second-order over positions
        Subset,    // t subseteq t'   (singleton(t) for membership)
        EvAt,      // [t] = evt
        StateAt,   // [t] |- phi
        Pred,      // isEvent / isState / is<Kind>
    };
    Kind kind = Kind::True;
    std::vector<TermPtr> t;
    std::vector<FormulaPtr> sub;
    std::string var;  // bound variable / predicate name
    Sort sort;
    std::shared_ptr<const EvTerm> ev;
    // The bound variable is pinned to a value occurring in the trace, so enumerating
    // the trace's values is complete.
    bool anchored = false;
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_atom(TermPtr t);
FormulaPtr f_eq(TermPtr a, TermPtr b);
FormulaPtr f_cmp(const std::string& op, TermPtr a, TermPtr b);  // atom of a relational term
FormulaPtr f_not(FormulaPtr a);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_and(const std::vector<FormulaPtr>& xs);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(const std::vector<FormulaPtr>& xs);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b);
// Quantifiers detect anchoring syntactically.
FormulaPtr f_exists(std::string v, Sort s, FormulaPtr body);
FormulaPtr f_forall(std::string v, Sort s, FormulaPtr body);
FormulaPtr f_exists_set(std::string v, FormulaPtr body);
FormulaPtr f_forall_set(std::string v, FormulaPtr body);
FormulaPtr f_member(TermPtr x, const std::string& set);
FormulaPtr f_subset(TermPtr a, TermPtr b);
FormulaPtr f_evat(TermPtr pos, EvTerm ev);
FormulaPtr f_stateat(TermPtr pos, FormulaPtr phi);
FormulaPtr f_pred(std::string name, TermPtr pos);

// ---- syntax ----

FormulaPtr parse_formula(const std::string& text);
TermPtr parse_term(const std::string& text);
std::string to_string(const TermPtr& t);
std::string to_string(const FormulaPtr& f);
// Translation of a program expression into a term (boolean expressions via f_atom).
TermPtr term_of_expr(const Expr& e);
FormulaPtr formula_of_expr(const Expr& e);

// ---- manipulation ----

std::set<std::string> free_vars(const FormulaPtr& f);
std::set<std::string> free_vars(const TermPtr& t);
// Capture-free for the formulas we build: bound names are never substituted.
TermPtr subst(const TermPtr& t, const std::map<std::string, TermPtr>& m);
FormulaPtr subst(const FormulaPtr& f, const std::map<std::string, TermPtr>& m);
// Wildcards inside event terms become existentials around the event atom.
FormulaPtr desugar_wildcards(const FormulaPtr& f);
// Restricts every quantifier over sort `s` to positions satisfying guard(var).
FormulaPtr relativize(const FormulaPtr& psi, const Sort& s, const std::string& var, const FormulaPtr& guard);
// Negation normal form (implications and iffs expanded).
FormulaPtr nnf(const FormulaPtr& f);
bool mentions_var(const FormulaPtr& f, const std::string& v);

// ---- evaluation ----

struct LVal {
    enum class Kind { Val, Heap, Method, Set, Expr };
    Kind kind = Kind::Val;
    Value v;
    std::map<std::string, Value> heap;
    std::string s;  // method name / printed guard
    std::set<long> set;

    static LVal of(Value x) { return LVal{Kind::Val, std::move(x), {}, {}, {}}; }
    static LVal method(std::string m) { return LVal{Kind::Method, {}, {}, std::move(m), {}}; }
};
bool operator==(const LVal& a, const LVal& b);
std::string to_string(const LVal& v);

using Beta = std::map<std::string, LVal>;

struct EvalConfig {
    int halo = 8;         // numeric carriers: occurring ints +- halo
    int subset_cap = 16;  // full subset enumeration up to this many positions
    std::vector<std::string> methods;  // extra carrier elements
    std::vector<std::string> objects;
};

// pre: st concrete. LogicError on ill-sorted or unsupported terms (anon in ground evaluation).
TV eval_fos(const FormulaPtr& phi, const ObjState& st, const Beta& beta = {}, const EvalConfig& cfg = {});
// pre: theta concrete. Positions start at 1.
TV eval_mso(const FormulaPtr& psi, const LocalTrace& theta, const Beta& beta = {}, const EvalConfig& cfg = {});

// Trace slice from position a to b inclusive (1-based), sc dropped.
LocalTrace slice(const LocalTrace& t, size_t a, size_t b);

}  // namespace cao
