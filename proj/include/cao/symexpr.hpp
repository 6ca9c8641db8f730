#pragma once

#include "cao/ast.hpp"
#include "cao/value.hpp"

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace cao {

struct Sym;
using SymPtr = std::shared_ptr<const Sym>;

// Symbolic expression. Ground leaves are semantic values; Var is a symbolic value
// (globally unique id), Field is a symbolic field this.f_k of heap counter k.
struct Sym {
    enum class Kind { Val, Var, Field, Unary, Binary };
    Kind kind = Kind::Val;
    Value val;
    uint64_t id = 0;
    std::string name;  // display name of Var, field name of Field
    int counter = 0;
    std::string op;
    SymPtr a, b;
    bool ground = true;
};

SymPtr s_val(Value v);
SymPtr s_var(uint64_t id, std::string name);
SymPtr s_field(std::string f, int counter);
// Smart constructors: fold ground subterms, normalize sums and negated comparisons.
// nullptr = undefined (division by zero, hd/tl of an empty list, type clash).
SymPtr s_unary(const std::string& op, const SymPtr& a);
SymPtr s_binary(const std::string& op, const SymPtr& a, const SymPtr& b);

inline bool is_ground(const SymPtr& e) { return e->ground; }
bool is_true(const SymPtr& e);
bool is_false(const SymPtr& e);

int compare(const SymPtr& a, const SymPtr& b);
inline bool sym_eq(const SymPtr& a, const SymPtr& b) { return a == b || compare(a, b) == 0; }
struct SymLess {
    bool operator()(const SymPtr& a, const SymPtr& b) const { return compare(a, b) < 0; }
};
using SymSet = std::set<SymPtr, SymLess>;

// $name for symbolic values, $this.f_k for symbolic fields.
std::string to_string(const SymPtr& e);

// Leaves of kind Var/Field occurring in e.
struct Atom {
    bool field = false;
    uint64_t id = 0;
    std::string name;
    int counter = 0;
    auto operator<=>(const Atom&) const = default;
};
Atom atom_of(const Sym& leaf);
std::string to_string(const Atom& a);
void collect_atoms(const SymPtr& e, std::set<Atom>& out);
bool mentions_atoms(const SymPtr& e);

// Rebuilds e bottom-up, replacing Var/Field leaves for which f returns non-null.
// Returns nullptr if the rebuilt expression is undefined.
SymPtr substitute(const SymPtr& e, const std::function<SymPtr(const Sym&)>& f);
using AtomMap = std::map<Atom, SymPtr>;
SymPtr substitute(const SymPtr& e, const AtomMap& m);

// Object state (sigma, rho). rho includes reference fields.
struct ObjState {
    std::map<std::string, SymPtr> sigma;
    std::map<std::string, SymPtr> rho;
};
bool heap_eq(const std::map<std::string, SymPtr>& a, const std::map<std::string, SymPtr>& b);
bool operator==(const ObjState& a, const ObjState& b);
int compare(const ObjState& a, const ObjState& b);
bool is_concrete(const ObjState& s);
std::string to_string(const ObjState& s);

// Fresh symbolic values and heap counters; an explicit value, never global.
class FreshGen {
public:
    SymPtr fresh(const std::string& base);
    int fresh_heap() { return next_heap_++; }
    uint64_t peek_id() const { return next_id_; }

private:
    uint64_t next_id_ = 1;
    int next_heap_ = 1;
    std::map<std::string, int> names_;
};

// Expression evaluation over an object state. nullptr = undefined.
SymPtr eval_expr(const Expr& e, const ObjState& s);

}  // namespace cao
