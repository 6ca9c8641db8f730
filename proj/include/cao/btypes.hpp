#pragma once

#include "cao/global.hpp"
#include "cao/logic.hpp"

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cao {

struct MType;
using MTypePtr = std::shared_ptr<const MType>;

// Method types: X!m(phi), down(phi), skip, L.L, L*, +{L..}, &(ms,phi){L1,L2}.
struct MType {
    enum class Kind { Call, Term, Skip, Seq, Star, Choice, Branch };
    Kind kind = Kind::Skip;
    std::string role;    // Call
    std::string method;  // Call: qualified callee
    FormulaPtr phi;      // Call / Term / Branch condition
    std::vector<std::string> methods;  // Branch resolvers
    bool any_method = false;           // Branch over all methods (M)
    std::vector<MTypePtr> sub;         // Seq: 2, Star: 1, Choice: n >= 1, Branch: 2
};

MTypePtr mt_call(std::string role, std::string method, FormulaPtr phi);
MTypePtr mt_term(FormulaPtr phi);
MTypePtr mt_skip();
MTypePtr mt_seq(MTypePtr a, MTypePtr b);
MTypePtr mt_seq(const std::vector<MTypePtr>& xs);
MTypePtr mt_star(MTypePtr a);
MTypePtr mt_choice(std::vector<MTypePtr> xs);
MTypePtr mt_branch(std::vector<std::string> methods, bool any, FormulaPtr phi, MTypePtr l1, MTypePtr l2);

std::string to_string(const MTypePtr& t);
int depth(const MTypePtr& t);

// ?m(phi).L
struct Protocol {
    std::string method;
    FormulaPtr pre;
    MTypePtr body;
};
std::string to_string(const Protocol& p);

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

MTypePtr parse_mtype(const std::string& text);
Protocol parse_protocol(const std::string& text);

struct Role {
    std::string name;
    std::string field;
};

struct LoopInvariant {
    std::string method;
    int line = 0;     // source line of the while, or 0
    int ordinal = 0;  // 1-based pre-order index of the while in the method, or 0
    FormulaPtr inv;
};

struct Contract {
    FormulaPtr pre, post;
};

// Contents of a .btype file.
struct SpecFile {
    std::vector<Role> roles;
    std::map<std::string, Protocol> types;
    std::vector<LoopInvariant> loop_invariants;
    std::map<std::string, Contract> contracts;
    std::map<std::string, FormulaPtr> class_invariants;
    std::map<std::string, FormulaPtr> assumptions;  // callee postconditions usable at gets
    std::vector<std::string> infer;                 // methods whose type is inferred and woven
};
SpecFile parse_spec(const std::string& text, const std::string& file = "<spec>");
SpecFile load_spec(const std::string& path);

// Role fields and callee parameter names needed by the translations.
struct TypeEnv {
    std::vector<Role> roles;
    std::map<std::string, std::vector<std::string>> params;
    std::vector<std::string> methods;
    static TypeEnv of(const Program& p, const std::vector<Role>& roles);
};

FormulaPtr alpha_pst(const FormulaPtr& phi);
// The read is the first event of the statement's trace.
FormulaPtr alpha_p2(const std::set<std::string>& ms);
// Evaluated on the slice after invREv (position 1 is the state after the receive).
FormulaPtr alpha_met(const MTypePtr& L, const TypeEnv& env);

// Structural matcher on the same slice; equals eval_mso(alpha_met(L)) when that is definite.
TV match_trace(const LocalTrace& slice, const MTypePtr& L, const TypeEnv& env, const EvalConfig& cfg = {});
// Slice of a full method trace after its invREv.
LocalTrace after_receive(const LocalTrace& theta);

MTypePtr normalize(const MTypePtr& L);

// ---- points-to ----

struct PointsTo {
    std::map<int, std::set<std::string>> sites;  // get program point -> resolving methods
};
PointsTo points_to_all(const Program& p);
// throws SpecError on an unknown get site
std::set<std::string> points_to(const Program& p, int site);

nlohmann::json to_json(const PointsTo& pt);

}  // namespace cao
