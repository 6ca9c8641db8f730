#pragma once

#include "cao/btypes.hpp"

#include <map>
#include <string>
#include <vector>

namespace cao {

// ---- updates ----

// Parallel substitution over program variables, `heap` and `result`.
struct Update {
    std::map<std::string, TermPtr> m;
};
Update upd_assign(const std::string& v, TermPtr t);
// U1 || U2: U2 wins on clashes.
Update upd_parallel(const Update& a, const Update& b);
// {U1}{U2}: U2's right-hand sides are evaluated under U1.
Update upd_seq(const Update& a, const Update& b);
std::string to_string(const Update& u);

TermPtr apply_update(const Update& u, const TermPtr& t);
FormulaPtr apply_update(const Update& u, const FormulaPtr& f);

// select/store, list constructor and constant folding.
TermPtr simplify(const TermPtr& t);
FormulaPtr simplify(const FormulaPtr& f);

// ---- verification conditions ----

// Variable sorts; fields are keyed "@f". Unlisted variables are treated as rationals.
using SortMap = std::map<std::string, Sort>;

enum class Validity { Valid, Invalid, Unknown };
const char* validity_name(Validity v);

struct VcResult {
    Validity v = Validity::Unknown;
    std::map<std::string, std::string> model;  // counterexample, printed values
    std::string reason;
};

// Decides gamma => phi. Never answers Valid or Invalid wrongly.
VcResult discharge_vc(const std::vector<FormulaPtr>& gamma, const FormulaPtr& phi, const SortMap& sorts = {});
std::string to_smtlib(const std::vector<FormulaPtr>& gamma, const FormulaPtr& phi, const SortMap& sorts = {});

// ---- proofs ----

enum class Verdict { Proved, Refuted, Unknown };
const char* verdict_name(Verdict v);

struct ProofNode {
    std::string rule;
    std::string sequent;
    std::string note;
    Verdict status = Verdict::Unknown;
    bool any = false;  // alternatives (backtracking) instead of premises
    bool is_vc = false;
    std::vector<std::string> hyps;
    std::string goal;
    SortMap sorts;
    VcResult vc;
    std::vector<ProofNode> children;
};

nlohmann::json to_json(const ProofNode& n);
ProofNode proof_from_json(const nlohmann::json& j);
// Re-discharges every VC leaf and recombines; rule applications are taken as recorded.
Verdict replay(const ProofNode& n);
void collect_vcs(const ProofNode& n, std::vector<const ProofNode*>& out);

struct ProofResult {
    std::string method;
    Verdict verdict = Verdict::Unknown;
    ProofNode tree;
    std::vector<std::string> open;  // unresolved obligations, human readable
};

// Obligation scheme plus annotations, with inferred types woven in.
struct Scheme {
    const Program* program = nullptr;
    SpecFile spec;
    std::map<std::string, Protocol> types;
    TypeEnv env;
    PointsTo pt;
};
Scheme make_scheme(const Program& p, const SpecFile& spec);

ProofResult prove_method(const Scheme& s, const std::string& method);

// {pre} body {post} for a method body, by symbolic execution (post may mention result).
ProofResult prove_pst(const Scheme& s, const std::string& method, const FormulaPtr& pre, const FormulaPtr& post);
// Same for a bare block with explicit sorts (no loops need invariants unless given).
ProofResult prove_pst_block(const Program& p, const ClassDecl& c, const MethodDecl& m, const Block& b,
                            const FormulaPtr& pre, const FormulaPtr& post);

struct ConsistencyItem {
    std::string what;
    Validity result = Validity::Unknown;
    std::string detail;
};
struct ConsistencyReport {
    bool ok = true;
    std::vector<ConsistencyItem> items;
};
ConsistencyReport check_consistency(const Scheme& s);

MTypePtr infer_skeleton(const MethodDecl& m, const Program& p);
// Adds pre and invariant to the receive, post and invariant to every termination,
// callee preconditions to call actions. The constructor `run` gets the invariant only at termination.
Protocol weave_contract(const std::string& method, const MTypePtr& L, const FormulaPtr& pre, const FormulaPtr& post,
                        const FormulaPtr& inv, bool ctor,
                        const std::map<std::string, FormulaPtr>& callee_pre = {});

nlohmann::json to_json(const ProofResult& r);
nlohmann::json to_json(const ConsistencyReport& r);

}  // namespace cao
