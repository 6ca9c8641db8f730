#pragma once

#include "cao/ast.hpp"
#include "cao/trace.hpp"

#include <string>
#include <vector>

namespace cao {

struct LocalOptions {
    int unroll = 8;  // per-loop consecutive unrollings
    // Branches whose condition is ground False can never be selected; drop them early.
    bool prune_false = true;
};

struct LocalDiag {
    bool budget_exhausted = false;
    std::vector<std::string> stuck;  // undefined expression evaluations
};

using Heap = std::map<std::string, SymPtr>;

// Heap mapping every field to this.f_k and every reference as in refs.
Heap rho_id(const ClassDecl& c, int k, const Heap& refs);
// Fields at their initializers (type defaults when absent), references as given.
Heap initial_heap(const ClassDecl& c, const std::map<std::string, std::string>& refs);
// Parameters bound to args, every other local at its type default.
ObjState entry_state(const MethodDecl& m, const std::vector<SymPtr>& args, const Heap& rho);

std::vector<LocalTrace> stmt_traces(const Program& p, const ClassDecl& c, const MethodDecl& m, const Block& b, SymPtr X,
                                    SymPtr fut, const ObjState& st, FreshGen& gen, const LocalOptions& opt = {},
                                    LocalDiag* diag = nullptr);

// Every body trace prefixed with <state, invREv(X, fut, m, args), state>.
std::vector<LocalTrace> method_traces(const Program& p, const ClassDecl& c, const MethodDecl& m, SymPtr X, SymPtr fut,
                                      const ObjState& st, FreshGen& gen, const LocalOptions& opt = {},
                                      LocalDiag* diag = nullptr);

// Fully symbolic context: symbolic object, future, parameters and heap counter 1.
std::vector<LocalTrace> symbolic_method_traces(const Program& p, const ClassDecl& c, const MethodDecl& m,
                                               FreshGen& gen, const LocalOptions& opt = {}, LocalDiag* diag = nullptr);

}  // namespace cao
