#pragma once

#include "cao/ast.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace cao {

struct Diagnostic {
    std::string file;
    Loc loc;
    std::string message;

    std::string str() const;  // file:line:col: message
};

class FrontendError : public std::runtime_error {
public:
    explicit FrontendError(std::vector<Diagnostic> ds);
    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

private:
    std::vector<Diagnostic> diags_;
};

// Syntax only; program-point ids of get/await are completed in pre-order.
Program parse_program(const std::string& text, const std::string& file = "<input>");
Program parse_file(const std::string& path);

// Annotates expression types and call targets; throws FrontendError.
void typecheck(Program& p);
// Appends skip to branches and loop bodies, inserts missing else branches.
void desugar(Program& p);
// Structural constraints: unique names, single final return, skip-terminated branches,
// no assignment to parameters or reference fields, unique program points.
std::vector<Diagnostic> check_wellformed(const Program& p);

// parse + typecheck + desugar + wellformedness; throws FrontendError.
Program load_program(const std::string& text, const std::string& file = "<input>");
Program load_file(const std::string& path);

std::string print_program(const Program& p);
std::string print_expr(const Expr& e);
std::string print_block(const Block& b, int indent = 0);

// Structural AST equality ignoring source locations and inferred types.
bool same_program(const Program& a, const Program& b);

// Locals of a method in declaration order (params excluded).
std::vector<Param> method_locals(const MethodDecl& m);

}  // namespace cao
