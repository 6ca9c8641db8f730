#include "cao/frontend.hpp"
#include "cao/symexpr.hpp"

#include "doctest.h"
#include "support.hpp"

using namespace cao;

namespace {

// True if loading fails with a diagnostic containing the fragment.
bool rejects(const std::string& src, const std::string& fragment) {
    try {
        load_program(src);
    } catch (const FrontendError& e) {
        for (const auto& d : e.diagnostics())
            if (d.message.find(fragment) != std::string::npos) return true;
        return false;
    }
    return false;
}

const char* kTiny = "class K() { Int f = 0; Int m(Int i) { return this.f + i; } } main { K k = K(); k!m(1); }";

}  // namespace

TEST_SUITE("frontend") {

TEST_CASE("every corpus program loads and survives a print/parse round trip") {
    auto files = testsupport::corpus_programs();
    REQUIRE(files.size() >= 10);
    for (const auto& f : files) {
        CAPTURE(f);
        Program p = load_file(f);
        Program q = load_program(print_program(p));
        CHECK(same_program(p, q));
        // printing is a fixpoint after one round
        CHECK(print_program(q) == print_program(p));
    }
}

TEST_CASE("expressions print with minimal parentheses") {
    Program p = load_program(
        "class K() { Int f = 0; Int m(Int i) { Int a = (i - 1) - (2 - i); Bool b = !(i > 0) && i < 3; "
        "return this.f + i + hd(Cons(2, Nil)); } } main { K k = K(); k!m(1); }");
    const auto& body = p.classes[0].methods[0].body;
    CHECK(print_expr(*body[0]->expr) == "i - 1 - (2 - i)");
    CHECK(print_expr(*body[1]->expr) == "!(i > 0) && i < 3");
    CHECK(print_expr(*body.back()->expr) == "this.f + i + hd(Cons(2, Nil))");
}

TEST_CASE("the worked expression evaluates under the three state/heap pairs") {
    Program p = load_program(
        "class K() { Int f = 0; Int m(Int i) { return this.f+i+hd(Cons(2,Nil)); } } main { K k = K(); k!m(1); }");
    const Expr& e = *p.classes[0].methods[0].body.back()->expr;
    FreshGen g;
    ObjState concrete{{{"i", s_val(1)}}, {{"f", s_val(2)}}};
    ObjState sym_heap{{{"i", s_val(1)}}, {{"f", s_field("f", 1)}}};
    ObjState sym_both{{{"i", g.fresh("i")}}, {{"f", s_field("f", 1)}}};
    CHECK(to_string(eval_expr(e, concrete)) == "5");
    CHECK(to_string(eval_expr(e, sym_heap)) == "$this.f_1 + 3");
    CHECK(to_string(eval_expr(e, sym_both)) == "$this.f_1 + $i + 2");
}

TEST_CASE("undefined expressions evaluate to null") {
    ObjState s{{{"i", s_val(0)}, {"l", s_val(Value::list({}))}}, {}};
    Program p = load_program(
        "class K() { Int m(Int i) { List<Int> l = Nil; Rat a = 3 / i; Int b = hd(l); return b; } } "
        "main { K k = K(); k!m(1); }");
    const auto& body = p.classes[0].methods[0].body;
    CHECK(eval_expr(*body[1]->expr, s) == nullptr);
    CHECK(eval_expr(*body[2]->expr, s) == nullptr);
}

TEST_CASE("well-formedness violations are reported with locations") {
    CHECK(rejects("class K() { Int m(Int i) { i = 2; return i; } } main { K k = K(); k!m(1); }", "parameter"));
    CHECK(rejects("class K() { Int m(Int i) { Int x = 1; return x; } Int n(Int x) { return x; } } "
                  "main { K k = K(); k!m(1); }",
                  "unique"));
    CHECK(rejects("class K() { Int m(Int i) { Int x = 1; } } main { K k = K(); k!m(1); }", "return"));
    CHECK(rejects("class K() { Int m(Int i) { return True; } } main { K k = K(); k!m(1); }", ""));
    CHECK(rejects("class K() { Int m(Int i) { return i; } } main { K k = K(); k!m(1); k!m(2); }", "initial call"));
    try {
        load_program("class K() {\n  Int m(Int i) {\n    i = 2;\n    return i;\n  }\n}\nmain { K k = K(); k!m(1); }",
                     "x.cao");
        FAIL("expected a diagnostic");
    } catch (const FrontendError& e) {
        REQUIRE(!e.diagnostics().empty());
        CHECK(e.diagnostics()[0].loc.line == 3);
        CHECK(e.diagnostics()[0].str().rfind("x.cao:3:", 0) == 0);
    }
}

TEST_CASE("type errors are rejected") {
    CHECK(rejects("class K() { Int m(Int i) { Bool b = i + 1; return i; } } main { K k = K(); k!m(1); }", ""));
    CHECK(rejects("class K() { Int m(Int i) { Int x = y; return x; } } main { K k = K(); k!m(1); }", ""));
    CHECK(rejects("class K(L o) { Int m(Int i) { return i; } } main { K k = K(k); k!m(1); }", ""));
}

TEST_CASE("get and await sites receive unique pre-order program points") {
    Program p = load_file(testsupport::corpus("await_bool.cao"));
    std::set<int> pps;
    size_t sites = 0;
    for (const auto& c : p.classes)
        for (const auto& m : c.methods)
            for_each_stmt(m.body, [&](const Stmt& s) {
                if (s.kind == Stmt::Kind::Get || s.kind == Stmt::Kind::Await) {
                    ++sites;
                    pps.insert(s.pp);
                }
            });
    CHECK(sites == 3);
    CHECK(pps.size() == sites);
}

TEST_CASE("desugaring is idempotent") {
    Program p = load_program(kTiny);
    std::string once = print_program(p);
    desugar(p);
    CHECK(print_program(p) == once);
}

}  // TEST_SUITE
