#include "cao/logic.hpp"

#include "doctest.h"
#include "gen.hpp"

using namespace cao;

namespace {

Beta ints(std::initializer_list<std::pair<const char*, int>> xs) {
    Beta b;
    for (const auto& [k, v] : xs) b[k] = LVal::of(Value(v));
    return b;
}

LocalTrace small_trace() {
    // <x=0>, invEv, <x=1>, noEv, <x=2>, futEv(.., 7), <x=2>
    auto st = [](int x) {
        ObjState s;
        s.sigma["x"] = s_val(Value(x));
        s.rho["f"] = s_val(Value(x * 10));
        return s;
    };
    Event call;
    call.kind = Event::Kind::InvEv;
    call.obj = s_val(Value::object("X"));
    call.callee = s_val(Value::object("Y"));
    call.fut = s_val(Value::future(2));
    call.method = "D.work";
    call.args = {s_val(Value(4))};
    Event done;
    done.kind = Event::Kind::FutEv;
    done.obj = s_val(Value::object("X"));
    done.fut = s_val(Value::future(1));
    done.method = "C.go";
    done.val = s_val(Value(7));
    LocalTrace t;
    t.hs = {st(0), call, st(1), Event::noev(), st(2), done, st(2)};
    return t;
}

}  // namespace

TEST_SUITE("logic") {

TEST_CASE("formulas print and re-parse to the same text") {
    for (const char* s : {"x >= 0 & y < x + 1", "!(a = b) | c != 2", "forall i:I. isEvent(i) -> [i] = noEv",
                          "exists X sub I. forall x in X. isState(x)", "[1] |- this.f > 0",
                          "exists v:Any. [last - 1] = futEv(_, _, _, v) & [last] |- v >= 0"}) {
        CAPTURE(s);
        FormulaPtr f = parse_formula(s);
        CHECK(to_string(parse_formula(to_string(f))) == to_string(f));
    }
}

TEST_CASE("first-order evaluation over a concrete state") {
    ObjState s;
    s.sigma["v"] = s_val(Value(1));
    s.rho["f"] = s_val(Value::list({Value(0), Value(2)}));
    CHECK(eval_fos(parse_formula("exists i:N. this.f[i] > 0 & v + i = this.f[i]"), s) == TV::True);
    CHECK(eval_fos(parse_formula("v + 1 = 2 & len(this.f) = 2"), s) == TV::True);
    CHECK(eval_fos(parse_formula("select(store(heap, f, 7), f) = 7"), s) == TV::True);
    CHECK(eval_fos(parse_formula("v > w"), s, ints({{"w", 3}})) == TV::False);
    // quantifier over an unbounded sort that finds no witness in the halo stays open
    CHECK(eval_fos(parse_formula("exists i:Int. i > 1000 * v + 1000"), s) == TV::Unknown);
}

TEST_CASE("MSO evaluation over positions") {
    LocalTrace t = small_trace();
    CHECK(eval_mso(parse_formula("[2] = invEv(_, _, _, D.work, 4)"), t) == TV::True);
    CHECK(eval_mso(parse_formula("forall i:I. isEvent(i) & [i] != noEv -> (i = 2 | i = 6)"), t) == TV::True);
    CHECK(eval_mso(parse_formula("exists v:Any. [last - 1] = futEv(_, _, _, v) & v = 7"), t) == TV::True);
    CHECK(eval_mso(parse_formula("forall i:I. isState(i) -> [i] |- this.f = 10 * x"), t) == TV::True);
    CHECK(eval_mso(parse_formula("exists X sub I. (forall x in X. isState(x)) & (exists a in X. a = 3)"), t) ==
          TV::True);
    CHECK(eval_mso(parse_formula("isFutEv(6) & isfutEv(6) & isNoEv(4)"), t) == TV::True);
    CHECK(eval_mso(parse_formula("[9] = noEv"), t) == TV::False);
}

TEST_CASE("relativization restricts position quantifiers") {
    LocalTrace t = small_trace();
    FormulaPtr psi = parse_formula("exists i:I. isFutEv(i)");
    FormulaPtr rel = relativize(psi, {Sort::Kind::Pos, ""}, "n", parse_formula("n <= k"));
    CHECK(eval_mso(rel, t, ints({{"k", 7}})) == TV::True);
    CHECK(eval_mso(rel, t, ints({{"k", 5}})) == TV::False);
}

TEST_CASE("negation normal form preserves truth on random formulas") {
    gen::Rng r(7);
    for (int k = 0; k < 300; ++k) {
        gen::Vc v = gen::random_vc(r);
        FormulaPtr f = f_implies(f_and(v.gamma), v.phi);
        FormulaPtr n = nnf(f);
        for (int a = 0; a <= 4; a += 2)
            for (int b = 0; b <= 4; b += 2)
                for (int c = 0; c <= 4; c += 2) {
                    Beta beta = ints({{"a", a}, {"b", b}, {"c", c}});
                    CHECK(eval_fos(f, {}, beta) == eval_fos(n, {}, beta));
                }
    }
}

TEST_CASE("substitution replaces free occurrences only") {
    FormulaPtr f = parse_formula("x > 0 & exists x:Int. x < y");
    FormulaPtr g = subst(f, {{"x", parse_term("y + 1")}, {"y", parse_term("3")}});
    CHECK(to_string(g) == to_string(parse_formula("y + 1 > 0 & exists x:Int. x < 3")));
    CHECK(free_vars(f) == std::set<std::string>{"x", "y"});
    CHECK(free_vars(parse_formula("exists x:Int. x < y")) == std::set<std::string>{"y"});
}

TEST_CASE("program expressions translate to terms") {
    Program p = load_program(
        "class K() { Int f = 0; Int m(Int i) { Bool b = this.f > i && i != 0; return this.f + i; } } "
        "main { K k = K(); k!m(1); }");
    const auto& body = p.classes[0].methods[0].body;
    CHECK(to_string(term_of_expr(*body.back()->expr)) == "this.f + i");
    ObjState s{{{"i", s_val(Value(1))}}, {{"f", s_val(Value(3))}}};
    CHECK(eval_fos(formula_of_expr(*body[0]->expr), s) == TV::True);
}

TEST_CASE("three-valued connectives") {
    CHECK(tv_and(TV::False, TV::Unknown) == TV::False);
    CHECK(tv_or(TV::True, TV::Unknown) == TV::True);
    CHECK(tv_not(TV::Unknown) == TV::Unknown);
    CHECK(tv_and(TV::True, TV::Unknown) == TV::Unknown);
}

}  // TEST_SUITE
