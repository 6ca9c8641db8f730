#include "cao/bpl.hpp"
#include "cao/frontend.hpp"

#include "doctest.h"
#include "gen.hpp"
#include "support.hpp"

using namespace cao;

namespace {

const SortMap kInts{{"i", {Sort::Kind::Int, ""}}, {"j", {Sort::Kind::Int, ""}}, {"data", {Sort::Kind::Int, ""}}};

Validity vc(const std::vector<const char*>& gamma, const char* phi) {
    std::vector<FormulaPtr> g;
    for (const char* s : gamma) g.push_back(parse_formula(s));
    return discharge_vc(g, parse_formula(phi), kInts).v;
}

Scheme scheme(const std::string& prog, const std::string& spec, Program& keep) {
    keep = load_file(testsupport::corpus(prog));
    return make_scheme(keep, load_spec(testsupport::corpus(spec)));
}

}  // namespace

TEST_SUITE("bpl") {

TEST_CASE("verification conditions") {
    CHECK(vc({"i >= 0", "j >= 1"}, "i + j >= 1") == Validity::Valid);
    CHECK(vc({}, "i * i >= 0") == Validity::Unknown);
    CHECK(vc({"i >= 0"}, "i > 0") == Validity::Invalid);
    // the call-site check of the log call under its branch guard
    CHECK(vc({"i > 0", "data = i"}, "data = i & data >= 0") == Validity::Valid);
    CHECK(vc({"2 * i = 1"}, "false") == Validity::Valid);  // no integer solution
    CHECK(vc({"i = j", "j = 3"}, "i + 1 = 4") == Validity::Valid);
    auto r = discharge_vc({parse_formula("i >= 0")}, parse_formula("i > 0"), kInts);
    REQUIRE(r.v == Validity::Invalid);
    CHECK(r.model.at("i") == "0");
}

TEST_CASE("discharge_vc never contradicts brute force on bounded variables") {
    gen::Rng r(17);
    int n = 0;
    while (n < 300) {
        gen::Vc v = gen::random_vc(r);
        auto bf = gen::brute_force(v);
        if (!bf) continue;
        ++n;
        Validity d = discharge_vc(v.gamma, v.phi, v.sorts).v;
        CAPTURE(to_string(v.phi));
        if (d == Validity::Valid) CHECK(*bf);
        if (d == Validity::Invalid) CHECK(!*bf);
    }
}

TEST_CASE("updates compose sequentially and in parallel") {
    Update u = upd_seq(upd_assign("x", parse_term("x + 1")), upd_assign("y", parse_term("x * 2")));
    CHECK(to_string(apply_update(u, parse_term("y"))) == "(x + 1) * 2");
    Update v = upd_parallel(upd_assign("x", parse_term("1")), upd_assign("x", parse_term("2")));
    CHECK(to_string(v) == "{x := 2}");
    CHECK(to_string(simplify(parse_term("select(store(heap, f, 3), f)"))) == "3");
    CHECK(to_string(simplify(parse_term("select(store(heap, g, 3), f)"))) == "this.f");
}

TEST_CASE("the flagship method is typed and the proof replays") {
    Program p;
    Scheme s = scheme("flagship.cao", "flagship.btype", p);
    ProofResult r = prove_method(s, "T.test");
    CHECK(r.verdict == Verdict::Proved);
    CHECK(r.open.empty());
    ProofNode back = proof_from_json(to_json(r.tree));
    CHECK(replay(back) == Verdict::Proved);
    CHECK(to_json(back).dump() == to_json(r.tree).dump());
    std::vector<const ProofNode*> vcs;
    collect_vcs(r.tree, vcs);
    CHECK(!vcs.empty());
    CHECK(check_consistency(s).ok);
}

TEST_CASE("broken variants are refuted with a located reason") {
    for (const char* f : {"broken_callee.cao", "broken_sign.cao"}) {
        CAPTURE(f);
        Program p;
        Scheme s = scheme(f, "flagship.btype", p);
        ProofResult r = prove_method(s, "T.test");
        CHECK(r.verdict == Verdict::Refuted);
        REQUIRE(!r.open.empty());
        CHECK(r.open[0].find("T.test [met-") == 0);
        CHECK(replay(proof_from_json(to_json(r.tree))) == Verdict::Refuted);
    }
}

TEST_CASE("contracts, invariants and assumptions") {
    Program p;
    Scheme s = scheme("two_types.cao", "two_types.btype", p);
    CHECK(prove_method(s, "T.test").verdict == Verdict::Proved);
    CHECK(check_consistency(s).ok);
    Scheme n = scheme("two_types.cao", "two_types_noassume.btype", p);
    CHECK(prove_method(n, "T.test").verdict == Verdict::Refuted);
    Scheme l2 = scheme("two_types.cao", "two_types_l2.btype", p);
    for (const char* m : {"T.test", "Comp.cmp", "Log.log"}) CHECK(prove_method(l2, m).verdict == Verdict::Proved);
}

TEST_CASE("a loop needs an invariant") {
    Program p;
    Scheme s = scheme("loop_sum.cao", "loop_sum.btype", p);
    CHECK(prove_method(s, "Summer.sum").verdict == Verdict::Proved);
    s.spec.loop_invariants.clear();
    ProofResult r = prove_method(s, "Summer.sum");
    CHECK(r.verdict == Verdict::Unknown);
    REQUIRE(!r.open.empty());
    CHECK(r.open[0].find("invariant") != std::string::npos);
}

TEST_CASE("await is outside the calculus") {
    Program p = load_file(testsupport::corpus("await_fut.cao"));
    Scheme s = make_scheme(p, parse_spec("roles W -> this.w; type Waiter.wait : ?Waiter.wait(true) . "
                                         "W!Slow.slow(true) . &(M, true){skip, skip} . down(true);"));
    CHECK(prove_method(s, "Waiter.wait").verdict == Verdict::Unknown);
}

TEST_CASE("consistency: call conditions against callee preconditions") {
    Program p = load_file(testsupport::corpus("flagship.cao"));
    const char* roles = "roles S -> this.S, L -> this.L;\n";
    std::string ok = std::string(roles) +
                     "type T.test : ?T.test(true) . S!Comp.cmp(data >= 0) . &({Comp.cmp}, true){ skip, skip } . "
                     "down(true);\ntype Comp.cmp : ?Comp.cmp(data >= 0) . down(true);";
    CHECK(check_consistency(make_scheme(p, parse_spec(ok))).ok);
    std::string bad = std::string(roles) +
                      "type T.test : ?T.test(true) . S!Comp.cmp(true) . &({Comp.cmp}, true){ skip, skip } . "
                      "down(true);\ntype Comp.cmp : ?Comp.cmp(data > 0) . down(true);";
    ConsistencyReport rep = check_consistency(make_scheme(p, parse_spec(bad)));
    CHECK(!rep.ok);
    bool witness = false;
    for (const auto& it : rep.items)
        if (it.result == Validity::Invalid) witness = it.detail.find("data") != std::string::npos;
    CHECK(witness);
}

TEST_CASE("skeleton inference and contract weaving") {
    Program p = load_file(testsupport::corpus("two_types.cao"));
    const MethodDecl& m = *p.find_method("T.test");
    CHECK(to_string(infer_skeleton(m, p)) == "S!Comp.cmp(true) . &(M, true){+{L!Log.log(true), skip}, skip} . down(true)");
    Protocol w = weave_contract("T.test", parse_mtype("down(true)"), parse_formula("i >= 0"),
                                parse_formula("result >= 0"), nullptr, false);
    CHECK(to_string(w) == "?T.test(i >= 0) . down(result >= 0)");
    Protocol c = weave_contract("T.run", parse_mtype("down(true)"), parse_formula("i >= 0"),
                                parse_formula("result >= 0"), parse_formula("this.nr >= 0"), true);
    CHECK(to_string(c) == "?T.run(i >= 0) . down(result >= 0 & this.nr >= 0)");
}

TEST_CASE("symbolic execution agrees with brute force on straight-line programs") {
    gen::Rng r(23);
    int n = 0;
    while (n < 100) {
        gen::Hoare h = gen::random_hoare(r);
        Program p = load_program(h.source);
        auto bf = gen::brute_force(p, h.post);
        if (!bf) continue;
        ++n;
        const ClassDecl& c = p.classes[0];
        ProofResult res = prove_pst_block(p, c, c.methods[0], c.methods[0].body, h.pre, h.post);
        CAPTURE(h.source);
        CAPTURE(to_string(h.post));
        if (res.verdict == Verdict::Proved) CHECK(*bf);
        if (res.verdict == Verdict::Refuted) CHECK(!*bf);
    }
}

TEST_CASE("SMT-LIB export declares every symbol") {
    std::string s = to_smtlib({parse_formula("i >= 0")}, parse_formula("this.f > i"), kInts);
    CHECK(s.find("(declare-const |heap| Heap)") != std::string::npos);
    CHECK(s.find("(declare-const |i| Int)") != std::string::npos);
    CHECK(s.find("(check-sat)") != std::string::npos);
}

}  // TEST_SUITE
