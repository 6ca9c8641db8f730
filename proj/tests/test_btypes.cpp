#include "cao/btypes.hpp"
#include "cao/frontend.hpp"

#include "doctest.h"
#include "gen.hpp"
#include "support.hpp"

using namespace cao;

TEST_SUITE("btypes") {

TEST_CASE("method types print and re-parse") {
    for (const char* s : {"S!Comp.cmp(data = i) . down(result >= 0)", "(L!Log.log(true))* . skip",
                          "&({Comp.cmp}, result < 0){L!Log.log(msg = i), skip} . down(true)",
                          "+{skip, down(true), S!Comp.cmp(true)}", "&(M, true){skip, skip}"}) {
        CAPTURE(s);
        MTypePtr t = parse_mtype(s);
        CHECK(to_string(parse_mtype(to_string(t))) == to_string(t));
    }
    gen::Rng r(3);
    for (int k = 0; k < 200; ++k) {
        MTypePtr t = gen::random_type(r, 4);
        CHECK(depth(t) <= 4);
        CHECK(to_string(parse_mtype(to_string(t))) == to_string(t));
    }
}

TEST_CASE("spec files carry roles, types, invariants, contracts and assumptions") {
    SpecFile a = load_spec(testsupport::corpus("flagship.btype"));
    CHECK(a.roles.size() == 2);
    CHECK(a.types.count("T.test") == 1);
    SpecFile b = load_spec(testsupport::corpus("two_types.btype"));
    CHECK(b.contracts.size() == 3);
    CHECK(b.class_invariants.count("T") == 1);
    CHECK(b.assumptions.count("Comp.cmp") == 1);
    CHECK(b.infer == std::vector<std::string>{"T.test"});
    SpecFile c = load_spec(testsupport::corpus("loop_sum.btype"));
    REQUIRE(c.loop_invariants.size() == 1);
    CHECK(c.loop_invariants[0].ordinal == 1);
    CHECK_THROWS_AS(parse_spec("type T.test : ?T.other(true) . skip;"), SpecError);
    CHECK_THROWS_AS(parse_spec("invariant T.test at loop : true;"), SpecError);
    CHECK_THROWS_AS(parse_spec("bogus;"), SpecError);
}

TEST_CASE("normalization drops neutral skips and keeps meaning") {
    CHECK(to_string(normalize(parse_mtype("skip . down(true) . skip"))) == "down(true)");
    gen::Protocol2 P;
    gen::Rng r(11);
    int n = 0;
    while (n < 200) {
        MTypePtr L = gen::random_type(r, gen::pick(r, 1, 4));
        auto t = gen::trace_for(r, L);
        if (!t) continue;
        ++n;
        CHECK(match_trace(*t, L, P.env) == match_trace(*t, normalize(L), P.env));
    }
}

TEST_CASE("matcher agrees with the MSO translation on random pairs") {
    gen::Protocol2 P;
    gen::Rng r(5);
    int n = 0, definite = 0;
    while (n < 200) {
        MTypePtr L = gen::random_type(r, gen::pick(r, 1, 4));
        auto t = gen::trace_for(r, L);
        if (!t) continue;
        ++n;
        TV m = match_trace(*t, L, P.env);
        TV f = eval_mso(alpha_met(L, P.env), *t);
        if (f == TV::Unknown) continue;
        ++definite;
        CAPTURE(to_string(L));
        CHECK(m == f);
    }
    CHECK(definite > 150);
}

TEST_CASE("flagship runs follow their type") {
    Program p = load_file(testsupport::corpus("flagship.cao"));
    SpecFile sf = load_spec(testsupport::corpus("flagship.btype"));
    TypeEnv env = TypeEnv::of(p, sf.roles);
    auto runs = explore(p).runs;
    REQUIRE(!runs.empty());
    for (const auto& pr : selected_traces(runs, "T.test")) {
        auto s = after_receive(pr.realized);
        CHECK(match_trace(s, sf.types["T.test"].body, env) == TV::True);
        CHECK(eval_mso(alpha_met(sf.types["T.test"].body, env), s) == TV::True);
        // the wrong branch condition is rejected
        CHECK(match_trace(s, parse_mtype("S!Comp.cmp(data = i) . &({Comp.cmp}, result >= 0){ L!Log.log(msg = i), "
                                         "skip } . down(result >= 0)"),
                          env) == TV::False);
    }
}

TEST_CASE("points-to analysis") {
    Program p = load_file(testsupport::corpus("flagship.cao"));
    CHECK(points_to(p, 0) == std::set<std::string>{"Comp.cmp"});
    CHECK_THROWS_AS(points_to(p, 42), SpecError);
    // two read sites, both fed by the same callee
    Program m = load_file(testsupport::corpus("mutual.cao"));
    PointsTo pt = points_to_all(m);
    CHECK(pt.sites.size() == 2);
    for (const auto& [site, ms] : pt.sites) CHECK(ms == std::set<std::string>{"Even.ev"});
    CHECK(to_json(pt).dump().find("Even.ev") != std::string::npos);
}

TEST_CASE("points-to over-approximates observed resolvers on the corpus") {
    for (const auto& f : testsupport::corpus_programs()) {
        CAPTURE(f);
        Program p = load_file(f);
        PointsTo pt = points_to_all(p);
        for (const auto& run : explore(p).runs) {
            std::map<uint64_t, std::string> resolver;
            for (const auto& pr : run.procs) resolver[pr.fut] = pr.method;
            for (const auto& pr : run.procs)
                for (const auto& h : pr.realized.hs) {
                    auto* e = std::get_if<Event>(&h);
                    if (!e || e->kind != Event::Kind::FutREv) continue;
                    const std::string& m = resolver.at(e->fut->val.as_future());
                    CHECK(pt.sites[e->pp].count(m) == 1);
                }
        }
    }
}

TEST_CASE("the read-site translation accepts exactly the listed resolvers") {
    FormulaPtr f = alpha_p2({"Comp.cmp"});
    LocalTrace t;
    ObjState s;
    Event rd;
    rd.kind = Event::Kind::FutREv;
    rd.obj = s_val(Value::object("X"));
    rd.fut = s_val(Value::future(1));
    rd.method = "Comp.cmp";
    rd.val = s_val(Value(3));
    rd.pp = 0;
    t.hs = {s, rd, s};
    EvalConfig cfg;
    cfg.methods = {"Comp.cmp", "Log.log"};
    CHECK(eval_mso(f, t, {}, cfg) == TV::True);
    std::get<Event>(t.hs[1]).method = "Log.log";
    CHECK(eval_mso(f, t, {}, cfg) == TV::False);
}

}  // TEST_SUITE
