#include "cao/frontend.hpp"
#include "cao/local.hpp"

#include "doctest.h"
#include "support.hpp"

#include <set>

using namespace cao;

namespace {

std::vector<LocalTrace> traces_of(const Program& p, const std::string& cls, const std::string& meth,
                                  const std::vector<SymPtr>& args, const LocalOptions& opt = {}) {
    const ClassDecl& c = *p.find_class(cls);
    const MethodDecl& m = *c.find_method(meth);
    FreshGen g;
    Heap refs;
    for (const auto& r : c.params) refs[r.name] = s_val(Value::object("X'"));
    ObjState st = entry_state(m, args, rho_id(c, g.fresh_heap(), refs));
    return method_traces(p, c, m, s_val(Value::object("X")), s_val(Value::future(1)), st, g, opt);
}

std::set<std::string> scs(const std::vector<LocalTrace>& ts) {
    std::set<std::string> out;
    for (const auto& t : ts) out.insert(sc_string(t.sc));
    return out;
}

}  // namespace

TEST_SUITE("local") {

TEST_CASE("get followed by if yields one trace per branch") {
    Program p = load_file(testsupport::corpus("getif.cao"));
    auto ts = traces_of(p, "Abs", "absval", {s_val(1)});
    REQUIRE(ts.size() == 2);
    for (const auto& t : ts) CHECK(t.well_formed());
}

TEST_CASE("the running method has three traces with the expected selection conditions") {
    Program p = load_file(testsupport::corpus("running.cao"));
    auto ts = traces_of(p, "R", "m", {s_val(5)});
    REQUIRE(ts.size() == 3);
    CHECK(scs(ts) == std::set<std::string>{"{$this.f_2 < 5, $this.f_1 + 1 > $i}",
                                           "{$this.f_1 + 1 > $i, $this.f_2 >= 5}", "{$this.f_1 + 1 <= $i}"});
    // the two traces through the await carry the diamond and a fresh heap
    int diamonds = 0;
    for (const auto& t : ts)
        for (const auto& h : t.hs) diamonds += is_diamond(h);
    CHECK(diamonds == 2);
}

TEST_CASE("every trace starts and ends with a state and alternates") {
    for (const auto& f : testsupport::corpus_programs()) {
        Program p = load_file(f);
        for (const auto& c : p.classes)
            for (const auto& m : c.methods) {
                FreshGen g;
                auto ts = symbolic_method_traces(p, c, m, g);
                CAPTURE(m.qualified());
                CHECK(!ts.empty());
                for (const auto& t : ts) {
                    CHECK(t.well_formed());
                    CHECK(is_state(t.hs.front()));
                    CHECK(is_state(t.hs.back()));
                }
            }
    }
}

TEST_CASE("the selectability method has four symbolic traces") {
    Program p = load_file(testsupport::corpus("selectability.cao"));
    FreshGen g;
    const ClassDecl& c = *p.find_class("Sel");
    auto ts = symbolic_method_traces(p, c, *c.find_method("m"), g);
    std::set<std::string> paths;
    for (const auto& t : ts) paths.insert(t.path);
    CHECK(paths == std::set<std::string>{"TT", "TF", "FT", "FF"});
}

TEST_CASE("loops unroll up to the budget") {
    Program p = load_file(testsupport::corpus("loop_sum.cao"));
    LocalOptions o2;
    o2.unroll = 2;
    LocalOptions o5;
    o5.unroll = 5;
    LocalDiag d2;
    const ClassDecl& c = *p.find_class("Summer");
    const MethodDecl& m = *c.find_method("sum");
    FreshGen g;
    auto a = symbolic_method_traces(p, c, m, g, o2, &d2);
    auto b = symbolic_method_traces(p, c, m, g, o5);
    CHECK(a.size() < b.size());
    CHECK(d2.budget_exhausted);
    // concrete bound: exactly one trace, three calls
    auto ts = traces_of(p, "Summer", "sum", {s_val(3)});
    REQUIRE(ts.size() == 1);
    int calls = 0;
    for (const auto& h : ts[0].hs)
        if (auto* e = std::get_if<Event>(&h); e && e->kind == Event::Kind::InvEv) ++calls;
    CHECK(calls == 3);
}

TEST_CASE("false branches are pruned on concrete input") {
    Program p = load_file(testsupport::corpus("selectability.cao"));
    auto ts = traces_of(p, "Sel", "m", {s_val(3)});
    std::set<std::string> paths;
    for (const auto& t : ts) paths.insert(t.path);
    CHECK(paths == std::set<std::string>{"TT"});
}

TEST_CASE("chop glues traces on an equal boundary state") {
    ObjState a{{{"x", s_val(1)}}, {}};
    ObjState b{{{"x", s_val(2)}}, {}};
    LocalTrace t1;
    t1.hs = {a, Event::noev(), b};
    LocalTrace t2 = singleton(b);
    auto c = chop(t1, t2);
    REQUIRE(c);
    CHECK(c->hs.size() == 3);
    CHECK(!chop(t1, singleton(a)));
}

}  // TEST_SUITE
