#include <algorithm>
#include "cao/frontend.hpp"
#include "cao/global.hpp"

#include "doctest.h"
#include "support.hpp"

using namespace cao;

namespace {

const LocalTrace* object_trace(const Run& r, const std::string& o) {
    for (const auto& [n, t] : r.object_traces)
        if (n == o) return &t;
    return nullptr;
}

}  // namespace

TEST_SUITE("global") {

TEST_CASE("exhaustive exploration of the corpus is hygienic") {
    for (const auto& f : testsupport::corpus_programs()) {
        CAPTURE(f);
        Program p = load_file(f);
        ExploreResult r = explore(p);
        CHECK(!r.runs.empty());
        CHECK(r.stats.runs_stuck == 0);
        for (const auto& run : r.runs) {
            Hygiene h = check_hygiene(run);
            CHECK_MESSAGE(h.ok(), (h.details.empty() ? std::string() : h.details[0]));
            CHECK(run.gamma.states.size() == run.gamma.events.size() + 1);
        }
    }
}

TEST_CASE("a seeded random run is one of the explored runs") {
    Program p = load_file(testsupport::corpus("await_bool.cao"));
    GlobalOptions full;
    full.dedup = false;  // dedup keeps one history per configuration
    ExploreResult all = explore(p, full);
    std::set<std::string> seen;
    for (const auto& r : all.runs) seen.insert(to_json(r.gamma).dump());
    for (uint64_t seed = 0; seed < 20; ++seed) {
        ExploreResult one = explore_random(p, seed);
        REQUIRE(one.runs.size() == 1);
        CHECK(seen.count(to_json(one.runs[0].gamma).dump()) == 1);
        // same seed, same run
        CHECK(to_json(explore_random(p, seed).runs[0]).dump() == to_json(one.runs[0]).dump());
    }
}

TEST_CASE("every interleaving of the guarded pair ends in the same heap") {
    Program p = load_file(testsupport::corpus("await_bool.cao"));
    ExploreResult r = explore(p);
    std::set<std::string> finals;
    for (const auto& run : r.runs) {
        const LocalTrace* t = object_trace(run, "c");
        REQUIRE(t);
        finals.insert(to_string(t->last().rho.at("x")));
    }
    // go2 can only pass its guard after go stored 5
    CHECK(finals == std::set<std::string>{"15"});
}

TEST_CASE("the moving average interrupts the client once") {
    Program p = load_file(testsupport::corpus("ema.cao"));
    ExploreResult r = explore(p);
    REQUIRE(r.runs.size() == 1);
    const LocalTrace* c = object_trace(r.runs[0], "c");
    REQUIRE(c);
    CHECK(to_string(c->last().rho.at("stopped")) == "True");
    size_t triggers = 0;
    for (const auto& e : r.runs[0].gamma.events)
        if (e.kind == Event::Kind::InvEv && e.method == "Client.trigger") ++triggers;
    CHECK(triggers == 1);
}

TEST_CASE("selected traces of the closed class avoid the unreachable branches") {
    Program p = load_file(testsupport::corpus("selectability.cao"));
    GlobalOptions o;
    o.steps = 2000;
    ExploreResult r = explore(p, o);
    auto sel = selected_traces(r.runs, "Sel.m");
    REQUIRE(!sel.empty());
    std::set<std::string> paths;
    for (const auto& pr : sel)
        for (const auto& x : pr.paths) paths.insert(x);
    CHECK(paths.count("TF") == 0);
    CHECK(paths.count("FF") == 0);
    CHECK(paths.count("TT") == 1);
    CHECK(paths.count("FT") == 1);
}

TEST_CASE("step bound truncates runs") {
    Program p = load_file(testsupport::corpus("loop_sum.cao"));
    GlobalOptions o;
    o.steps = 3;
    ExploreResult r = explore(p, o);
    CHECK(r.runs.empty());
    CHECK(r.stats.runs_truncated > 0);
}

TEST_CASE("deduplication keeps a subset of runs with the same final heaps") {
    for (const char* f : {"getif.cao", "await_bool.cao", "mutual.cao"}) {
        CAPTURE(f);
        Program p = load_file(testsupport::corpus(f));
        GlobalOptions a, b;
        b.dedup = false;
        auto ra = explore(p, a), rb = explore(p, b);
        std::set<std::string> sa, sb, fa, fb;
        for (const auto& r : ra.runs) {
            sa.insert(to_json(r.gamma).dump());
            fa.insert(to_json(r.gamma).back().dump());
        }
        for (const auto& r : rb.runs) {
            sb.insert(to_json(r.gamma).dump());
            fb.insert(to_json(r.gamma).back().dump());
        }
        CHECK(std::includes(sb.begin(), sb.end(), sa.begin(), sa.end()));
        CHECK(fa == fb);
    }
}

}  // TEST_SUITE
