#include "cao/global.hpp"

#include "cao/frontend.hpp"

#include <algorithm>
#include <unordered_set>

namespace cao {

// ---------------------------------------------------------------- agreement

namespace {

struct Prepared {
    LocalTrace applied;  // trace with the heap applied
    AtomMap used;
    Candidate cand;
};

std::optional<Prepared> prepare(const LocalTrace& t, const Heap& rho, std::string* why) {
    Prepared p;
    auto a = apply_heap(t, rho, &p.used);
    if (!a) {
        if (why) *why = "expression undefined after applying the heap";
        return std::nullopt;
    }
    p.applied = std::move(*a);
    if (p.applied.hs.size() < 3 || !is_event(p.applied.hs[1])) {
        if (why) *why = "trace has no next event";
        return std::nullopt;
    }
    Candidate& c = p.cand;
    c.hs.assign(p.applied.hs.begin(), p.applied.hs.begin() + 3);
    c.intro = introduced(std::get<Event>(c.hs[1]));
    std::set<Atom> allowed;
    if (c.intro) allowed.insert(atom_of(*c.intro));
    std::set<Atom> seen;
    collect_atoms(std::get<Event>(c.hs[1]), seen);
    for (int i : {0, 2}) {
        const auto& st = std::get<ObjState>(c.hs[i]);
        for (const auto& [k, v] : st.sigma) collect_atoms(v, seen);
        for (const auto& [k, v] : st.rho) collect_atoms(v, seen);
    }
    for (const auto& a2 : seen) {
        if (!allowed.count(a2)) {
            if (why) *why = "symbolic value " + to_string(a2) + " is not introduced by " + to_string(c.hs[1]);
            return std::nullopt;
        }
    }
    for (const auto& e : p.applied.sc) {
        std::set<Atom> as;
        collect_atoms(e, as);
        bool ok = std::all_of(as.begin(), as.end(), [&](const Atom& x) { return allowed.count(x) > 0; });
        if (ok) c.sc.insert(e);
    }
    return p;
}

bool hs_equal(const std::vector<HistElem>& a, const std::vector<HistElem>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (compare(a[i], b[i]) != 0) return false;
    return true;
}

bool ground_elem(const HistElem& h) {
    std::set<Atom> as;
    if (auto* s = std::get_if<ObjState>(&h)) return is_concrete(*s);
    if (auto* e = std::get_if<Event>(&h)) collect_atoms(*e, as);
    return as.empty();
}

}  // namespace

std::optional<Candidate> selection_candidate(const LocalTrace& t, const Heap& rho, std::string* why) {
    auto p = prepare(t, rho, why);
    if (!p) return std::nullopt;
    return p->cand;
}

std::vector<Agreement> agree(const std::vector<LocalTrace>& proc, const Heap& rho, const ValueOracle& oracle,
                             std::string* why) {
    std::vector<Prepared> ps;
    for (const auto& t : proc) {
        auto p = prepare(t, rho, why);
        if (!p) return {};
        ps.push_back(std::move(*p));
    }
    // candidate values for the introduced symbols
    std::vector<SymPtr> values;
    bool any_intro = false;
    for (const auto& p : ps) {
        if (!p.cand.intro) continue;
        any_intro = true;
        for (const auto& v : oracle(std::get<Event>(p.cand.hs[1]))) {
            bool dup = std::any_of(values.begin(), values.end(), [&](const SymPtr& w) { return sym_eq(v, w); });
            if (!dup) values.push_back(v);
        }
    }
    if (!any_intro) values.push_back(nullptr);

    std::vector<Agreement> out;
    for (const auto& v : values) {
        std::vector<size_t> sel;
        std::vector<std::vector<HistElem>> hs_sel;
        std::vector<AtomMap> maps;
        for (size_t i = 0; i < ps.size(); ++i) {
            const Candidate& c = ps[i].cand;
            AtomMap m;
            if (c.intro && v) m[atom_of(*c.intro)] = v;
            bool selectable = true;
            for (const auto& e : c.sc) {
                SymPtr r = substitute(e, m);
                if (!r || !is_true(r)) {
                    selectable = false;
                    break;
                }
            }
            if (!selectable) continue;
            LocalTrace ct;
            ct.hs = c.hs;
            auto sub = substitute(ct, m);
            if (!sub) continue;
            if (!std::all_of(sub->hs.begin(), sub->hs.end(), ground_elem)) continue;
            sel.push_back(i);
            hs_sel.push_back(std::move(sub->hs));
            maps.push_back(std::move(m));
        }
        if (sel.empty()) continue;
        bool same = true;
        for (size_t k = 1; k < hs_sel.size(); ++k) same = same && hs_equal(hs_sel[0], hs_sel[k]);
        if (!same) {
            if (why) *why = "selectable candidates disagree";
            continue;
        }
        Agreement ag;
        ag.theta.hs = hs_sel[0];
        ag.ev = std::get<Event>(ag.theta.hs[1]);
        if (v && ps[sel[0]].cand.intro) ag.subst[atom_of(*ps[sel[0]].cand.intro)] = v;
        for (size_t k = 0; k < sel.size(); ++k) {
            const Prepared& p = ps[sel[k]];
            ag.heap_used.insert(p.used.begin(), p.used.end());
            auto full = substitute(p.applied, maps[k]);
            if (!full) continue;
            LocalTrace c;
            c.path = full->path;
            bool dead = false;
            for (const auto& e : full->sc) {
                if (is_true(e)) continue;
                if (is_false(e)) dead = true;
                c.sc.insert(e);
            }
            if (dead) continue;
            c.hs.assign(full->hs.begin() + 2, full->hs.end());
            if (c.hs.size() == 1) {
                ag.finished_paths.push_back(c.path);
                continue;
            }
            // a continuation resumes after its suspension marker
            if (is_diamond(c.hs[1])) c.hs.erase(c.hs.begin(), c.hs.begin() + 2);
            bool dup = std::any_of(ag.cont.begin(), ag.cont.end(),
                                   [&](const LocalTrace& o) { return o == c && o.path == c.path; });
            if (!dup) ag.cont.push_back(std::move(c));
        }
        out.push_back(std::move(ag));
    }
    return out;
}

// ---------------------------------------------------------------- configurations

bool SystemState::terminated() const {
    return std::all_of(objs.begin(), objs.end(), [](const ObjectConfig& o) { return o.pool.empty() && !o.active; });
}

const ObjectConfig* SystemState::object(const std::string& n) const {
    for (const auto& o : objs)
        if (o.name == n) return &o;
    return nullptr;
}

namespace {

std::map<std::string, Heap> global_state(const SystemState& s) {
    std::map<std::string, Heap> gl;
    for (const auto& o : s.objs) gl[o.name] = o.heap();
    return gl;
}

Process new_process(const Program& p, SystemState& s, const std::string& obj, const std::string& method, uint64_t fut,
                    const std::vector<SymPtr>& args, const GlobalOptions& opt) {
    const ObjectConfig* o = s.object(obj);
    const ClassDecl* c = p.find_class(o->cls);
    const MethodDecl* m = p.find_method(method);
    Heap refs;
    for (const auto& r : c->params) refs[r.name] = o->heap().at(r.name);
    ObjState st = entry_state(*m, args, rho_id(*c, s.gen.fresh_heap(), refs));
    LocalDiag diag;
    Process pr;
    pr.traces = method_traces(p, *c, *m, s_val(Value::object(obj)), s_val(Value::future(fut)), st, s.gen, opt.local, &diag);
    pr.rec.object = obj;
    pr.rec.method = method;
    pr.rec.fut = fut;
    for (const auto& a : args) pr.rec.args.push_back(a->val);
    pr.rec.truncated = diag.budget_exhausted;
    return pr;
}

void add_to_pool(ObjectConfig& o, Process pr) {
    auto pos = std::find_if(o.pool.begin(), o.pool.end(),
                            [&](const Process& q) { return q.rec.fut > pr.rec.fut; });
    o.pool.insert(pos, std::move(pr));
}

size_t index_of(const SystemState& s, const std::string& n) {
    for (size_t i = 0; i < s.objs.size(); ++i)
        if (s.objs[i].name == n) return i;
    return s.objs.size();
}

// Applies one agreed step of process pr (already removed from the object) to n.
std::optional<Successor> commit(const Program& p, const SystemState& s, size_t oi, Process pr, Agreement ag,
                                bool schedule, const GlobalOptions& opt) {
    SystemState n = s;
    ObjectConfig& o = n.objs[oi];
    Event ev = ag.ev;
    std::string rule;
    if (ev.kind == Event::Kind::FutREv) {
        uint64_t f = ev.fut->val.as_future();
        auto it = n.resolved.find(f);
        if (it == n.resolved.end() || !(it->second == ev.val->val)) return std::nullopt;
        ev.method = n.fut_method.at(f);
        rule = "S-Get";
    } else if (ev.kind == Event::Kind::InvEv) {
        rule = "S-Invoc";
    } else {
        rule = "S-Internal";
    }
    ag.theta.hs[1] = ev;

    auto tr = schedule ? megachop(o.trace, ag.theta) : chop(o.trace, ag.theta);
    if (!tr) return std::nullopt;
    o.trace = std::move(*tr);

    ProcRecord& rec = pr.rec;
    if (rec.realized.hs.empty()) {
        rec.realized = ag.theta;
    } else if (!suspending(std::get<Event>(rec.realized.hs[rec.realized.hs.size() - 2])) &&
               rec.realized.last() == ag.theta.first()) {
        rec.realized = *chop(rec.realized, ag.theta);
    } else {
        rec.realized.hs.push_back(Diamond{});
        rec.realized.hs.insert(rec.realized.hs.end(), ag.theta.hs.begin(), ag.theta.hs.end());
    }
    rec.chi.insert(ag.subst.begin(), ag.subst.end());
    rec.chi.insert(ag.heap_used.begin(), ag.heap_used.end());

    if (suspending(ev)) {
        rule += "/O-Deschedule";
        pr.traces = std::move(ag.cont);
        add_to_pool(o, std::move(pr));
        o.active.reset();
    } else {
        rule += schedule ? "/O-Schedule" : "/O-Step";
        if (ag.cont.empty()) {
            rec.paths = ag.finished_paths;
            n.finished.push_back(std::move(rec));
            o.active.reset();
        } else {
            pr.traces = std::move(ag.cont);
            o.active = std::move(pr);
        }
    }

    if (ev.kind == Event::Kind::FutEv) {
        uint64_t f = ev.fut->val.as_future();
        n.resolved[f] = ev.val->val;
        n.fut_method[f] = ev.method;
    } else if (ev.kind == Event::Kind::InvEv) {
        uint64_t f = ev.fut->val.as_future();
        if (f != n.next_future) return std::nullopt;
        ++n.next_future;
        n.inv_futures.push_back(f);
        const std::string callee = ev.callee->val.as_object();
        Process np = new_process(p, n, callee, ev.method, f, ev.args, opt);
        add_to_pool(n.objs[index_of(n, callee)], std::move(np));
        rule += "+O-Add";
    }

    auto node = std::make_shared<GammaNode>();
    node->parent = s.gamma;
    node->ev = ev;
    node->gl = global_state(n);
    n.gamma = node;
    ++n.steps;
    return Successor{ev, rule, std::move(n)};
}

}  // namespace

SystemState initial_system(const Program& p, const GlobalOptions& opt) {
    SystemState s;
    std::vector<Creation> cs = p.main.creations;
    std::sort(cs.begin(), cs.end(), [](const Creation& a, const Creation& b) { return a.var < b.var; });
    for (const auto& cr : cs) {
        const ClassDecl* c = p.find_class(cr.cls);
        if (!c) throw std::runtime_error("unknown class " + cr.cls);
        std::map<std::string, std::string> refs;
        for (size_t i = 0; i < c->params.size() && i < cr.args.size(); ++i) refs[c->params[i].name] = cr.args[i];
        ObjectConfig o;
        o.name = cr.var;
        o.cls = cr.cls;
        o.trace = singleton(ObjState{{}, initial_heap(*c, refs)});
        s.objs.push_back(std::move(o));
    }
    const Creation* target = p.find_creation(p.main.target);
    if (!target) throw std::runtime_error("initial call target '" + p.main.target + "' is not created");
    const ClassDecl* tc = p.find_class(target->cls);
    const MethodDecl* m = tc ? tc->find_method(p.main.method) : nullptr;
    if (!m) throw std::runtime_error("initial call: no method " + target->cls + "." + p.main.method);
    std::vector<SymPtr> args;
    for (const auto& a : p.main.args) {
        SymPtr v = eval_expr(*a, ObjState{});
        if (!v || !v->ground) throw std::runtime_error("initial call argument is not a value");
        args.push_back(v);
    }
    s.next_future = 2;
    Process pr = new_process(p, s, target->var, m->qualified(), 1, args, opt);
    add_to_pool(s.objs[index_of(s, target->var)], std::move(pr));
    auto root = std::make_shared<GammaNode>();
    root->gl = global_state(s);
    s.gamma = root;
    return s;
}

std::vector<Successor> system_step(const Program& p, const SystemState& s, const GlobalOptions& opt) {
    std::vector<Successor> out;
    ValueOracle oracle = [&](const Event& ev) -> std::vector<SymPtr> {
        if (ev.kind == Event::Kind::FutREv) {
            if (!ev.fut || !ev.fut->ground || !ev.fut->val.is_future()) return {};
            auto it = s.resolved.find(ev.fut->val.as_future());
            if (it == s.resolved.end()) return {};
            return {s_val(it->second)};
        }
        if (ev.kind == Event::Kind::InvEv) return {s_val(Value::future(s.next_future))};
        return {};
    };
    for (size_t oi = 0; oi < s.objs.size(); ++oi) {
        const ObjectConfig& o = s.objs[oi];
        if (o.active) {
            for (auto& ag : agree(o.active->traces, o.heap(), oracle)) {
                if (auto r = commit(p, s, oi, *o.active, std::move(ag), false, opt)) out.push_back(std::move(*r));
            }
            continue;
        }
        for (size_t pi = 0; pi < o.pool.size(); ++pi) {
            for (auto& ag : agree(o.pool[pi].traces, o.heap(), oracle)) {
                if (suspending(ag.ev)) continue;
                if (ag.ev.kind == Event::Kind::CondREv) {
                    SymPtr g = eval_expr(*ag.ev.guard, ag.theta.first());
                    if (!g || !is_true(g)) continue;
                }
                if (ag.ev.kind == Event::Kind::SuspREv) {
                    if (!ag.ev.val || !ag.ev.val->ground || !ag.ev.val->val.is_future()) continue;
                    if (!s.resolved.count(ag.ev.val->val.as_future())) continue;
                }
                SystemState base = s;
                Process pr = base.objs[oi].pool[pi];
                base.objs[oi].pool.erase(base.objs[oi].pool.begin() + static_cast<long>(pi));
                if (auto r = commit(p, base, oi, std::move(pr), std::move(ag), true, opt)) out.push_back(std::move(*r));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------- runs

GlobalTrace global_trace(const SystemState& s) {
    std::vector<const GammaNode*> nodes;
    for (const GammaNode* n = s.gamma.get(); n; n = n->parent.get()) nodes.push_back(n);
    std::reverse(nodes.begin(), nodes.end());
    GlobalTrace g;
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (i > 0) g.events.push_back(nodes[i]->ev);
        g.states.push_back(nodes[i]->gl);
    }
    return g;
}

namespace {

Run make_run(const SystemState& s) {
    Run r;
    r.gamma = global_trace(s);
    r.procs = s.finished;
    for (const auto& o : s.objs) r.object_traces.emplace_back(o.name, o.trace);
    return r;
}

void hash_mix(uint64_t& h1, uint64_t& h2, const std::string& s) {
    for (unsigned char c : s) {
        h1 = (h1 ^ c) * 1099511628211ull;
        h2 = (h2 + c + 0x9e3779b97f4a7c15ull) * 0xff51afd7ed558ccdull;
        h2 ^= h2 >> 29;
    }
    h1 = (h1 ^ 0xff) * 1099511628211ull;
}

std::pair<uint64_t, uint64_t> config_key(const SystemState& s) {
    uint64_t h1 = 1469598103934665603ull, h2 = 0x243f6a8885a308d3ull;
    auto procs = [&](const Process& pr) {
        hash_mix(h1, h2, std::to_string(pr.rec.fut));
        for (const auto& t : pr.traces) hash_mix(h1, h2, to_string(t));
    };
    for (const auto& o : s.objs) {
        hash_mix(h1, h2, o.name);
        hash_mix(h1, h2, to_string(o.trace));
        for (const auto& pr : o.pool) procs(pr);
        hash_mix(h1, h2, o.active ? "active" : "idle");
        if (o.active) procs(*o.active);
    }
    hash_mix(h1, h2, std::to_string(s.next_future));
    for (const auto& [f, v] : s.resolved) hash_mix(h1, h2, std::to_string(f) + "=" + to_string(v));
    return {h1, h2};
}

struct PairHash {
    size_t operator()(const std::pair<uint64_t, uint64_t>& k) const { return k.first ^ (k.second * 31); }
};

std::string stuck_reason(const SystemState& s) {
    std::string r;
    for (const auto& o : s.objs) {
        auto desc = [&](const Process& pr) { return pr.rec.method + " (fut" + std::to_string(pr.rec.fut) + ")"; };
        if (o.active) r += o.name + ": active " + desc(*o.active) + " blocked; ";
        for (const auto& pr : o.pool)
            r += o.name + ": " + desc(pr) + (pr.rec.truncated ? " [unroll budget]" : "") + " cannot be scheduled; ";
    }
    return r;
}

}  // namespace

ExploreResult explore(const Program& p, const GlobalOptions& opt) {
    ExploreResult res;
    std::unordered_set<std::pair<uint64_t, uint64_t>, PairHash> seen;
    std::vector<SystemState> stack;
    stack.push_back(initial_system(p, opt));
    if (opt.dedup) seen.insert(config_key(stack.back()));
    while (!stack.empty()) {
        SystemState s = std::move(stack.back());
        stack.pop_back();
        ++res.stats.states_visited;
        if (s.terminated()) {
            ++res.stats.runs_completed;
            res.runs.push_back(make_run(s));
            if (res.runs.size() >= opt.max_runs) {
                res.stats.run_cap_hit = true;
                break;
            }
            continue;
        }
        if (s.steps >= opt.steps) {
            ++res.stats.runs_truncated;
            continue;
        }
        auto succ = system_step(p, s, opt);
        if (succ.empty()) {
            ++res.stats.runs_stuck;
            if (res.stuck_reasons.size() < 16) res.stuck_reasons.push_back(stuck_reason(s));
            continue;
        }
        for (auto it = succ.rbegin(); it != succ.rend(); ++it) {
            if (opt.dedup && !seen.insert(config_key(it->next)).second) {
                ++res.stats.dedup_hits;
                continue;
            }
            stack.push_back(std::move(it->next));
        }
    }
    return res;
}

ExploreResult explore_random(const Program& p, uint64_t seed, const GlobalOptions& opt) {
    ExploreResult res;
    std::mt19937_64 rng(seed);
    SystemState s = initial_system(p, opt);
    std::vector<std::string> rules;
    while (true) {
        ++res.stats.states_visited;
        if (s.terminated()) {
            ++res.stats.runs_completed;
            Run r = make_run(s);
            r.rules = rules;
            res.runs.push_back(std::move(r));
            break;
        }
        if (s.steps >= opt.steps) {
            ++res.stats.runs_truncated;
            break;
        }
        auto succ = system_step(p, s, opt);
        if (succ.empty()) {
            ++res.stats.runs_stuck;
            res.stuck_reasons.push_back(stuck_reason(s));
            break;
        }
        std::uniform_int_distribution<size_t> pick(0, succ.size() - 1);
        size_t k = pick(rng);
        rules.push_back(succ[k].rule);
        s = std::move(succ[k].next);
    }
    return res;
}

std::vector<ProcRecord> selected_traces(const std::vector<Run>& runs, const std::string& method) {
    std::vector<ProcRecord> out;
    for (const auto& r : runs)
        for (const auto& pr : r.procs)
            if (pr.method == method) out.push_back(pr);
    return out;
}

// ---------------------------------------------------------------- hygiene

Hygiene check_hygiene(const Run& r) {
    Hygiene h;
    auto note = [&](const std::string& d) {
        if (h.details.size() < 32) h.details.push_back(d);
    };
    for (size_t k = 0; k < r.gamma.states.size(); ++k)
        for (const auto& [obj, heap] : r.gamma.states[k])
            for (const auto& [f, v] : heap)
                if (!v->ground) {
                    ++h.symbolic_values;
                    note("symbolic value in global state " + std::to_string(k) + ": " + obj + "." + f);
                }
    std::set<uint64_t> invs;
    std::vector<std::pair<uint64_t, Value>> resolved;
    std::vector<Event> inv_events;
    for (size_t k = 0; k < r.gamma.events.size(); ++k) {
        const Event& e = r.gamma.events[k];
        std::set<Atom> as;
        collect_atoms(e, as);
        if (!as.empty()) {
            ++h.symbolic_values;
            note("symbolic value in event " + to_string(e));
        }
        if (e.kind == Event::Kind::InvEv) {
            if (!invs.insert(e.fut->val.as_future()).second || e.fut->val.as_future() == 1) {
                ++h.future_reuse;
                note("future reused: " + to_string(e));
            }
            inv_events.push_back(e);
        } else if (e.kind == Event::Kind::FutEv) {
            resolved.emplace_back(e.fut->val.as_future(), e.val->val);
        } else if (e.kind == Event::Kind::FutREv) {
            bool ok = std::any_of(resolved.begin(), resolved.end(), [&](const auto& fv) {
                return fv.first == e.fut->val.as_future() && fv.second == e.val->val;
            });
            if (!ok) {
                ++h.unmatched_reads;
                note("read without matching resolution: " + to_string(e));
            }
        } else if (e.kind == Event::Kind::InvREv) {
            uint64_t f = e.fut->val.as_future();
            if (f == 1) continue;  // the main-block call has no invocation event
            bool ok = std::any_of(inv_events.begin(), inv_events.end(), [&](const Event& i) {
                if (i.fut->val.as_future() != f || i.method != e.method || i.args.size() != e.args.size()) return false;
                if (!sym_eq(i.callee, e.obj)) return false;
                for (size_t a = 0; a < i.args.size(); ++a)
                    if (!sym_eq(i.args[a], e.args[a])) return false;
                return true;
            });
            if (!ok) {
                ++h.orphan_invocations;
                note("invocation reaction without invocation: " + to_string(e));
            }
        }
    }
    // heaps of the global trace follow the heaps of each object trace
    for (const auto& [obj, tr] : r.object_traces) {
        std::vector<const Heap*> a, b;
        for (const auto& hel : tr.hs)
            if (auto* st = std::get_if<ObjState>(&hel))
                if (a.empty() || !heap_eq(*a.back(), st->rho)) a.push_back(&st->rho);
        for (const auto& gl : r.gamma.states) {
            auto it = gl.find(obj);
            if (it == gl.end()) continue;
            if (b.empty() || !heap_eq(*b.back(), it->second)) b.push_back(&it->second);
        }
        bool ok = a.size() == b.size();
        for (size_t i = 0; ok && i < a.size(); ++i) ok = heap_eq(*a[i], *b[i]);
        if (!ok) {
            ++h.heap_mismatch;
            note("global heaps of " + obj + " diverge from its object trace");
        }
    }
    return h;
}

// ---------------------------------------------------------------- json

namespace {
nlohmann::json heap_json(const Heap& h) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : h) j[k] = to_string(v);
    return j;
}
}  // namespace

nlohmann::json to_json(const GlobalTrace& g) {
    nlohmann::json j = nlohmann::json::array();
    for (size_t i = 0; i < g.states.size(); ++i) {
        if (i > 0) j.push_back(to_json(g.events[i - 1]));
        nlohmann::json st = nlohmann::json::object();
        for (const auto& [o, h] : g.states[i]) st[o] = heap_json(h);
        j.push_back(nlohmann::json{{"global", st}});
    }
    return j;
}

nlohmann::json to_json(const ProcRecord& r) {
    nlohmann::json j;
    j["object"] = r.object;
    j["method"] = r.method;
    j["future"] = r.fut;
    j["args"] = nlohmann::json::array();
    for (const auto& a : r.args) j["args"].push_back(to_string(a));
    j["concretizer"] = nlohmann::json::object();
    for (const auto& [a, v] : r.chi) j["concretizer"][to_string(a)] = to_string(v);
    j["trace"] = to_json(r.realized);
    return j;
}

nlohmann::json to_json(const Run& r) {
    nlohmann::json j;
    j["globalTrace"] = to_json(r.gamma);
    j["objectTraces"] = nlohmann::json::object();
    for (const auto& [o, t] : r.object_traces) j["objectTraces"][o] = to_json(t);
    j["processes"] = nlohmann::json::array();
    for (const auto& pr : r.procs) j["processes"].push_back(to_json(pr));
    if (!r.rules.empty()) j["rules"] = r.rules;
    return j;
}

nlohmann::json to_json(const ExploreStats& s) {
    return nlohmann::json{{"statesVisited", s.states_visited}, {"runsCompleted", s.runs_completed},
                          {"runsTruncated", s.runs_truncated}, {"runsStuck", s.runs_stuck},
                          {"dedupHits", s.dedup_hits},        {"runCapHit", s.run_cap_hit}};
}

}  // namespace cao
