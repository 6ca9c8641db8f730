#pragma once

#include "cao/local.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cao {

// ---- agreement ----

struct Candidate {
    SymSet sc;
    std::vector<HistElem> hs;  // exactly three elements
    SymPtr intro;              // symbolic value introduced by hs[1], if any
};

// nullopt when a foreign symbolic value survives in the first three elements.
std::optional<Candidate> selection_candidate(const LocalTrace& t, const Heap& rho, std::string* why = nullptr);

// Values for the symbol introduced by a candidate event (futREv read value, invEv future).
using ValueOracle = std::function<std::vector<SymPtr>(const Event& ev)>;

struct Agreement {
    LocalTrace theta;  // agreed concrete trace, |hs| = 3
    Event ev;          // theta.hs[1]
    std::vector<LocalTrace> cont;
    AtomMap subst;      // introduced symbols -> agreed value
    AtomMap heap_used;  // symbolic fields replaced by the current heap
    std::vector<std::string> finished_paths;  // selected traces that end with this step
};

std::vector<Agreement> agree(const std::vector<LocalTrace>& proc, const Heap& rho, const ValueOracle& oracle,
                             std::string* why = nullptr);

// ---- configurations ----

struct ProcRecord {
    std::string object;
    std::string method;
    uint64_t fut = 0;
    std::vector<Value> args;
    LocalTrace realized;  // concrete local trace of the process so far
    AtomMap chi;          // used concretizer
    std::vector<std::string> paths;  // provenance of the traces selected at termination
    bool truncated = false;          // generated under an exhausted unroll budget
};

struct Process {
    std::vector<LocalTrace> traces;
    ProcRecord rec;
};

struct ObjectConfig {
    std::string name;
    std::string cls;
    std::vector<Process> pool;  // ordered by future id
    std::optional<Process> active;
    LocalTrace trace;

    const Heap& heap() const { return trace.last().rho; }
};

struct GammaNode {
    std::shared_ptr<const GammaNode> parent;
    Event ev;
    std::map<std::string, Heap> gl;
};

struct SystemState {
    std::vector<ObjectConfig> objs;  // ordered by name
    uint64_t next_future = 1;
    std::map<uint64_t, Value> resolved;          // future -> value of its futEv
    std::map<uint64_t, std::string> fut_method;  // future -> resolving method
    std::vector<uint64_t> inv_futures;           // futures of invEv events, in order
    FreshGen gen;
    std::vector<ProcRecord> finished;
    std::shared_ptr<const GammaNode> gamma;  // last node of the global trace
    int steps = 0;

    bool terminated() const;
    const ObjectConfig* object(const std::string& n) const;
};

struct GlobalOptions {
    LocalOptions local;
    int steps = 10000;
    bool dedup = true;
    size_t max_runs = 200000;
};

SystemState initial_system(const Program& p, const GlobalOptions& opt = {});

struct Successor {
    Event ev;
    std::string rule;  // S-Internal / S-Get / S-Invoc combined with the object rule
    SystemState next;
};
std::vector<Successor> system_step(const Program& p, const SystemState& s, const GlobalOptions& opt = {});

// ---- runs ----

struct GlobalTrace {
    std::vector<std::map<std::string, Heap>> states;  // |states| = |events| + 1
    std::vector<Event> events;
};
GlobalTrace global_trace(const SystemState& s);

struct Run {
    GlobalTrace gamma;
    std::vector<ProcRecord> procs;
    std::vector<std::pair<std::string, LocalTrace>> object_traces;
    std::vector<std::string> rules;
};

struct ExploreStats {
    size_t states_visited = 0;
    size_t runs_completed = 0;
    size_t runs_truncated = 0;  // step bound hit
    size_t runs_stuck = 0;
    size_t dedup_hits = 0;
    bool run_cap_hit = false;
};

struct ExploreResult {
    std::vector<Run> runs;  // terminated runs
    ExploreStats stats;
    std::vector<std::string> stuck_reasons;
};

ExploreResult explore(const Program& p, const GlobalOptions& opt = {});
// One run choosing uniformly among successors with the given seed.
ExploreResult explore_random(const Program& p, uint64_t seed, const GlobalOptions& opt = {});

// Realized local traces of every terminated process of method C.m over the runs.
std::vector<ProcRecord> selected_traces(const std::vector<Run>& runs, const std::string& method);

// ---- hygiene ----

struct Hygiene {
    size_t symbolic_values = 0;
    size_t future_reuse = 0;
    size_t unmatched_reads = 0;
    size_t orphan_invocations = 0;
    size_t heap_mismatch = 0;
    std::vector<std::string> details;
    bool ok() const {
        return symbolic_values + future_reuse + unmatched_reads + orphan_invocations + heap_mismatch == 0;
    }
};
Hygiene check_hygiene(const Run& r);

nlohmann::json to_json(const GlobalTrace& g);
nlohmann::json to_json(const Run& r);
nlohmann::json to_json(const ExploreStats& s);
nlohmann::json to_json(const ProcRecord& r);

}  // namespace cao
