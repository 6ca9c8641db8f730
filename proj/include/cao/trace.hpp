#pragma once

#include "cao/symexpr.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cao {

struct Event {
    enum class Kind { InvEv, InvREv, FutEv, FutREv, CondEv, CondREv, SuspEv, SuspREv, NoEv };
    Kind kind = Kind::NoEv;
    SymPtr obj;     // X
    SymPtr callee;  // invEv: X'
    // invEv: the new future; futREv: the future read; otherwise the future of the process
    SymPtr fut;
    std::string method;  // qualified C.m; empty in a futREv before agreement
    std::vector<SymPtr> args;
    SymPtr val;      // futEv result, futREv read value, susp*: the awaited future
    ExprPtr guard;   // cond*: syntactic guard
    int pp = -1;

    static Event noev() { return Event{}; }
};

const char* kind_name(Event::Kind k);
std::optional<Event::Kind> kind_from_name(const std::string& s);
int compare(const Event& a, const Event& b);
inline bool operator==(const Event& a, const Event& b) { return compare(a, b) == 0; }
std::string to_string(const Event& e);
// The symbolic value an event introduces (invEv future, futREv read value), if symbolic.
SymPtr introduced(const Event& e);
void collect_atoms(const Event& e, std::set<Atom>& out);
std::optional<Event> substitute(const Event& e, const AtomMap& m);
bool suspending(const Event& e);  // condEv / suspEv

struct Diamond {};
using HistElem = std::variant<ObjState, Event, Diamond>;

inline bool is_state(const HistElem& h) { return std::holds_alternative<ObjState>(h); }
inline bool is_event(const HistElem& h) { return std::holds_alternative<Event>(h); }
inline bool is_diamond(const HistElem& h) { return std::holds_alternative<Diamond>(h); }
int compare(const HistElem& a, const HistElem& b);

struct LocalTrace {
    SymSet sc;
    std::vector<HistElem> hs;
    // if-decisions taken while generating the trace ('T'/'F'); provenance only
    std::string path;

    const ObjState& first() const { return std::get<ObjState>(hs.front()); }
    const ObjState& last() const { return std::get<ObjState>(hs.back()); }
    bool well_formed() const;
};

int compare(const LocalTrace& a, const LocalTrace& b);  // ignores path
inline bool operator==(const LocalTrace& a, const LocalTrace& b) { return compare(a, b) == 0; }

LocalTrace singleton(const ObjState& s);
std::optional<LocalTrace> chop(const LocalTrace& a, const LocalTrace& b);
std::optional<LocalTrace> megachop(const LocalTrace& a, const LocalTrace& b);

// Replaces symbolic fields by rho up to the first diamond; sc only for the fields
// actually replaced there. nullopt if a substituted expression becomes undefined.
std::optional<LocalTrace> apply_heap(const LocalTrace& t, const std::map<std::string, SymPtr>& rho,
                                     AtomMap* used = nullptr);
std::optional<LocalTrace> substitute(const LocalTrace& t, const AtomMap& m);

std::string to_string(const HistElem& h);
std::string to_string(const LocalTrace& t);
// Prints sc as {c1, c2} in canonical order.
std::string sc_string(const SymSet& sc);

nlohmann::json to_json(const SymPtr& e);
nlohmann::json to_json(const ObjState& s);
nlohmann::json to_json(const Event& e);
nlohmann::json to_json(const HistElem& h);
nlohmann::json to_json(const LocalTrace& t);

}  // namespace cao
