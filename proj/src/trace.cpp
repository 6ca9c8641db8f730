#include "cao/trace.hpp"

#include "cao/frontend.hpp"

namespace cao {

namespace {

int cmp_opt(const SymPtr& a, const SymPtr& b) {
    if (!a || !b) return a ? 1 : (b ? -1 : 0);
    return compare(a, b);
}

std::string sym_or(const SymPtr& e, const char* dflt = "_") { return e ? to_string(e) : dflt; }

std::string args_str(const std::vector<SymPtr>& xs) {
    std::string s = "[";
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ", ";
        s += to_string(xs[i]);
    }
    return s + "]";
}

bool subst_into(SymPtr& e, const AtomMap& m) {
    if (!e) return true;
    e = substitute(e, m);
    return e != nullptr;
}

bool subst_state(ObjState& s, const AtomMap& m) {
    for (auto& [k, v] : s.sigma)
        if (!subst_into(v, m)) return false;
    for (auto& [k, v] : s.rho)
        if (!subst_into(v, m)) return false;
    return true;
}

}  // namespace

const char* kind_name(Event::Kind k) {
    switch (k) {
    case Event::Kind::InvEv: return "invEv";
    case Event::Kind::InvREv: return "invREv";
    case Event::Kind::FutEv: return "futEv";
    case Event::Kind::FutREv: return "futREv";
    case Event::Kind::CondEv: return "condEv";
    case Event::Kind::CondREv: return "condREv";
    case Event::Kind::SuspEv: return "suspEv";
    case Event::Kind::SuspREv: return "suspREv";
    case Event::Kind::NoEv: return "noEv";
    }
    return "?";
}

std::optional<Event::Kind> kind_from_name(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(Event::Kind::NoEv); ++k)
        if (s == kind_name(static_cast<Event::Kind>(k))) return static_cast<Event::Kind>(k);
    return std::nullopt;
}

int compare(const Event& a, const Event& b) {
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    if (int c = cmp_opt(a.obj, b.obj)) return c;
    if (int c = cmp_opt(a.callee, b.callee)) return c;
    if (int c = cmp_opt(a.fut, b.fut)) return c;
    if (int c = a.method.compare(b.method)) return c < 0 ? -1 : 1;
    if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
    for (size_t i = 0; i < a.args.size(); ++i)
        if (int c = compare(a.args[i], b.args[i])) return c;
    if (int c = cmp_opt(a.val, b.val)) return c;
    if (a.guard || b.guard) {
        if (!a.guard || !b.guard) return a.guard ? 1 : -1;
        if (a.guard != b.guard)
            if (int c = print_expr(*a.guard).compare(print_expr(*b.guard))) return c < 0 ? -1 : 1;
    }
    return a.pp < b.pp ? -1 : (a.pp == b.pp ? 0 : 1);
}

std::string to_string(const Event& e) {
    std::string k = kind_name(e.kind);
    switch (e.kind) {
    case Event::Kind::InvEv:
        return k + "(" + sym_or(e.obj) + ", " + sym_or(e.callee) + ", " + sym_or(e.fut) + ", " + e.method + ", " +
               args_str(e.args) + ")";
    case Event::Kind::InvREv:
        return k + "(" + sym_or(e.obj) + ", " + sym_or(e.fut) + ", " + e.method + ", " + args_str(e.args) + ")";
    case Event::Kind::FutEv:
        return k + "(" + sym_or(e.obj) + ", " + sym_or(e.fut) + ", " + e.method + ", " + sym_or(e.val) + ")";
    case Event::Kind::FutREv:
        return k + "(" + sym_or(e.obj) + ", " + sym_or(e.fut) + ", " + (e.method.empty() ? "_" : e.method) + ", " +
               sym_or(e.val) + ", " + std::to_string(e.pp) + ")";
    case Event::Kind::CondEv:
    case Event::Kind::CondREv:
        return k + "(" + sym_or(e.obj) + ", " + sym_or(e.fut) + ", " + (e.guard ? print_expr(*e.guard) : "_") + ", " +
               std::to_string(e.pp) + ")";
    case Event::Kind::SuspEv:
    case Event::Kind::SuspREv:
        return k + "(" + sym_or(e.obj) + ", " + sym_or(e.fut) + ", " + sym_or(e.val) + ", " + std::to_string(e.pp) + ")";
    case Event::Kind::NoEv: return k;
    }
    return k;
}

SymPtr introduced(const Event& e) {
    if (e.kind == Event::Kind::InvEv && e.fut && !e.fut->ground) return e.fut;
    if (e.kind == Event::Kind::FutREv && e.val && !e.val->ground) return e.val;
    return nullptr;
}

void collect_atoms(const Event& e, std::set<Atom>& out) {
    collect_atoms(e.obj, out);
    collect_atoms(e.callee, out);
    collect_atoms(e.fut, out);
    for (const auto& a : e.args) collect_atoms(a, out);
    collect_atoms(e.val, out);
}

std::optional<Event> substitute(const Event& e, const AtomMap& m) {
    Event r = e;
    if (!subst_into(r.obj, m) || !subst_into(r.callee, m) || !subst_into(r.fut, m) || !subst_into(r.val, m))
        return std::nullopt;
    for (auto& a : r.args)
        if (!subst_into(a, m)) return std::nullopt;
    return r;
}

bool suspending(const Event& e) { return e.kind == Event::Kind::CondEv || e.kind == Event::Kind::SuspEv; }

int compare(const HistElem& a, const HistElem& b) {
    if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
    if (is_state(a)) return compare(std::get<ObjState>(a), std::get<ObjState>(b));
    if (is_event(a)) return compare(std::get<Event>(a), std::get<Event>(b));
    return 0;
}

bool LocalTrace::well_formed() const {
    if (hs.size() % 2 == 0) return false;
    for (size_t i = 0; i < hs.size(); ++i)
        if ((i % 2 == 0) != is_state(hs[i])) return false;
    return true;
}

int compare(const LocalTrace& a, const LocalTrace& b) {
    if (a.sc.size() != b.sc.size()) return a.sc.size() < b.sc.size() ? -1 : 1;
    for (auto i = a.sc.begin(), j = b.sc.begin(); i != a.sc.end(); ++i, ++j)
        if (int c = compare(*i, *j)) return c;
    if (a.hs.size() != b.hs.size()) return a.hs.size() < b.hs.size() ? -1 : 1;
    for (size_t i = 0; i < a.hs.size(); ++i)
        if (int c = compare(a.hs[i], b.hs[i])) return c;
    return 0;
}

LocalTrace singleton(const ObjState& s) {
    LocalTrace t;
    t.hs.push_back(s);
    return t;
}

std::optional<LocalTrace> chop(const LocalTrace& a, const LocalTrace& b) {
    if (!(a.last() == b.first())) return std::nullopt;
    LocalTrace r = a;
    r.sc.insert(b.sc.begin(), b.sc.end());
    r.hs.insert(r.hs.end(), b.hs.begin() + 1, b.hs.end());
    r.path += b.path;
    return r;
}

std::optional<LocalTrace> megachop(const LocalTrace& a, const LocalTrace& b) {
    if (a.last() == b.first()) return chop(a, b);
    if (!heap_eq(a.last().rho, b.first().rho)) return std::nullopt;
    LocalTrace r = a;
    r.sc.insert(b.sc.begin(), b.sc.end());
    r.hs.push_back(Diamond{});
    r.hs.insert(r.hs.end(), b.hs.begin(), b.hs.end());
    r.path += b.path;
    return r;
}

std::optional<LocalTrace> apply_heap(const LocalTrace& t, const std::map<std::string, SymPtr>& rho, AtomMap* used) {
    AtomMap subst;
    auto leaf = [&](const Sym& s) -> SymPtr {
        if (s.kind != Sym::Kind::Field) return nullptr;
        auto it = rho.find(s.name);
        if (it == rho.end()) return nullptr;
        subst[atom_of(s)] = it->second;
        return it->second;
    };
    auto sub = [&](SymPtr& e) {
        if (!e) return true;
        e = substitute(e, leaf);
        return e != nullptr;
    };
    LocalTrace r = t;
    for (auto& h : r.hs) {
        if (is_diamond(h)) break;
        if (auto* s = std::get_if<ObjState>(&h)) {
            for (auto& [k, v] : s->sigma)
                if (!sub(v)) return std::nullopt;
            for (auto& [k, v] : s->rho)
                if (!sub(v)) return std::nullopt;
        } else {
            auto& e = std::get<Event>(h);
            if (!sub(e.obj) || !sub(e.callee) || !sub(e.fut) || !sub(e.val)) return std::nullopt;
            for (auto& a : e.args)
                if (!sub(a)) return std::nullopt;
        }
    }
    if (!subst.empty()) {
        SymSet sc;
        for (const auto& c : r.sc) {
            SymPtr d = substitute(c, subst);
            if (!d) return std::nullopt;
            sc.insert(d);
        }
        r.sc = std::move(sc);
    }
    if (used) used->insert(subst.begin(), subst.end());
    return r;
}

std::optional<LocalTrace> substitute(const LocalTrace& t, const AtomMap& m) {
    if (m.empty()) return t;
    LocalTrace r = t;
    for (auto& h : r.hs) {
        if (auto* s = std::get_if<ObjState>(&h)) {
            if (!subst_state(*s, m)) return std::nullopt;
        } else if (auto* e = std::get_if<Event>(&h)) {
            auto e2 = substitute(*e, m);
            if (!e2) return std::nullopt;
            *e = std::move(*e2);
        }
    }
    SymSet sc;
    for (const auto& c : r.sc) {
        SymPtr d = substitute(c, m);
        if (!d) return std::nullopt;
        sc.insert(d);
    }
    r.sc = std::move(sc);
    return r;
}

std::string to_string(const HistElem& h) {
    if (auto* s = std::get_if<ObjState>(&h)) return to_string(*s);
    if (auto* e = std::get_if<Event>(&h)) return to_string(*e);
    return "<>";
}

std::string sc_string(const SymSet& sc) {
    std::string s = "{";
    bool first = true;
    for (const auto& c : sc) {
        if (!first) s += ", ";
        first = false;
        s += to_string(c);
    }
    return s + "}";
}

std::string to_string(const LocalTrace& t) {
    std::string s = sc_string(t.sc) + " |> <\n";
    for (size_t i = 0; i < t.hs.size(); ++i) s += "  " + to_string(t.hs[i]) + (i + 1 < t.hs.size() ? ",\n" : "\n");
    return s + ">";
}

nlohmann::json to_json(const SymPtr& e) { return e ? nlohmann::json(to_string(e)) : nlohmann::json(nullptr); }

nlohmann::json to_json(const ObjState& s) {
    nlohmann::json j;
    j["sigma"] = nlohmann::json::object();
    j["rho"] = nlohmann::json::object();
    for (const auto& [k, v] : s.sigma) j["sigma"][k] = to_string(v);
    for (const auto& [k, v] : s.rho) j["rho"][k] = to_string(v);
    return j;
}

nlohmann::json to_json(const Event& e) {
    nlohmann::json j;
    j["event"] = kind_name(e.kind);
    if (e.kind == Event::Kind::NoEv) return j;
    j["object"] = to_json(e.obj);
    if (e.callee) j["callee"] = to_json(e.callee);
    j["future"] = to_json(e.fut);
    if (!e.method.empty()) j["method"] = e.method;
    if (e.kind == Event::Kind::InvEv || e.kind == Event::Kind::InvREv) {
        j["args"] = nlohmann::json::array();
        for (const auto& a : e.args) j["args"].push_back(to_string(a));
    }
    if (e.val) j["value"] = to_json(e.val);
    if (e.guard) j["guard"] = print_expr(*e.guard);
    if (e.pp >= 0) j["pp"] = e.pp;
    return j;
}

nlohmann::json to_json(const HistElem& h) {
    if (auto* s = std::get_if<ObjState>(&h)) return to_json(*s);
    if (auto* e = std::get_if<Event>(&h)) return to_json(*e);
    return nlohmann::json{{"marker", "diamond"}};
}

nlohmann::json to_json(const LocalTrace& t) {
    nlohmann::json j;
    j["sc"] = nlohmann::json::array();
    for (const auto& c : t.sc) j["sc"].push_back(to_string(c));
    j["hs"] = nlohmann::json::array();
    for (const auto& h : t.hs) j["hs"].push_back(to_json(h));
    return j;
}

}  // namespace cao
