// cao: command-line front end of the workbench.
//
// Exit codes: 0 ok, 1 refutation / violation / ill-formed program, 2 unknown
// (1 with --strict), 3 usage or unreadable input.
#include "cao/bpl.hpp"
#include "cao/frontend.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace cao;
using json = nlohmann::json;

namespace {

constexpr int kOk = 0, kFail = 1, kUnknown = 2, kUsage = 3;

struct Config {
    uint64_t seed = 0;
    int steps = 10000;
    int unroll = 8;
    int halo = 8;
    int subset_cap = 16;
    int jobs = 1;
    int seeds = 200;
    std::string format = "pretty";
    bool strict = false;
    bool no_dedup = false;
    std::string emit_smt;
    std::string file, spec, formulas;
    int site = -1;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool color() {
    const char* c = std::getenv("CAO_COLOR");
    if (!c) return false;
    std::string s = c;
    if (s == "always" || s == "1") return true;
    if (s == "auto") return isatty(2);
    return false;
}

void diag(const std::string& kind, const std::string& msg) {
    if (color()) std::cerr << (kind == "error" ? "\033[31m" : "\033[33m") << kind << "\033[0m: " << msg << "\n";
    else std::cerr << kind << ": " << msg << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Program load(const std::string& path) {
    return load_program(read_file(path), path);
}

GlobalOptions global_opts(const Config& c) {
    GlobalOptions o;
    o.steps = c.steps;
    o.local.unroll = c.unroll;
    o.dedup = !c.no_dedup;
    return o;
}

EvalConfig eval_cfg(const Config& c, const Program& p) {
    EvalConfig e;
    e.halo = c.halo;
    e.subset_cap = c.subset_cap;
    for (const auto& cl : p.classes)
        for (const auto& m : cl.methods) e.methods.push_back(m.qualified());
    for (const auto& cr : p.main.creations) e.objects.push_back(cr.var);
    return e;
}

int unknown_code(const Config& c) { return c.strict ? kFail : kUnknown; }

void emit(const Config& c, const json& j, const std::string& pretty) {
    if (c.format == "json") std::cout << j.dump(2) << "\n";
    else std::cout << pretty;
}

std::string run_pretty(const Run& r) {
    std::ostringstream os;
    for (size_t i = 0; i < r.gamma.events.size(); ++i) os << "  " << i + 1 << ". " << to_string(r.gamma.events[i]) << "\n";
    for (const auto& pr : r.procs) {
        os << "  process " << pr.object << "." << pr.method << " fut(" << pr.fut << ")";
        if (!pr.chi.empty()) {
            os << " chi {";
            bool first = true;
            for (const auto& [a, v] : pr.chi) {
                os << (first ? "" : ", ") << to_string(a) << " -> " << to_string(v);
                first = false;
            }
            os << "}";
        }
        os << "\n";
    }
    return os.str();
}

std::string stats_pretty(const ExploreStats& s) {
    std::ostringstream os;
    os << "states visited " << s.states_visited << ", runs completed " << s.runs_completed << ", truncated "
       << s.runs_truncated << ", stuck " << s.runs_stuck << (s.run_cap_hit ? ", run cap hit" : "") << "\n";
    return os.str();
}

// ---- commands

int cmd_check(const Config& c) {
    try {
        Program p = load(c.file);
        size_t methods = 0;
        for (const auto& cl : p.classes) methods += cl.methods.size();
        json j{{"file", c.file}, {"ok", true}, {"classes", p.classes.size()}, {"methods", methods},
               {"diagnostics", json::array()}};
        emit(c, j, "ok: " + c.file + " (" + std::to_string(p.classes.size()) + " classes, " + std::to_string(methods) +
                       " methods)\n");
        return kOk;
    } catch (const FrontendError& e) {
        json ds = json::array();
        for (const auto& d : e.diagnostics()) {
            ds.push_back({{"file", d.file}, {"line", d.loc.line}, {"col", d.loc.col}, {"message", d.message}});
            if (c.format != "json") diag("error", d.str());
        }
        if (c.format == "json") std::cout << json{{"file", c.file}, {"ok", false}, {"diagnostics", ds}}.dump(2) << "\n";
        return kFail;
    }
}

int cmd_run(const Config& c) {
    Program p = load(c.file);
    ExploreResult r = explore_random(p, c.seed, global_opts(c));
    json j{{"seed", c.seed}, {"stats", to_json(r.stats)}};
    j["run"] = r.runs.empty() ? json(nullptr) : to_json(r.runs.front());
    if (!r.stuck_reasons.empty()) j["stuck"] = r.stuck_reasons;
    std::string pretty = "seed " + std::to_string(c.seed) + ": ";
    if (r.runs.empty()) pretty += "no terminated run\n" + stats_pretty(r.stats);
    else pretty += "terminated after " + std::to_string(r.runs.front().gamma.events.size()) + " events\n" + run_pretty(r.runs.front());
    emit(c, j, pretty);
    return r.runs.empty() ? unknown_code(c) : kOk;
}

int cmd_explore(const Config& c) {
    Program p = load(c.file);
    ExploreResult r = explore(p, global_opts(c));
    json runs = json::array();
    std::ostringstream os;
    os << stats_pretty(r.stats);
    size_t bad = 0;
    for (size_t i = 0; i < r.runs.size(); ++i) {
        Hygiene h = check_hygiene(r.runs[i]);
        json rj = to_json(r.runs[i]);
        rj["hygiene"] = {{"ok", h.ok()}, {"details", h.details}};
        runs.push_back(rj);
        if (!h.ok()) ++bad;
        os << "run " << i + 1 << (h.ok() ? "" : " (hygiene violations)") << "\n" << run_pretty(r.runs[i]);
    }
    json j{{"stats", to_json(r.stats)}, {"runs", runs}};
    if (!r.stuck_reasons.empty()) j["stuck"] = r.stuck_reasons;
    emit(c, j, os.str());
    if (bad) return kFail;
    if (r.stats.runs_truncated || r.stats.run_cap_hit) return unknown_code(c);
    return kOk;
}

struct McItem {
    std::string target;  // C.m, "object o", or empty = every process
    FormulaPtr psi;
    std::string text;
};

std::vector<McItem> parse_mc(const std::string& text) {
    std::string clean;
    for (std::istringstream in(text); !in.eof();) {
        std::string line;
        std::getline(in, line);
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        clean += line + "\n";
    }
    std::vector<McItem> out;
    std::istringstream ss(clean);
    std::string stmt;
    while (std::getline(ss, stmt, ';')) {
        auto b = stmt.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) continue;
        stmt = stmt.substr(b);
        McItem it;
        // "C.m : psi" or "object o : psi"
        size_t colon = stmt.find(':');
        std::string head = colon == std::string::npos ? "" : stmt.substr(0, colon);
        while (!head.empty() && std::isspace(static_cast<unsigned char>(head.back()))) head.pop_back();
        bool qualified = !head.empty() && std::isupper(static_cast<unsigned char>(head[0])) &&
                         head.find('.') != std::string::npos && head.find(' ') == std::string::npos;
        bool object = head.rfind("object ", 0) == 0;
        if (qualified || object) {
            it.target = head;
            stmt = stmt.substr(colon + 1);
        }
        it.text = stmt;
        try {
            it.psi = parse_formula(stmt);
        } catch (const LogicError& e) {
            throw UsageError(std::string("formula file: ") + e.what());
        }
        out.push_back(std::move(it));
    }
    return out;
}

int cmd_mc(const Config& c) {
    Program p = load(c.file);
    std::vector<McItem> items = parse_mc(read_file(c.formulas));
    ExploreResult r = explore(p, global_opts(c));
    EvalConfig ec = eval_cfg(c, p);
    json res = json::array();
    std::ostringstream os;
    size_t f = 0, u = 0;
    for (const auto& it : items) {
        json verdicts = json::array();
        size_t t = 0, fl = 0, un = 0;
        auto check = [&](const std::string& who, size_t run, const LocalTrace& tr) {
            TV v = TV::Unknown;
            std::string err;
            try {
                v = eval_mso(it.psi, tr, {}, ec);
            } catch (const LogicError& e) {
                err = e.what();
            }
            (v == TV::True ? t : v == TV::False ? fl : un)++;
            json vj{{"run", run}, {"trace", who}, {"verdict", tv_name(v)}};
            if (!err.empty()) vj["error"] = err;
            verdicts.push_back(vj);
        };
        for (size_t i = 0; i < r.runs.size(); ++i) {
            const Run& run = r.runs[i];
            if (it.target.rfind("object ", 0) == 0) {
                std::string o = it.target.substr(7);
                for (const auto& [name, tr] : run.object_traces)
                    if (name == o) check("object " + name, i + 1, tr);
            } else {
                for (const auto& pr : run.procs)
                    if (it.target.empty() || pr.method == it.target)
                        check(pr.object + "." + pr.method + " fut(" + std::to_string(pr.fut) + ")", i + 1, pr.realized);
            }
        }
        f += fl;
        u += un;
        res.push_back({{"target", it.target.empty() ? "*" : it.target},
                       {"formula", to_string(it.psi)},
                       {"true", t},
                       {"false", fl},
                       {"unknown", un},
                       {"verdicts", verdicts}});
        os << (it.target.empty() ? "*" : it.target) << " : " << to_string(it.psi) << "\n  " << t << " true, " << fl
           << " false, " << un << " unknown\n";
    }
    json j{{"stats", to_json(r.stats)}, {"results", res}};
    emit(c, j, stats_pretty(r.stats) + os.str());
    if (f) return kFail;
    if (u) return unknown_code(c);
    return kOk;
}

int cmd_p2(const Config& c) {
    Program p = load(c.file);
    PointsTo pt = points_to_all(p);
    if (c.site >= 0) {
        try {
            std::set<std::string> ms = points_to(p, c.site);
            pt.sites = {{c.site, ms}};
        } catch (const SpecError& e) {
            throw UsageError(e.what());
        }
    }
    std::ostringstream os;
    for (const auto& [site, ms] : pt.sites) {
        os << "get_" << site << " : {";
        bool first = true;
        for (const auto& m : ms) {
            os << (first ? "" : ", ") << m;
            first = false;
        }
        os << "}\n";
    }
    emit(c, json{{"sites", to_json(pt)}}, os.str());
    return kOk;
}

struct ProveOutcome {
    std::vector<ProofResult> results;
    ConsistencyReport consistency;
    int code = kOk;
    json j;
    std::string pretty;
};

ProveOutcome prove_all(const Config& c, const Program& p, const Scheme& s) {
    ProveOutcome o;
    std::vector<std::string> methods;
    for (const auto& [m, t] : s.types) methods.push_back(m);
    o.results.resize(methods.size());
    std::atomic<size_t> next{0};
    std::vector<std::string> errors(methods.size());
    auto worker = [&] {
        for (size_t i; (i = next++) < methods.size();) {
            try {
                o.results[i] = prove_method(s, methods[i]);
            } catch (const std::exception& e) {
                o.results[i].method = methods[i];
                o.results[i].open.push_back(methods[i] + ": " + e.what());
                errors[i] = e.what();
            }
        }
    };
    int jobs = std::max(1, std::min<int>(c.jobs, static_cast<int>(methods.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    o.consistency = check_consistency(s);

    bool refuted = false, unknown = false;
    json ms = json::array();
    json open = json::array();
    std::ostringstream os;
    for (const auto& r : o.results) {
        refuted = refuted || r.verdict == Verdict::Refuted;
        unknown = unknown || r.verdict == Verdict::Unknown;
        ms.push_back(to_json(r));
        for (const auto& x : r.open) open.push_back(x);
        os << r.method << " : " << verdict_name(r.verdict) << "\n";
        for (const auto& x : r.open) os << "  open: " << x << "\n";
    }
    for (const auto& it : o.consistency.items) {
        refuted = refuted || it.result == Validity::Invalid;
        unknown = unknown || it.result == Validity::Unknown;
        os << "consistency: " << it.what << " : " << validity_name(it.result)
           << (it.detail.empty() ? "" : " (" + it.detail + ")") << "\n";
    }
    const char* verdict = refuted ? "refuted-candidate" : unknown ? "unknown" : "proved";
    os << "verdict: " << verdict << "\n";
    o.j = json{{"program", c.file}, {"spec", c.spec}, {"verdict", verdict}, {"methods", ms},
               {"consistency", to_json(o.consistency)}, {"open", open}};
    o.pretty = os.str();
    o.code = refuted ? kFail : unknown ? unknown_code(c) : kOk;

    if (!c.emit_smt.empty()) {
        std::filesystem::create_directories(c.emit_smt);
        for (const auto& r : o.results) {
            std::vector<const ProofNode*> vcs;
            collect_vcs(r.tree, vcs);
            for (size_t k = 0; k < vcs.size(); ++k) {
                std::vector<FormulaPtr> g;
                for (const auto& h : vcs[k]->hyps) g.push_back(parse_formula(h));
                std::string name = r.method;
                std::replace(name.begin(), name.end(), '.', '_');
                std::ofstream out(c.emit_smt + "/" + name + "_" + std::to_string(k) + ".smt2");
                out << "; " << vcs[k]->rule << " " << validity_name(vcs[k]->vc.v) << "\n"
                    << to_smtlib(g, parse_formula(vcs[k]->goal), vcs[k]->sorts);
            }
        }
    }
    (void)p;
    return o;
}

SpecFile load_spec_or_usage(const std::string& path) {
    try {
        return parse_spec(read_file(path), path);
    } catch (const SpecError& e) {
        throw UsageError(e.what());
    } catch (const LogicError& e) {
        throw UsageError(path + ": " + e.what());
    }
}

int cmd_prove(const Config& c) {
    Program p = load(c.file);
    SpecFile sf = load_spec_or_usage(c.spec);
    Scheme s = make_scheme(p, sf);
    ProveOutcome o = prove_all(c, p, s);
    emit(c, o.j, o.pretty);
    return o.code;
}

int cmd_oracle(const Config& c) {
    Program p = load(c.file);
    SpecFile sf = load_spec_or_usage(c.spec);
    Scheme s = make_scheme(p, sf);
    ProveOutcome o = prove_all(c, p, s);
    if (o.code != kOk) {
        json j{{"established", false}, {"prove", o.j}};
        emit(c, j, o.pretty + "oracle: scheme not established, nothing to cross-check\n");
        return o.code;
    }
    EvalConfig ec = eval_cfg(c, p);
    GlobalOptions go = global_opts(c);
    std::vector<Run> runs = explore(p, go).runs;
    for (int k = 0; k < c.seeds; ++k) {
        auto r = explore_random(p, c.seed + static_cast<uint64_t>(k), go);
        for (auto& x : r.runs) runs.push_back(std::move(x));
    }
    size_t checked = 0, unknown = 0;
    json viol = json::array();
    for (size_t i = 0; i < runs.size(); ++i) {
        for (const auto& pr : runs[i].procs) {
            auto t = s.types.find(pr.method);
            if (t == s.types.end()) continue;
            ++checked;
            TV v = match_trace(after_receive(pr.realized), t->second.body, s.env, ec);
            if (v == TV::Unknown) ++unknown;
            if (v == TV::False)
                viol.push_back({{"run", i + 1}, {"process", to_json(pr)}, {"type", to_string(t->second)}});
        }
    }
    json j{{"established", true}, {"prove", o.j}, {"runs", runs.size()}, {"tracesChecked", checked},
           {"unknown", unknown}, {"violations", viol}};
    std::ostringstream os;
    os << o.pretty << "oracle: " << runs.size() << " runs, " << checked << " traces checked, " << viol.size()
       << " violations, " << unknown << " unknown\n";
    for (const auto& v : viol)
        os << "  violation in run " << v["run"] << ": " << v["process"]["method"].get<std::string>() << "\n";
    emit(c, j, os.str());
    if (!viol.empty()) return kFail;
    if (unknown) return unknown_code(c);
    return kOk;
}

void common(CLI::App* sub, Config& c) {
    sub->add_option("--seed", c.seed, "scheduler seed")->capture_default_str();
    sub->add_option("--steps", c.steps, "step bound per run")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--unroll", c.unroll, "loop unrolling budget")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--halo", c.halo, "numeric quantifier halo")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--subset-cap", c.subset_cap, "largest position set enumerated by set quantifiers")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "pretty"}))->capture_default_str();
    sub->add_option("--jobs", c.jobs, "parallel proofs")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_flag("--strict", c.strict, "treat unknown as failure");
    sub->add_flag("--no-dedup", c.no_dedup, "disable state deduplication during exploration");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cao: verification workbench for CAO active-object programs"};
    app.require_subcommand(1);
    Config c;
    std::string which;

    auto* check = app.add_subcommand("check", "parse, typecheck and check well-formedness");
    auto* run = app.add_subcommand("run", "one seeded run");
    auto* expl = app.add_subcommand("explore", "all terminated runs");
    auto* mc = app.add_subcommand("mc", "evaluate trace formulas over explored traces");
    auto* p2 = app.add_subcommand("p2", "points-to table per get site");
    auto* prove = app.add_subcommand("prove", "prove methods against their types");
    auto* oracle = app.add_subcommand("oracle", "prove, explore and match every selected trace against its type");
    for (auto* s : {check, run, expl, mc, p2, prove, oracle}) {
        s->add_option("file", c.file, "CAO program")->required();
        common(s, c);
    }
    mc->add_option("formulas", c.formulas, "formula file")->required();
    p2->add_option("--site", c.site, "single get site");
    for (auto* s : {prove, oracle}) {
        s->add_option("spec", c.spec, ".btype file")->required();
        s->add_option("--emit-smt", c.emit_smt, "write every VC as SMT-LIB into this directory");
    }
    oracle->add_option("--seeds", c.seeds, "random schedules besides exhaustive exploration")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*check) return cmd_check(c);
        if (*run) return cmd_run(c);
        if (*expl) return cmd_explore(c);
        if (*mc) return cmd_mc(c);
        if (*p2) return cmd_p2(c);
        if (*prove) return cmd_prove(c);
        if (*oracle) return cmd_oracle(c);
    } catch (const UsageError& e) {
        diag("error", e.what());
        return kUsage;
    } catch (const FrontendError& e) {
        for (const auto& d : e.diagnostics()) diag("error", d.str());
        return kFail;
    } catch (const SpecError& e) {
        diag("error", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        diag("error", e.what());
        return kFail;
    }
    return kUsage;
}
