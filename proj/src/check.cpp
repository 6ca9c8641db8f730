#include "cao/frontend.hpp"

#include <map>
#include <set>

namespace cao {

namespace {

StmtPtr mk_skip(Loc l) {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Skip;
    s->loc = l;
    return s;
}

void end_in_skip(Block& b, Loc l) {
    if (b.empty() || b.back()->kind != Stmt::Kind::Skip) b.push_back(mk_skip(b.empty() ? l : b.back()->loc));
}

void desugar_block(Block& b) {
    for (auto& s : b) {
        if (s->kind == Stmt::Kind::If) {
            desugar_block(s->then_b);
            desugar_block(s->else_b);
            end_in_skip(s->then_b, s->loc);
            end_in_skip(s->else_b, s->loc);
        } else if (s->kind == Stmt::Kind::While) {
            desugar_block(s->body);
            end_in_skip(s->body, s->loc);
        }
    }
}

}  // namespace

void desugar(Program& p) {
    for (auto& c : p.classes)
        for (auto& m : c.methods) desugar_block(m.body);
}

std::vector<Diagnostic> check_wellformed(const Program& p) {
    std::vector<Diagnostic> ds;
    auto err = [&](Loc l, std::string msg) { ds.push_back({p.file, l, std::move(msg)}); };

    // variables, fields and references share one program-wide namespace
    std::map<std::string, std::string> owner;
    auto claim = [&](const std::string& n, const std::string& where, Loc l) {
        auto [it, fresh] = owner.emplace(n, where);
        if (!fresh) err(l, "name '" + n + "' is not program-wide unique (also used in " + it->second + ")");
    };
    std::set<int> points;

    for (const auto& c : p.classes) {
        for (const auto& r : c.params) claim(r.name, "class " + c.name, r.loc);
        for (const auto& f : c.fields) claim(f.name, "class " + c.name, f.loc);
        std::set<std::string> mnames;
        for (const auto& m : c.methods)
            if (!mnames.insert(m.name).second) err(m.loc, "duplicate method '" + m.qualified() + "'");
    }

    for (const auto& c : p.classes) {
        for (const auto& m : c.methods) {
            const std::string where = "method " + m.qualified();
            for (const auto& prm : m.params) claim(prm.name, where, prm.loc);
            std::set<std::string> params;
            for (const auto& prm : m.params) params.insert(prm.name);

            int returns = 0;
            for_each_stmt(m.body, [&](const Stmt& s) {
                if (s.kind == Stmt::Kind::Return) ++returns;
                if (s.is_decl) claim(s.var, where, s.loc);
                if ((s.kind == Stmt::Kind::Get || s.kind == Stmt::Kind::Await) && !points.insert(s.pp).second)
                    err(s.loc, "program point " + std::to_string(s.pp) + " is not unique");
                if (!s.var.empty() && params.count(s.var)) err(s.loc, "parameter '" + s.var + "' is reassigned");
                if (!s.var.empty() && c.is_ref(s.var)) err(s.loc, "reference '" + s.var + "' is reassigned");
                if (s.kind == Stmt::Kind::FieldAssign && c.is_ref(s.field))
                    err(s.loc, "reference '" + s.field + "' is reassigned");
                auto skip_end = [&](const Block& b, const char* what) {
                    if (b.empty() || b.back()->kind != Stmt::Kind::Skip)
                        err(s.loc, std::string(what) + " does not end in skip");
                };
                if (s.kind == Stmt::Kind::If) {
                    skip_end(s.then_b, "then branch");
                    skip_end(s.else_b, "else branch");
                }
                if (s.kind == Stmt::Kind::While) skip_end(s.body, "loop body");
            });
            if (returns != 1) err(m.loc, "method " + m.qualified() + " must have exactly one return, found " + std::to_string(returns));
            if (m.body.empty() || m.body.back()->kind != Stmt::Kind::Return)
                err(m.loc, "method " + m.qualified() + " must end with its return statement");
        }
    }

    std::set<std::string> objs;
    for (const auto& cr : p.main.creations)
        if (!objs.insert(cr.var).second) err(cr.loc, "object '" + cr.var + "' created twice");
    if (!objs.count(p.main.target)) err(p.main.loc, "initial call target '" + p.main.target + "' is not created");
    return ds;
}

}  // namespace cao
