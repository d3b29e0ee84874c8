#include "spalps/json_io.hpp"

#include <stdexcept>

#include "json.hpp"

namespace spalps {

namespace {

using nlohmann::json;

json expr_to_json(const ExprPtr& e) {
    switch (e->op) {
        case SymbolicExpr::Op::Const:
            return json{{"op", "const"},
                        {"num", std::to_string(e->value.num())},
                        {"den", std::to_string(e->value.den())}};
        case SymbolicExpr::Op::Var:
            return json{{"op", "var"}, {"state", e->state}, {"loc", e->loc}};
        case SymbolicExpr::Op::NeighborSum:
            return json{{"op", "nbsum"}, {"state", e->state}, {"loc", e->loc}};
        default: {
            const char* tag = e->op == SymbolicExpr::Op::Add   ? "add"
                              : e->op == SymbolicExpr::Op::Sub ? "sub"
                              : e->op == SymbolicExpr::Op::Mul ? "mul"
                              : e->op == SymbolicExpr::Op::Div ? "div"
                                                               : "min";
            json args = json::array();
            for (const auto& a : e->args) args.push_back(expr_to_json(a));
            return json{{"op", tag}, {"args", std::move(args)}};
        }
    }
}

ExprPtr expr_from_json(const json& j) {
    const std::string op = j.at("op").get<std::string>();
    if (op == "const") {
        std::int64_t num = std::stoll(j.at("num").get<std::string>());
        std::int64_t den = std::stoll(j.at("den").get<std::string>());
        return SymbolicExpr::constant(Rational(num, den));
    }
    if (op == "var") return SymbolicExpr::var(j.at("state").get<int>(), j.at("loc").get<int>());
    if (op == "nbsum") {
        return SymbolicExpr::neighbor_sum(j.at("state").get<int>(), j.at("loc").get<int>());
    }
    std::vector<ExprPtr> args;
    for (const auto& a : j.at("args")) args.push_back(expr_from_json(a));
    if (op == "add") return SymbolicExpr::add(std::move(args));
    if (op == "mul") return SymbolicExpr::mul(std::move(args));
    if (args.size() != 2) throw std::runtime_error("binary operator needs two operands");
    if (op == "sub") return SymbolicExpr::sub(args[0], args[1]);
    if (op == "div") return SymbolicExpr::div(args[0], args[1]);
    if (op == "min") return SymbolicExpr::min2(args[0], args[1]);
    throw std::runtime_error("unknown expression operator `" + op + "`");
}

}  // namespace

std::string compiled_json(const Compiled& c) {
    const Habitat& h = c.model.habitat;
    json j;
    j["format"] = "spalps-compiled";
    j["format_version"] = 1;

    json hab;
    hab["kind"] = h.kind == Habitat::Kind::Ring ? "ring" : "graph";
    hab["names"] = h.names;
    hab["adj"] = h.adj;
    j["habitat"] = std::move(hab);

    json states = json::array();
    for (int k = 0; k < c.space.size(); ++k) {
        const CanonicalState& st = c.space[k];
        json s;
        s["name"] = st.display;
        s["head"] = head_kind_name(st.head);
        s["species"] =
            st.species >= 0 ? c.model.species_names[st.species] : std::string();
        states.push_back(std::move(s));
    }
    j["states"] = std::move(states);

    json init = json::array();
    for (int k = 0; k < c.init.states; ++k) {
        json row = json::array();
        for (int l = 0; l < c.init.locations; ++l) row.push_back(c.init.at(k, l));
        init.push_back(std::move(row));
    }
    j["init"] = std::move(init);

    DenseSTT dense = materialize(c.stt, c.space, h);
    EquationSystem eq = derive_equations(dense, h);
    json eqs = json::array();
    for (int i = 0; i < eq.states; ++i) {
        json row = json::array();
        for (int l = 0; l < eq.locations; ++l) {
            const ExprPtr& e = eq.at(i, l);
            if (e) {
                row.push_back(expr_to_json(e));
            } else {
                row.push_back(nullptr);
            }
        }
        eqs.push_back(std::move(row));
    }
    j["equations"] = std::move(eqs);

    return j.dump(2) + "\n";
}

CompiledArtifact parse_compiled_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("format").get<std::string>() != "spalps-compiled") {
        throw std::runtime_error("not a compiled-model artifact");
    }

    CompiledArtifact art;
    const json& hab = j.at("habitat");
    art.habitat.kind = hab.at("kind").get<std::string>() == "ring" ? Habitat::Kind::Ring
                                                                   : Habitat::Kind::Graph;
    art.habitat.names = hab.at("names").get<std::vector<std::string>>();
    art.habitat.adj = hab.at("adj").get<std::vector<std::vector<int>>>();
    if (art.habitat.names.size() != art.habitat.adj.size()) {
        throw std::runtime_error("habitat name/adjacency size mismatch");
    }

    for (const auto& s : j.at("states")) {
        art.state_names.push_back(s.at("name").get<std::string>());
        art.species.push_back(s.at("species").get<std::string>());
    }

    const json& init = j.at("init");
    art.init.states = static_cast<int>(init.size());
    art.init.locations = art.habitat.location_count();
    art.init.cells.assign(
        static_cast<size_t>(art.init.states) * art.init.locations, 0);
    for (int k = 0; k < art.init.states; ++k) {
        const json& row = init.at(k);
        if (static_cast<int>(row.size()) != art.init.locations) {
            throw std::runtime_error("initial occupancy row size mismatch");
        }
        for (int l = 0; l < art.init.locations; ++l) {
            art.init.at(k, l) = row.at(l).get<std::int64_t>();
        }
    }

    const json& eqs = j.at("equations");
    if (static_cast<int>(eqs.size()) != art.init.states) {
        throw std::runtime_error("equation row count mismatch");
    }
    art.equations.states = art.init.states;
    art.equations.locations = art.init.locations;
    art.equations.rhs.assign(
        static_cast<size_t>(art.equations.states) * art.equations.locations, nullptr);
    for (int i = 0; i < art.equations.states; ++i) {
        const json& row = eqs.at(i);
        if (static_cast<int>(row.size()) != art.equations.locations) {
            throw std::runtime_error("equation column count mismatch");
        }
        for (int l = 0; l < art.equations.locations; ++l) {
            if (!row.at(l).is_null()) {
                art.equations.rhs[static_cast<size_t>(i) * art.equations.locations + l] =
                    expr_from_json(row.at(l));
            }
        }
    }
    return art;
}

std::string expr_json(const ExprPtr& e) { return expr_to_json(e).dump(); }

ExprPtr parse_expr_json(const std::string& text) {
    return expr_from_json(json::parse(text));
}

}  // namespace spalps
