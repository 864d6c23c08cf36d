#include "lamination/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "lamination/errors.hpp"

namespace lamination {

using nlohmann::json;

namespace {

// Typed access to one JSON object with unknown-key rejection.
class Reader {
public:
    Reader(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("expected an object", {{"path", path_}});
        for (const auto& [key, value] : j_.items()) {
            if (!allowed.count(key)) throw ConfigError("unknown key", {{"path", path_ + "/" + key}});
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    T get(const std::string& key, T fallback) const {
        if (!has(key)) return fallback;
        return required<T>(key);
    }

    template <class T>
    T required(const std::string& key) const {
        if (!has(key)) throw ConfigError("missing key", {{"path", path_ + "/" + key}});
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad value: ") + e.what(), {{"path", path_ + "/" + key}});
        }
    }

    const json& at(const std::string& key) const { return j_.at(key); }
    std::string child(const std::string& key) const { return path_ + "/" + key; }

private:
    const json& j_;
    std::string path_;
};

MarketSpec parse_market(const json& j, const std::string& path) {
    const auto kind = Reader(j, path, {"kind", "alpha", "beta", "epsilon", "lambda", "x_ref", "p_ref", "price"})
                          .required<std::string>("kind");
    MarketSpec m;
    m.kind = kind;
    if (kind == "cpmm") {
        const Reader r(j, path, {"kind", "alpha", "beta", "epsilon"});
        m.alpha = r.get("alpha", m.alpha);
        m.beta = r.get("beta", m.beta);
        m.epsilon = r.get("epsilon", m.epsilon);
    } else if (kind == "exponential") {
        const Reader r(j, path, {"kind", "lambda", "x_ref", "p_ref"});
        m.lambda = r.get("lambda", m.lambda);
        m.x_ref = r.get("x_ref", m.x_ref);
        m.p_ref = r.get("p_ref", m.p_ref);
    } else if (kind == "reference") {
        const Reader r(j, path, {"kind", "price"});
        m.price = r.get("price", m.price);
    } else {
        throw ConfigError("unknown market kind", {{"path", path + "/kind"}, {"kind", kind}});
    }
    return m;
}

json market_json(const MarketSpec& m) {
    if (m.kind == "cpmm") return {{"kind", m.kind}, {"alpha", m.alpha}, {"beta", m.beta}, {"epsilon", m.epsilon}};
    if (m.kind == "exponential") return {{"kind", m.kind}, {"lambda", m.lambda}, {"x_ref", m.x_ref}, {"p_ref", m.p_ref}};
    return {{"kind", m.kind}, {"price", m.price}};
}

DistSpec parse_dist(const json& j, const std::string& path) {
    DistSpec d;
    d.kind = Reader(j, path, {"kind", "value", "a", "b", "mu", "sigma", "r_plus", "r_minus", "p_plus", "values", "probs"})
                 .required<std::string>("kind");
    if (d.kind == "point") {
        const Reader r(j, path, {"kind", "value"});
        d.value = r.required<double>("value");
    } else if (d.kind == "uniform") {
        const Reader r(j, path, {"kind", "a", "b"});
        d.a = r.required<double>("a");
        d.b = r.required<double>("b");
    } else if (d.kind == "truncated_normal") {
        const Reader r(j, path, {"kind", "mu", "sigma", "a", "b"});
        d.mu = r.required<double>("mu");
        d.sigma = r.required<double>("sigma");
        d.a = r.required<double>("a");
        d.b = r.required<double>("b");
    } else if (d.kind == "two_point") {
        const Reader r(j, path, {"kind", "r_plus", "r_minus", "p_plus"});
        d.r_plus = r.required<double>("r_plus");
        d.r_minus = r.required<double>("r_minus");
        d.p_plus = r.get("p_plus", d.p_plus);
    } else if (d.kind == "discrete") {
        const Reader r(j, path, {"kind", "values", "probs"});
        d.values = r.required<std::vector<double>>("values");
        d.probs = r.required<std::vector<double>>("probs");
    } else {
        throw ConfigError("unknown distribution kind", {{"path", path + "/kind"}, {"kind", d.kind}});
    }
    return d;
}

json dist_json(const DistSpec& d) {
    if (d.kind == "point") return {{"kind", d.kind}, {"value", d.value}};
    if (d.kind == "uniform") return {{"kind", d.kind}, {"a", d.a}, {"b", d.b}};
    if (d.kind == "truncated_normal") return {{"kind", d.kind}, {"mu", d.mu}, {"sigma", d.sigma}, {"a", d.a}, {"b", d.b}};
    if (d.kind == "two_point") return {{"kind", d.kind}, {"r_plus", d.r_plus}, {"r_minus", d.r_minus}, {"p_plus", d.p_plus}};
    return {{"kind", d.kind}, {"values", d.values}, {"probs", d.probs}};
}

FlowSpec parse_flow(const json& j, const std::string& path, std::optional<int> K) {
    FlowSpec f;
    f.kind = Reader(j, path, {"kind", "dist", "K", "r", "samples", "scale"}).required<std::string>("kind");
    if (f.kind == "iid") {
        const Reader r(j, path, {"kind", "dist", "K", "scale"});
        f.dist = parse_dist(r.at("dist"), r.child("dist"));
        if (r.has("K")) {
            f.K = r.required<int>("K");
        } else if (K) {
            f.K = *K;
        } else {
            throw ConfigError("iid flow needs K", {{"path", path + "/K"}});
        }
        f.scale = r.get("scale", 1.0);
    } else if (f.kind == "deterministic" || f.kind == "permuted") {
        const Reader r(j, path, {"kind", "r", "scale"});
        f.r = r.required<std::vector<double>>("r");
        f.K = static_cast<int>(f.r.size());
        f.scale = r.get("scale", 1.0);
    } else if (f.kind == "empirical") {
        const Reader r(j, path, {"kind", "samples", "scale"});
        f.samples = r.required<std::vector<std::vector<double>>>("samples");
        if (f.samples.empty()) throw ConfigError("empirical flow needs samples", {{"path", path + "/samples"}});
        f.K = static_cast<int>(f.samples.front().size());
        f.scale = r.get("scale", 1.0);
    } else {
        throw ConfigError("unknown flow kind", {{"path", path + "/kind"}, {"kind", f.kind}});
    }
    return f;
}

json flow_json(const FlowSpec& f) {
    json j{{"kind", f.kind}};
    if (f.kind == "iid") {
        j["dist"] = dist_json(f.dist);
        j["K"] = f.K;
    } else if (f.kind == "empirical") {
        j["samples"] = f.samples;
    } else {
        j["r"] = f.r;
    }
    if (f.scale != 1.0) j["scale"] = f.scale;
    return j;
}

AllocSpec parse_alloc(const json& j, const std::string& path) {
    AllocSpec a;
    a.kind = Reader(j, path, {"kind", "weights", "player", "N", "map", "maps", "probs", "blind"}).required<std::string>("kind");
    if (a.kind == "bernoulli") {
        const Reader r(j, path, {"kind", "weights"});
        a.weights = r.required<std::vector<double>>("weights");
        a.N = static_cast<int>(a.weights.size());
    } else if (a.kind == "monopoly") {
        const Reader r(j, path, {"kind", "player", "N"});
        a.player = r.get("player", 1);
        a.N = r.get("N", a.player);
    } else if (a.kind == "permuted") {
        const Reader r(j, path, {"kind", "map", "N"});
        a.map = r.required<std::vector<int>>("map");
        int hi = 1;
        for (int p : a.map) hi = std::max(hi, p);
        a.N = r.get("N", hi);
    } else if (a.kind == "explicit") {
        const Reader r(j, path, {"kind", "maps", "probs", "N", "blind"});
        a.maps = r.required<std::vector<std::vector<int>>>("maps");
        a.probs = r.required<std::vector<double>>("probs");
        int hi = 1;
        for (const auto& m : a.maps) {
            for (int p : m) hi = std::max(hi, p);
        }
        a.N = r.get("N", hi);
        a.blind = r.get("blind", true);
    } else {
        throw ConfigError("unknown allocation kind", {{"path", path + "/kind"}, {"kind", a.kind}});
    }
    return a;
}

json alloc_json(const AllocSpec& a) {
    if (a.kind == "bernoulli") return {{"kind", a.kind}, {"weights", a.weights}};
    if (a.kind == "monopoly") return {{"kind", a.kind}, {"player", a.player}, {"N", a.N}};
    if (a.kind == "permuted") return {{"kind", a.kind}, {"map", a.map}, {"N", a.N}};
    return {{"kind", a.kind}, {"maps", a.maps}, {"probs", a.probs}, {"N", a.N}, {"blind", a.blind}};
}

int implied_alloc_K(const AllocSpec& a) {
    if (a.kind == "permuted") return static_cast<int>(a.map.size()) - 1;
    if (a.kind == "explicit" && !a.maps.empty()) return static_cast<int>(a.maps.front().size()) - 1;
    return -1;
}

template <class F>
auto wrap_config(const char* what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        auto ctx = e.context();
        ctx["block"] = what;
        ctx["cause"] = std::string(to_string(e.code()));
        throw ConfigError(e.what(), std::move(ctx));
    }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    const Reader r(j, "", {"schema", "market", "flow", "allocation", "K", "x_oracle", "x0", "action_space", "solver",
                           "simulation", "labelled", "idx", "limit", "output", "comment"});
    ExperimentConfig cfg;
    cfg.schema = r.required<int>("schema");
    if (cfg.schema != kConfigSchema) {
        throw ConfigError("unsupported schema version", {{"path", "/schema"}, {"schema", std::to_string(cfg.schema)}});
    }
    cfg.market = parse_market(r.at("market"), "/market");
    std::optional<int> K;
    if (r.has("K")) K = r.required<int>("K");
    cfg.flow = parse_flow(r.at("flow"), "/flow", K);
    cfg.K = K.value_or(cfg.flow.K);
    if (cfg.K < 1) throw ConfigError("K must be positive", {{"path", "/K"}});
    if (cfg.flow.K != cfg.K) {
        throw ConfigError("flow length disagrees with K",
                          {{"path", "/flow"}, {"K", std::to_string(cfg.K)}, {"flow_K", std::to_string(cfg.flow.K)}});
    }
    cfg.allocation = parse_alloc(r.at("allocation"), "/allocation");
    const int alloc_K = implied_alloc_K(cfg.allocation);
    if (alloc_K >= 0 && alloc_K != cfg.K) {
        throw ConfigError("allocation maps disagree with K (need K + 1 slots)",
                          {{"path", "/allocation"}, {"K", std::to_string(cfg.K)}, {"alloc_K", std::to_string(alloc_K)}});
    }
    cfg.x_oracle = r.get("x_oracle", 1.0);
    if (!(cfg.x_oracle > 0.0)) throw ConfigError("x_oracle must be positive", {{"path", "/x_oracle"}});
    if (r.has("x0")) cfg.x0 = parse_dist(r.at("x0"), "/x0");
    if (r.has("action_space")) {
        const Reader a(r.at("action_space"), "/action_space", {"lo", "hi"});
        cfg.action_space = ActionSpace{a.required<double>("lo"), a.required<double>("hi")};
    }
    if (r.has("solver")) {
        const Reader s(r.at("solver"), "/solver",
                       {"depth_tol", "residual_tol", "bracket_delta", "bracket_growth", "max_expansions", "scan_points"});
        auto& o = cfg.solver;
        o.depth_tol = s.get("depth_tol", o.depth_tol);
        o.residual_tol = s.get("residual_tol", o.residual_tol);
        o.bracket_delta = s.get("bracket_delta", o.bracket_delta);
        o.bracket_growth = s.get("bracket_growth", o.bracket_growth);
        o.max_expansions = s.get("max_expansions", o.max_expansions);
        o.scan_points = s.get("scan_points", o.scan_points);
    }
    if (r.has("simulation")) {
        const Reader s(r.at("simulation"), "/simulation",
                       {"replicas", "seed", "grid_pitch", "grid_halfwidth", "traces", "exclude_first_slot"});
        auto& o = cfg.simulation;
        o.replicas = s.get("replicas", o.replicas);
        o.seed = s.get("seed", o.seed);
        o.grid_pitch = s.get("grid_pitch", o.grid_pitch);
        o.grid_halfwidth = s.get("grid_halfwidth", o.grid_halfwidth);
        o.traces = s.get("traces", o.traces);
        o.exclude_first_slot = s.get("exclude_first_slot", o.exclude_first_slot);
        if (!(o.grid_pitch > 0.0) || !(o.grid_halfwidth > 0.0)) {
            throw ConfigError("grid pitch and halfwidth must be positive", {{"path", "/simulation"}});
        }
    }
    cfg.labelled = r.get("labelled", false);
    if (r.has("idx")) {
        const auto& idx = r.at("idx");
        if (idx.is_string() && idx.get<std::string>() == "uniform") {
            cfg.idx = IndexLaw::Uniform;
        } else if (idx.is_object()) {
            const Reader k(idx, "/idx", {"known"});
            cfg.idx = IndexLaw::Known;
            cfg.known_idx = k.required<std::vector<int>>("known");
        } else {
            throw ConfigError("idx must be \"uniform\" or {\"known\": [...]}", {{"path", "/idx"}});
        }
    }
    if (r.has("limit")) {
        const Reader l(r.at("limit"), "/limit", {"r", "q_depth", "mode", "x0"});
        LimitSpec ls;
        ls.r = l.get("r", ls.r);
        ls.q_depth = l.get("q_depth", ls.q_depth);
        ls.mode = l.get("mode", ls.mode);
        if (ls.mode != "aon" && ls.mode != "partial") {
            throw ConfigError("limit mode must be aon or partial", {{"path", "/limit/mode"}});
        }
        if (l.has("x0")) ls.x0 = l.required<double>("x0");
        cfg.limit = ls;
    }
    if (r.has("output")) {
        const Reader o(r.at("output"), "/output", {"dir"});
        cfg.output_dir = o.get("dir", cfg.output_dir);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config", {{"path", path}});
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what(), {{"file", path}});
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema"] = cfg.schema;
    j["market"] = market_json(cfg.market);
    j["flow"] = flow_json(cfg.flow);
    j["allocation"] = alloc_json(cfg.allocation);
    j["K"] = cfg.K;
    j["x_oracle"] = cfg.x_oracle;
    if (cfg.x0) j["x0"] = dist_json(*cfg.x0);
    if (cfg.action_space) j["action_space"] = {{"lo", cfg.action_space->lo}, {"hi", cfg.action_space->hi}};
    const auto& s = cfg.solver;
    j["solver"] = {{"depth_tol", s.depth_tol},         {"residual_tol", s.residual_tol},
                   {"bracket_delta", s.bracket_delta}, {"bracket_growth", s.bracket_growth},
                   {"max_expansions", s.max_expansions}, {"scan_points", s.scan_points}};
    const auto& m = cfg.simulation;
    j["simulation"] = {{"replicas", m.replicas},     {"seed", m.seed},     {"grid_pitch", m.grid_pitch},
                       {"grid_halfwidth", m.grid_halfwidth}, {"traces", m.traces},
                       {"exclude_first_slot", m.exclude_first_slot}};
    j["labelled"] = cfg.labelled;
    if (cfg.idx == IndexLaw::Uniform) {
        j["idx"] = "uniform";
    } else {
        j["idx"] = {{"known", cfg.known_idx}};
    }
    if (cfg.limit) {
        json l{{"r", cfg.limit->r}, {"q_depth", cfg.limit->q_depth}, {"mode", cfg.limit->mode}};
        if (cfg.limit->x0) l["x0"] = *cfg.limit->x0;
        j["limit"] = l;
    }
    j["output"] = {{"dir", cfg.output_dir}};
    return j;
}

MarketCurve build_market(const ExperimentConfig& cfg) {
    return wrap_config("market", [&] {
        const auto& m = cfg.market;
        if (m.kind == "cpmm") return MarketCurve::cpmm(m.alpha, m.beta, m.epsilon);
        if (m.kind == "exponential") return MarketCurve::exponential(m.lambda, m.x_ref, m.p_ref);
        return MarketCurve::reference(m.price);
    });
}

SizeDistribution build_distribution(const DistSpec& d) {
    return wrap_config("distribution", [&] {
        if (d.kind == "point") return SizeDistribution::point_mass(d.value);
        if (d.kind == "uniform") return SizeDistribution::uniform(d.a, d.b);
        if (d.kind == "truncated_normal") return SizeDistribution::truncated_normal(d.mu, d.sigma, d.a, d.b);
        if (d.kind == "two_point") return SizeDistribution::two_point(d.r_plus, d.r_minus, d.p_plus);
        return SizeDistribution::discrete(d.values, d.probs);
    });
}

OrderFlowModel build_flow(const ExperimentConfig& cfg) {
    return wrap_config("flow", [&] {
        const auto& f = cfg.flow;
        OrderFlowModel model = [&] {
            if (f.kind == "iid") return OrderFlowModel::iid(build_distribution(f.dist), f.K);
            if (f.kind == "deterministic") return OrderFlowModel::deterministic(f.r);
            if (f.kind == "permuted") return OrderFlowModel::permuted(f.r);
            return OrderFlowModel::empirical(f.samples);
        }();
        return f.scale == 1.0 ? model : model.scaled(f.scale);
    });
}

AllocationModel build_allocation(const ExperimentConfig& cfg) {
    return wrap_config("allocation", [&] {
        const auto& a = cfg.allocation;
        if (a.kind == "bernoulli") return AllocationModel::bernoulli(a.weights, cfg.K);
        if (a.kind == "monopoly") return AllocationModel::monopoly(a.player, a.N, cfg.K);
        if (a.kind == "permuted") return AllocationModel::permuted(a.map, a.N);
        if (a.maps.size() != a.probs.size()) throw ConfigError("maps and probs differ in length", {{"path", "/allocation"}});
        std::vector<AllocationOutcome> outcomes;
        for (std::size_t n = 0; n < a.maps.size(); ++n) outcomes.push_back({a.maps[n], a.probs[n]});
        return AllocationModel::explicit_joint(std::move(outcomes), a.N, a.blind);
    });
}

BatchGame build_game(const ExperimentConfig& cfg) {
    auto market = build_market(cfg);
    auto flow = build_flow(cfg);
    auto alloc = build_allocation(cfg);
    auto x0 = cfg.x0 ? build_distribution(*cfg.x0) : SizeDistribution::point_mass(cfg.x_oracle);
    const auto A = cfg.action_space.value_or(default_action_space(cfg.x_oracle));
    return wrap_config("game", [&] { return BatchGame(market, flow, alloc, cfg.x_oracle, x0, A); });
}

LabelledGame build_labelled_game(const ExperimentConfig& cfg) {
    LabelledGame lg{build_market(cfg),
                    build_flow(cfg),
                    build_allocation(cfg),
                    cfg.x_oracle,
                    cfg.x0 ? build_distribution(*cfg.x0) : SizeDistribution::point_mass(cfg.x_oracle),
                    cfg.action_space.value_or(default_action_space(cfg.x_oracle)),
                    cfg.idx,
                    cfg.known_idx};
    wrap_config("labelled", [&] {
        lg.validate();
        return 0;
    });
    return lg;
}

LimitSandwich build_limit(const ExperimentConfig& cfg) {
    if (!cfg.limit) throw ConfigError("config has no limit block", {{"path", "/limit"}});
    const auto& l = *cfg.limit;
    return wrap_config("limit", [&] {
        LimitSandwich ls{CostContext(build_market(cfg), cfg.x_oracle), l.r, l.q_depth,
                         l.mode == "aon" ? FillMode::AllOrNothing : FillMode::PartialFill, l.x0.value_or(cfg.x_oracle)};
        return ls;
    });
}

std::vector<double> build_grid(const ExperimentConfig& cfg, const BatchGame& g) {
    const double x = g.x_oracle();
    const auto& A = g.action_space();
    const double hw = cfg.simulation.grid_halfwidth * x;
    return make_grid(x, cfg.simulation.grid_pitch * x, std::max(A.lo, x - hw), std::min(A.hi, x + hw));
}

}  // namespace lamination
