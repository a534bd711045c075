#include "cobra/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cobra {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ScenarioError(std::string("bad type for ") + key);
    }
}

const json& object_at(const json& j, const char* key) {
    static const json empty = json::object();
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return empty;
    if (!it->is_object()) throw ScenarioError(std::string(key) + " must be an object");
    return *it;
}

SystemConfig parse_config(const json& c) {
    if (!c.contains("f")) throw ScenarioError("config.f is required");
    const int f = get_or<int>(c, "f", 1);
    const Tick delta = get_or<Tick>(c, "delta", 2);
    const Tick dgst = get_or<Tick>(c, "delta_gst", 10);
    const Tick dstar = 2 * delta + dgst;
    SystemConfig cfg = make_config(f, get_or<int>(c, "f_star", 0), get_or<int>(c, "k", 0), get_or<Coins>(c, "stake_d", 100),
                                   delta, dgst, get_or<Tick>(c, "delta_w", 2 * dstar + 1));
    // Explicit n and q are accepted so that inconsistent files fail validation loudly.
    cfg.n = get_or<int>(c, "n", cfg.n);
    cfg.q = get_or<int>(c, "q", cfg.q);
    cfg.window_n = cfg.n;
    return cfg;
}

AttackSpec parse_attack(const json& a) {
    AttackSpec s;
    const std::string kind = get_or<std::string>(a, "kind", "none");
    if (kind == "none") s.kind = AttackSpec::Kind::None;
    else if (kind == "double_spend") s.kind = AttackSpec::Kind::DoubleSpend;
    else if (kind == "censorship") s.kind = AttackSpec::Kind::Censorship;
    else if (kind == "reward_recycling") s.kind = AttackSpec::Kind::RewardRecycling;
    else throw ScenarioError("unknown attack " + kind);
    s.force_join = get_or<bool>(a, "force_join", false);
    s.start_round = get_or<Round>(a, "start_round", 0);
    s.end_tick = get_or<Tick>(a, "end_tick", -1);
    s.withdraw_tick = get_or<Tick>(a, "withdraw_tick", -1);
    s.liquid_per_rational = get_or<Coins>(a, "liquid_per_rational", -1);
    s.bribe_per_rational = get_or<Coins>(a, "bribe_per_rational", -1);
    s.funded_windows = get_or<int>(a, "funded_windows", 0);
    s.rounds_budget = get_or<int>(a, "rounds_budget", 30);
    s.reward_per_round = get_or<Coins>(a, "reward_per_round", 10);
    s.reward_lock = get_or<bool>(a, "reward_lock", true);
    return s;
}

std::vector<std::string> string_list(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) return {};
    if (!it->is_array()) throw ScenarioError(std::string(key) + " must be an array");
    std::vector<std::string> out;
    for (const auto& e : *it) {
        if (!e.is_string()) throw ScenarioError(std::string(key) + " entries must be strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

} // namespace

Scenario parse_scenario(const json& j) {
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    const int version = get_or<int>(j, "schema", kScenarioSchemaVersion);
    if (version != kScenarioSchemaVersion) throw ScenarioError("unsupported schema version");
    Scenario s;
    s.name = get_or<std::string>(j, "name", "unnamed");
    s.description = get_or<std::string>(j, "description", "");
    s.paper_ref = get_or<std::string>(j, "paper_ref", "");
    s.config = parse_config(object_at(j, "config"));
    s.config.seed = get_or<std::uint64_t>(j, "seed", 1);

    const auto& mode = object_at(j, "mode");
    const std::string kind = get_or<std::string>(mode, "kind", "synchronous");
    if (kind == "synchronous") s.mode = NetMode::synchronous(s.config.delta, s.config.delta_gst);
    else if (kind == "partial_synchrony") s.mode = NetMode::partial(get_or<Tick>(mode, "gst", 0), s.config.delta);
    else throw ScenarioError("unknown mode " + kind);

    const auto& plan = object_at(j, "plan");
    if (plan.contains("windows")) {
        for (const auto& w : plan.at("windows")) {
            if (!w.is_array() || w.size() != 2) throw ScenarioError("windows are [start, end] pairs");
            s.plan.windows.push_back({w[0].get<Tick>(), w[1].get<Tick>()});
        }
    }
    if (plan.contains("partition")) {
        const auto& p = plan.at("partition");
        if (p.is_string()) {
            if (p.get<std::string>() != "auto") throw ScenarioError("partition must be \"auto\" or id groups");
            s.auto_partition = true;
        } else {
            for (const auto& g : p) s.plan.partition.push_back(g.get<std::vector<ValidatorId>>());
        }
    }
    s.min_gap = get_or<Tick>(plan, "min_gap", -1);
    const std::string jitter = get_or<std::string>(j, "jitter", "uniform");
    if (jitter == "uniform") s.jitter = Jitter::Uniform;
    else if (jitter == "max") s.jitter = Jitter::Max;
    else throw ScenarioError("jitter must be uniform or max");

    const std::string rule = get_or<std::string>(j, "rule", "stake");
    auto r = parse_rule(rule);
    if (!r) throw ScenarioError("unknown rule " + rule);
    s.rule = *r;
    s.freeze_strength = get_or<bool>(j, "freeze_strength", false);
    s.round_ticks = get_or<Tick>(j, "round_ticks", 0);
    s.run_ticks = get_or<Tick>(j, "run_ticks", 0);

    if (j.contains("byzantine")) {
        for (const auto& b : j.at("byzantine")) {
            auto beh = parse_byz_behavior(get_or<std::string>(b, "behavior", "honest"));
            if (!beh) throw ScenarioError("unknown byzantine behavior");
            s.byzantine[get_or<int>(b, "id", -1)] = *beh;
        }
    }
    s.byz_random_delay = get_or<bool>(j, "byz_random_delay", false);
    s.attack = parse_attack(object_at(j, "attack"));

    const auto& tx = object_at(j, "client_txs");
    s.client_txs.start = get_or<Tick>(tx, "start", 1);
    s.client_txs.every = get_or<Tick>(tx, "every", 0);
    s.client_txs.count = get_or<int>(tx, "count", 0);
    s.client_txs.amount = get_or<Coins>(tx, "amount", 1);

    if (j.contains("withdrawals"))
        for (const auto& w : j.at("withdrawals")) s.withdrawals.push_back({get_or<int>(w, "id", -1), get_or<Tick>(w, "at", 0)});

    const auto& rw = object_at(j, "rewards");
    s.rewards.enabled = get_or<bool>(rw, "enabled", false);
    s.rewards.fee = get_or<Coins>(rw, "fee", 1);
    s.rewards.lock = get_or<bool>(rw, "lock", true);
    s.rewards.settle_lag_rounds = get_or<int>(rw, "settle_lag_rounds", -1);

    s.checks = string_list(j, "checks");
    s.expect_violations = string_list(j, "expect_violations");
    s.liveness_window = get_or<int>(j, "liveness_window", -1);
    s.liveness_margin = get_or<Tick>(j, "liveness_margin", -1);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("bad JSON: ") + e.what());
    }
    try {
        return parse_scenario(j);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("bad scenario: ") + e.what());
    }
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["schema"] = kScenarioSchemaVersion;
    j["name"] = s.name;
    j["description"] = s.description;
    j["paper_ref"] = s.paper_ref;
    j["seed"] = s.config.seed;
    j["config"] = {{"n", s.config.n},         {"f", s.config.f},         {"q", s.config.q},
                   {"f_star", s.config.f_star}, {"k", s.config.k},         {"stake_d", s.config.stake_d},
                   {"delta", s.config.delta}, {"delta_gst", s.config.delta_gst}, {"delta_w", s.config.delta_w}};
    if (s.mode.kind == NetMode::Kind::Synchronous) j["mode"] = {{"kind", "synchronous"}};
    else j["mode"] = {{"kind", "partial_synchrony"}, {"gst", s.mode.gst}};
    json windows = json::array();
    for (const auto& w : s.plan.windows) windows.push_back({w.start, w.end});
    json plan = {{"windows", windows}};
    if (s.auto_partition) plan["partition"] = "auto";
    else plan["partition"] = s.plan.partition;
    if (s.min_gap >= 0) plan["min_gap"] = s.min_gap;
    j["plan"] = plan;
    j["jitter"] = s.jitter == Jitter::Max ? "max" : "uniform";
    j["rule"] = rule_name(s.rule);
    j["freeze_strength"] = s.freeze_strength;
    j["round_ticks"] = s.round_ticks;
    j["run_ticks"] = s.run_ticks;
    json byz = json::array();
    for (const auto& [v, b] : s.byzantine) byz.push_back({{"id", v}, {"behavior", byz_behavior_name(b)}});
    j["byzantine"] = byz;
    j["byz_random_delay"] = s.byz_random_delay;
    const auto& a = s.attack;
    j["attack"] = {{"kind", attack_name(a.kind)},
                   {"force_join", a.force_join},
                   {"start_round", a.start_round},
                   {"end_tick", a.end_tick},
                   {"withdraw_tick", a.withdraw_tick},
                   {"liquid_per_rational", a.liquid_per_rational},
                   {"bribe_per_rational", a.bribe_per_rational},
                   {"funded_windows", a.funded_windows},
                   {"rounds_budget", a.rounds_budget},
                   {"reward_per_round", a.reward_per_round},
                   {"reward_lock", a.reward_lock}};
    j["client_txs"] = {{"start", s.client_txs.start}, {"every", s.client_txs.every}, {"count", s.client_txs.count},
                       {"amount", s.client_txs.amount}};
    json wd = json::array();
    for (const auto& w : s.withdrawals) wd.push_back({{"id", w.id}, {"at", w.at}});
    j["withdrawals"] = wd;
    j["rewards"] = {{"enabled", s.rewards.enabled}, {"fee", s.rewards.fee}, {"lock", s.rewards.lock},
                    {"settle_lag_rounds", s.rewards.settle_lag_rounds}};
    j["checks"] = s.checks;
    j["expect_violations"] = s.expect_violations;
    j["liveness_window"] = s.liveness_window;
    j["liveness_margin"] = s.liveness_margin;
    return j;
}

void apply_seed_override(Scenario& s) {
    const char* env = std::getenv("COBRA_SEED");
    if (!env || !*env) return;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') s.config.seed = v;
    else throw ScenarioError("COBRA_SEED must be an unsigned integer");
}

} // namespace cobra
