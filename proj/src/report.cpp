#include "cobra/report.hpp"

#include "cobra/scenario.hpp"

#include <sstream>

namespace cobra {

using nlohmann::json;

std::string rational_string(const Rational& r) {
    std::ostringstream os;
    os << r.numerator();
    if (r.denominator() != 1) os << "/" << r.denominator();
    return os.str();
}

json block_to_json(const Block& b) {
    json txs = json::array();
    for (const auto& t : b.txs)
        txs.push_back({{"sender", t.sender}, {"recipient", t.recipient}, {"amount", t.amount},
                       {"kind", tx_kind_name(t.kind)}, {"nonce", t.nonce}});
    json votes = json::array();
    for (const auto& v : b.finality_votes) votes.push_back({{"voter", v.voter}, {"target", digest_hex(v.target)}});
    return {{"height", b.height},   {"parent_hash", digest_hex(b.parent_hash)}, {"proposer", b.proposer},
            {"round", b.round},     {"txs", txs},
            {"finality_votes", votes}, {"value", b.value},      {"digest", digest_hex(b.digest)}};
}

namespace {

Digest parse_digest(const json& j) {
    if (j.is_number_unsigned()) return j.get<Digest>();
    const auto s = j.get<std::string>();
    std::size_t pos = 0;
    const Digest d = std::stoull(s, &pos, 16);
    if (pos != s.size()) throw std::invalid_argument("bad digest " + s);
    return d;
}

TxKind parse_kind(const std::string& s) {
    for (auto k : {TxKind::Payment, TxKind::WithdrawRequest, TxKind::WithdrawComplete, TxKind::RewardPayout})
        if (s == tx_kind_name(k)) return k;
    throw std::invalid_argument("bad tx kind " + s);
}

Transaction tx_from_json(const json& t) {
    return Transaction{t.at("sender").get<std::int64_t>(), t.at("recipient").get<std::int64_t>(),
                       t.at("amount").get<Coins>(), parse_kind(t.value("kind", std::string("Payment"))),
                       t.value("nonce", std::int64_t(0))};
}

json tx_to_json(const Transaction& t) {
    return {{"sender", t.sender}, {"recipient", t.recipient}, {"amount", t.amount}, {"kind", tx_kind_name(t.kind)},
            {"nonce", t.nonce}};
}

json cap_json(const Cap& c) { return cap_string(c); }

} // namespace

Block block_from_json(const json& j) {
    Block b;
    b.height = j.at("height").get<Height>();
    b.parent_hash = parse_digest(j.at("parent_hash"));
    b.proposer = j.at("proposer").get<ValidatorId>();
    b.round = j.value("round", Round(0));
    for (const auto& t : j.at("txs")) b.txs.push_back(tx_from_json(t));
    if (j.contains("finality_votes"))
        for (const auto& v : j.at("finality_votes"))
            b.finality_votes.push_back({v.at("voter").get<ValidatorId>(), parse_digest(v.at("target"))});
    b.value = j.value("value", Coins(0));
    b.digest = parse_digest(j.at("digest"));
    return b;
}

json qc_to_json(const QuorumCertificate& qc) {
    return {{"block_digest", digest_hex(qc.block_digest)}, {"height", qc.height}, {"round", qc.round},
            {"stage", qc.stage}, {"signers", qc.signers}};
}

QuorumCertificate qc_from_json(const json& j) {
    QuorumCertificate qc;
    qc.block_digest = parse_digest(j.at("block_digest"));
    qc.height = j.at("height").get<Height>();
    qc.round = j.value("round", Round(0));
    qc.stage = j.value("stage", 2);
    qc.signers = j.at("signers").get<std::vector<ValidatorId>>();
    return qc;
}

json proof_to_json(const InclusionProof& p) {
    json chain = json::array();
    for (const auto& [b, qc] : p.chain) chain.push_back({{"block", block_to_json(b)}, {"qc", qc_to_json(qc)}});
    return {{"tx", tx_to_json(p.tx)},
            {"block_digest", digest_hex(p.block_digest)},
            {"inclusion_path", {{"index", p.inclusion_path.index}, {"block_digest", digest_hex(p.inclusion_path.block_digest)}}},
            {"chain", chain},
            {"votes_for", digest_hex(p.votes_for)}};
}

InclusionProof proof_from_json(const json& j) {
    InclusionProof p;
    p.tx = tx_from_json(j.at("tx"));
    p.block_digest = parse_digest(j.at("block_digest"));
    const auto& ip = j.at("inclusion_path");
    p.inclusion_path.index = ip.at("index").get<std::size_t>();
    p.inclusion_path.block_digest = parse_digest(ip.at("block_digest"));
    for (const auto& e : j.at("chain")) p.chain.emplace_back(block_from_json(e.at("block")), qc_from_json(e.at("qc")));
    p.votes_for = parse_digest(j.at("votes_for"));
    return p;
}

std::string finalization_jsonl(const RunResult& r, ValidatorId v) {
    std::ostringstream os;
    for (const auto& rec : r.finalization_logs.at(v)) {
        json j = {{"tick", rec.tick},
                  {"height", rec.height},
                  {"digest", digest_hex(rec.digest)},
                  {"branch", rec.old_branch ? "old" : "recent"},
                  {"cap_in_force", cap_json(rec.cap_in_force)},
                  {"suffixvalue", rec.suffixvalue}};
        os << j.dump() << "\n";
    }
    return os.str();
}

std::string transcript_jsonl(const RunResult& r) {
    std::ostringstream os;
    for (const auto& e : r.transcript) {
        json j = {{"tick", e.tick}, {"validator", e.validator}, {"height", e.height}, {"digest", digest_hex(e.digest)},
                  {"signers", e.signers}};
        os << j.dump() << "\n";
    }
    return os.str();
}

json accounts_json(const RunResult& r) {
    json a = json::array();
    for (const auto& acct : r.accounts)
        a.push_back({{"id", acct.owner},
                     {"role", role_name(acct.role)},
                     {"staked", acct.staked},
                     {"liquid", acct.liquid},
                     {"locked", acct.locked_total()},
                     {"withdrawal", withdrawal_name(acct.withdrawal.state)}});
    return a;
}

json report_json(const RunResult& r) {
    json j;
    j["schema"] = kReportSchemaVersion;
    j["scenario"] = r.scenario.name;
    j["paper_ref"] = r.scenario.paper_ref;
    j["seed"] = r.scenario.config.seed;
    j["passed"] = r.passed;
    j["expect_violations"] = r.scenario.expect_violations;
    j["violated"] = r.violated;
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks;
    j["accounts"] = accounts_json(r);

    json util = json::array();
    for (const auto& l : r.utilities.lines)
        util.push_back({{"id", l.id},
                        {"branch", l.forking ? "forking" : "liveness"},
                        {"gain", l.gain},
                        {"penalty", l.penalty},
                        {"rewards", l.rewards},
                        {"bribes", l.bribes},
                        {"net", l.net}});
    j["utilities"] = util;

    json windows = json::array();
    for (const auto& w : r.windows)
        windows.push_back({{"k", w.k},
                           {"rounds", {w.first_round, w.last_round}},
                           {"proposers", w.proposers},
                           {"fees", w.fees},
                           {"paid", w.paid},
                           {"bribed", w.bribed},
                           {"correct_proposer", w.correct_proposer}});
    j["reward_windows"] = windows;

    if (r.fork) {
        const auto& f = *r.fork;
        j["fork"] = {{"coalition", f.coalition},
                     {"rationals", f.rationals},
                     {"partitions", f.partitions},
                     {"gamma", f.gamma},
                     {"m", f.m},
                     {"cap", rational_string(f.cap)},
                     {"share", rational_string(f.share)},
                     {"spend_per_rational_per_branch", f.spend_per_rational_per_branch}};
    }
    if (r.decision) j["decision"] = decision_name(*r.decision);
    json atx = json::array();
    for (const auto& t : r.attack_txs)
        atx.push_back({{"rational", t.rational},
                       {"branch", t.branch},
                       {"recipient", t.tx.recipient},
                       {"amount", t.tx.amount},
                       {"accepted", t.accepted},
                       {"block", digest_hex(t.block)}});
    j["attack_txs"] = atx;
    json ds = json::object();
    for (const auto& [v, d] : r.double_spent) ds[std::to_string(v)] = d;
    j["double_spent"] = ds;
    json rec = json::array();
    for (const auto& row : r.recycling)
        rec.push_back({{"lock", row.lock},
                       {"total_spent", row.result.total_spent},
                       {"closed_form", row.result.closed_form},
                       {"spent_per_round", row.result.spent_per_round}});
    j["recycling"] = rec;

    json fin = json::array();
    for (std::size_t v = 0; v < r.finalized.size(); ++v) {
        json recs = json::array();
        for (const auto& rec2 : r.finalization_logs[v])
            recs.push_back({{"tick", rec2.tick},
                            {"height", rec2.height},
                            {"digest", digest_hex(rec2.digest)},
                            {"branch", rec2.old_branch ? "old" : "recent"},
                            {"cap_in_force", cap_json(rec2.cap_in_force)},
                            {"suffixvalue", rec2.suffixvalue}});
        fin.push_back({{"validator", v},
                       {"finalized", r.finalized[v].size()},
                       {"blacklist", std::vector<ValidatorId>(r.blacklists[v].begin(), r.blacklists[v].end())},
                       {"log", recs}});
    }
    j["finalization"] = fin;
    j["network"] = {{"max_delay", r.max_delay}, {"messages", r.messages}};
    return j;
}

} // namespace cobra
