#include "cobra/core.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <limits>

namespace cobra {

const char* role_name(Role r) {
    switch (r) {
    case Role::Honest: return "honest";
    case Role::Byzantine: return "byzantine";
    case Role::Rational: return "rational";
    }
    return "?";
}

const char* config_error_name(ConfigError e) {
    switch (e) {
    case ConfigError::BadN: return "BadN";
    case ConfigError::BadQuorum: return "BadQuorum";
    case ConfigError::BadCounts: return "BadCounts";
    case ConfigError::BadCorrect: return "BadCorrect";
    case ConfigError::BadDeltaStar: return "BadDeltaStar";
    case ConfigError::BadWithdrawDelay: return "BadWithdrawDelay";
    case ConfigError::BadStake: return "BadStake";
    }
    return "?";
}

std::optional<ConfigError> validate_config(const SystemConfig& c) {
    if (c.f < 1 || c.n != 3 * c.f + 1) return ConfigError::BadN;
    if (c.q != 2 * c.f + 1) return ConfigError::BadQuorum;
    if (c.f_star < 0 || c.k < 0 || c.f_star > c.f || c.f_star + c.k > 2 * c.f) return ConfigError::BadCounts;
    if (c.n - c.f_star - c.k < c.f + 1) return ConfigError::BadCorrect;
    if (c.delta < 1 || c.delta_gst < 0 || c.delta_star != 2 * c.delta + c.delta_gst) return ConfigError::BadDeltaStar;
    if (c.delta_w <= 2 * c.delta_star) return ConfigError::BadWithdrawDelay;
    if (c.stake_d <= 0) return ConfigError::BadStake;
    return std::nullopt;
}

SystemConfig make_config(int f, int f_star, int k, Coins d, Tick delta, Tick delta_gst, Tick delta_w,
                         std::uint64_t seed) {
    SystemConfig c;
    c.f = f;
    c.n = 3 * f + 1;
    c.q = 2 * f + 1;
    c.f_star = f_star;
    c.k = k;
    c.stake_d = d;
    c.delta = delta;
    c.delta_gst = delta_gst;
    c.delta_star = 2 * delta + delta_gst;
    c.delta_w = delta_w;
    c.window_n = c.n;
    c.seed = seed;
    return c;
}

std::vector<Role> default_roles(const SystemConfig& cfg) {
    std::vector<Role> roles(cfg.n, Role::Honest);
    for (int i = 0; i < cfg.f_star && i < cfg.n; ++i) roles[i] = Role::Byzantine;
    for (int i = cfg.f_star; i < cfg.f_star + cfg.k && i < cfg.n; ++i) roles[i] = Role::Rational;
    return roles;
}

const char* tx_kind_name(TxKind k) {
    switch (k) {
    case TxKind::Payment: return "payment";
    case TxKind::WithdrawRequest: return "withdraw_request";
    case TxKind::WithdrawComplete: return "withdraw_complete";
    case TxKind::RewardPayout: return "reward_payout";
    }
    return "?";
}

Coins block_value(const Block& b) {
    Coins sum = 0;
    for (const auto& tx : b.txs) {
        if (tx.kind != TxKind::Payment) continue;
        if (tx.amount > 0 && sum > std::numeric_limits<Coins>::max() - tx.amount) throw OverflowError();
        sum += tx.amount;
    }
    return sum;
}

namespace {

struct Fnv {
    std::uint64_t h = 1469598103934665603ull;
    void mix(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
};

} // namespace

Digest compute_digest(const Block& b) {
    Fnv f;
    f.mix(static_cast<std::uint64_t>(b.height));
    f.mix(b.parent_hash);
    f.mix(static_cast<std::uint64_t>(b.proposer));
    f.mix(static_cast<std::uint64_t>(b.round));
    f.mix(b.txs.size());
    for (const auto& tx : b.txs) {
        f.mix(static_cast<std::uint64_t>(tx.sender));
        f.mix(static_cast<std::uint64_t>(tx.recipient));
        f.mix(static_cast<std::uint64_t>(tx.amount));
        f.mix(static_cast<std::uint64_t>(tx.kind));
        f.mix(static_cast<std::uint64_t>(tx.nonce));
    }
    f.mix(b.finality_votes.size());
    for (const auto& v : b.finality_votes) {
        f.mix(static_cast<std::uint64_t>(v.voter));
        f.mix(v.target);
    }
    f.mix(static_cast<std::uint64_t>(b.value));
    return f.h;
}

Block seal(Block b) {
    b.value = block_value(b);
    b.digest = compute_digest(b);
    return b;
}

std::vector<ValidatorId> distinct_signers(const std::vector<ValidatorId>& ids) {
    std::vector<ValidatorId> out = ids;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool qc_is_valid(const QuorumCertificate& qc, const SystemConfig& cfg) {
    for (auto id : qc.signers)
        if (id < 0 || id >= cfg.n) return false;
    return static_cast<int>(distinct_signers(qc.signers).size()) >= cfg.q;
}

std::uint64_t signer_mask(const std::vector<ValidatorId>& ids) {
    std::uint64_t m = 0;
    for (auto id : ids)
        if (id >= 0 && id < 64) m |= (1ull << id);
    return m;
}

std::vector<ValidatorId> mask_ids(std::uint64_t mask) {
    std::vector<ValidatorId> out;
    while (mask) {
        int b = std::countr_zero(mask);
        out.push_back(b);
        mask &= mask - 1;
    }
    return out;
}

int popcount(std::uint64_t mask) { return std::popcount(mask); }

std::string digest_hex(Digest d) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
    return buf;
}

} // namespace cobra
