#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cobra {

using Tick = std::int64_t;
using Coins = std::int64_t;
using Digest = std::uint64_t;
using ValidatorId = int;
using Height = std::int64_t;
using Round = std::int64_t;
using Rational = boost::rational<std::int64_t>;

enum class Role { Honest, Byzantine, Rational };

const char* role_name(Role r);

struct SystemConfig {
    int n = 7;
    int f = 2;
    int f_star = 0;
    int k = 0;
    int q = 5;
    Coins stake_d = 100;
    Tick delta = 2;
    Tick delta_gst = 10;
    Tick delta_star = 14;
    Tick delta_w = 29;
    int window_n = 7;
    std::uint64_t seed = 1;

    int h() const { return n - f_star - k; }
};

enum class ConfigError { BadN, BadQuorum, BadCounts, BadCorrect, BadDeltaStar, BadWithdrawDelay, BadStake };

const char* config_error_name(ConfigError e);

// Empty result means the configuration is acceptable.
std::optional<ConfigError> validate_config(const SystemConfig& cfg);

// Builds a consistent config for n = 3f+1 with derived q and delta_star.
SystemConfig make_config(int f, int f_star, int k, Coins d, Tick delta, Tick delta_gst, Tick delta_w,
                         std::uint64_t seed = 1);

// Role layout used throughout: Byzantine ids first, then rationals, then honest.
std::vector<Role> default_roles(const SystemConfig& cfg);

enum class TxKind { Payment, WithdrawRequest, WithdrawComplete, RewardPayout };

const char* tx_kind_name(TxKind k);

struct Transaction {
    std::int64_t sender = 0;
    std::int64_t recipient = 0;
    Coins amount = 0;
    TxKind kind = TxKind::Payment;
    std::int64_t nonce = 0;

    bool operator==(const Transaction&) const = default;
};

struct FinalityVote {
    ValidatorId voter = 0;
    Digest target = 0;

    bool operator==(const FinalityVote&) const = default;
    auto operator<=>(const FinalityVote&) const = default;
};

struct Block {
    Height height = 1;
    Digest parent_hash = 0;
    ValidatorId proposer = 0;
    Round round = 0;
    std::vector<Transaction> txs;
    std::vector<FinalityVote> finality_votes;
    Coins value = 0;
    Digest digest = 0;
};

struct QuorumCertificate {
    Digest block_digest = 0;
    Height height = 0;
    Round round = 0;
    int stage = 2;
    std::vector<ValidatorId> signers;

    bool operator==(const QuorumCertificate&) const = default;
};

struct LedgerEntry {
    Block block;
    QuorumCertificate qc;
    Tick recv_time = 0;
};

class OverflowError : public std::overflow_error {
public:
    OverflowError() : std::overflow_error("coin sum overflow") {}
};

// Sum of Payment amounts; other kinds move no client-spendable volume.
Coins block_value(const Block& b);

// Deterministic content hash over every field except digest itself.
Digest compute_digest(const Block& b);

// Fills value and digest; returns the sealed block.
Block seal(Block b);

bool qc_is_valid(const QuorumCertificate& qc, const SystemConfig& cfg);

// Distinct signers, ascending.
std::vector<ValidatorId> distinct_signers(const std::vector<ValidatorId>& ids);

// 64-bit signer mask; simulation sizes stay below 64 validators.
std::uint64_t signer_mask(const std::vector<ValidatorId>& ids);
std::vector<ValidatorId> mask_ids(std::uint64_t mask);
int popcount(std::uint64_t mask);

std::string digest_hex(Digest d);

} // namespace cobra
