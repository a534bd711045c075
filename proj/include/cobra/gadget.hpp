#pragma once

#include "cobra/core.hpp"

#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

namespace cobra {

enum class RuleKind { StakeBounded, StrongChain, StrongestChain };

const char* rule_name(RuleKind r);
std::optional<RuleKind> parse_rule(const std::string& s);

struct Unbounded {
    bool operator==(const Unbounded&) const = default;
};

using Cap = std::variant<Rational, Unbounded>;

bool is_unbounded(const Cap& c);
bool fits(const Cap& c, Coins total);
std::string cap_string(const Cap& c);

// Finalization cap for Δ*-recent blocks. `f` is the design bound (n-1)/3.
Cap cap(RuleKind rule, int i, int f, Coins d);

struct ChainStrength {
    int i = 0;
    int distinct = 0;
    Tick window_start = 0;
};

struct FinalizationRecord {
    Tick tick = 0;
    Height height = 0;
    Digest digest = 0;
    bool old_branch = false;
    Cap cap_in_force = Rational(0);
    Coins suffixvalue = 0;
};

struct GadgetOptions {
    RuleKind rule = RuleKind::StakeBounded;
    bool freeze_strength = false;
};

struct DeliverOutcome {
    bool appended = false;
    bool duplicate = false;
    bool conflict = false;
    std::vector<ValidatorId> slashed;
};

class Gadget {
public:
    Gadget(const SystemConfig& cfg, GadgetOptions opts);

    DeliverOutcome on_deliver(const QuorumCertificate& qc, const Block& block, Height h, Tick now);

    // Returns digests finalized for the first time by this call.
    std::vector<Digest> finalize_blocks(Tick now);

    ChainStrength strength(Tick now) const;

    // Adds ids to the blacklist. An empty set means the caller saw two
    // conflicting quorums that do not intersect, which the quorum sizes forbid.
    void slash(const std::vector<ValidatorId>& ids);

    const std::vector<LedgerEntry>& ledger() const { return ledger_; }
    const std::vector<QuorumCertificate>& quorumstore(Height h) const;
    std::size_t suffixindex() const { return suffixindex_; }
    const std::set<ValidatorId>& blacklist() const { return blacklist_; }
    const std::vector<Digest>& finalized() const { return finalized_; }
    bool is_finalized(Digest d) const { return finalized_set_.count(d) > 0; }
    const std::vector<FinalizationRecord>& log() const { return log_; }
    const GadgetOptions& options() const { return opts_; }
    const SystemConfig& config() const { return cfg_; }

    // First-time finalizations since the last call, in order.
    std::vector<Digest> take_fresh();

private:
    ChainStrength strength_for_cap(Tick now);

    SystemConfig cfg_;
    GadgetOptions opts_;
    std::vector<LedgerEntry> ledger_;
    std::map<Height, std::vector<QuorumCertificate>> store_;
    std::map<Height, std::size_t> ledger_pos_;
    std::size_t suffixindex_ = 0;
    std::set<ValidatorId> blacklist_;
    std::vector<Digest> finalized_;
    std::unordered_set<Digest> finalized_set_;
    std::vector<FinalizationRecord> log_;
    std::vector<Digest> fresh_;
    ChainStrength frozen_{};
    bool frozen_valid_ = false;
};

} // namespace cobra
