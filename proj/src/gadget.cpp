#include "cobra/gadget.hpp"

#include <algorithm>
#include <sstream>

namespace cobra {

const char* rule_name(RuleKind r) {
    switch (r) {
    case RuleKind::StakeBounded: return "stake";
    case RuleKind::StrongChain: return "strong";
    case RuleKind::StrongestChain: return "strongest";
    }
    return "?";
}

std::optional<RuleKind> parse_rule(const std::string& s) {
    if (s == "stake" || s == "stake_bounded" || s == "StakeBounded") return RuleKind::StakeBounded;
    if (s == "strong" || s == "strong_chain" || s == "StrongChain") return RuleKind::StrongChain;
    if (s == "strongest" || s == "strongest_chain" || s == "StrongestChain") return RuleKind::StrongestChain;
    return std::nullopt;
}

bool is_unbounded(const Cap& c) { return std::holds_alternative<Unbounded>(c); }

bool fits(const Cap& c, Coins total) {
    if (is_unbounded(c)) return true;
    return Rational(total) <= std::get<Rational>(c);
}

std::string cap_string(const Cap& c) {
    if (is_unbounded(c)) return "unbounded";
    const auto& r = std::get<Rational>(c);
    std::ostringstream os;
    os << r.numerator();
    if (r.denominator() != 1) os << "/" << r.denominator();
    return os.str();
}

Cap cap(RuleKind rule, int i, int f, Coins d) {
    const Rational D(d);
    if (rule == RuleKind::StakeBounded) return D;
    // 4i > f is i > f/4 without division.
    const bool above_quarter = 4 * i > f;
    if (rule == RuleKind::StrongChain) {
        if (!above_quarter) return D;
        if (i >= f) return Unbounded{};
        return Rational(f, f - i) * D;
    }
    // Strongest: 2i > f+1 is i > (f+1)/2.
    // i = f can satisfy i <= (f+1)/2 only for f = 1; f/(f-i) has no finite value there.
    if (2 * i > f + 1 || i >= f) return Unbounded{};
    if (above_quarter) return Rational(f, f - i) * D;
    return D;
}

Gadget::Gadget(const SystemConfig& cfg, GadgetOptions opts) : cfg_(cfg), opts_(opts) {}

const std::vector<QuorumCertificate>& Gadget::quorumstore(Height h) const {
    static const std::vector<QuorumCertificate> empty;
    auto it = store_.find(h);
    return it == store_.end() ? empty : it->second;
}

DeliverOutcome Gadget::on_deliver(const QuorumCertificate& qc, const Block& block, Height h, Tick now) {
    DeliverOutcome out;
    auto& store = store_[h];
    if (store.empty()) {
        store.push_back(qc);
        ledger_pos_[h] = ledger_.size();
        ledger_.push_back(LedgerEntry{block, qc, now});
        out.appended = true;
        finalize_blocks(now);
        return out;
    }
    for (const auto& s : store)
        if (s == qc) {
            out.duplicate = true;
            return out;
        }
    const Digest stored = ledger_[ledger_pos_[h]].block.digest;
    if (stored != block.digest) {
        out.conflict = true;
        std::set<ValidatorId> overlap;
        const auto mine = distinct_signers(qc.signers);
        for (const auto& s : store) {
            if (s.block_digest == block.digest) continue;
            for (auto id : distinct_signers(s.signers))
                if (std::binary_search(mine.begin(), mine.end(), id)) overlap.insert(id);
        }
        out.slashed.assign(overlap.begin(), overlap.end());
        slash(out.slashed);
    }
    store.push_back(qc);
    return out;
}

void Gadget::slash(const std::vector<ValidatorId>& ids) {
    if (ids.empty()) throw std::logic_error("conflicting quorums with empty intersection");
    for (auto id : ids) {
        if (id < 0 || id >= cfg_.n) throw std::out_of_range("slash id out of range");
        blacklist_.insert(id);
    }
}

std::vector<Digest> Gadget::take_fresh() {
    std::vector<Digest> out;
    out.swap(fresh_);
    return out;
}

ChainStrength Gadget::strength(Tick now) const {
    ChainStrength s;
    s.window_start = now - cfg_.delta_star;
    std::vector<char> seen(cfg_.n, 0);
    bool any = false;
    for (auto it = ledger_.rbegin(); it != ledger_.rend(); ++it) {
        if (it->recv_time <= now - cfg_.delta_star) break;
        any = true;
        for (auto id : it->qc.signers)
            if (id >= 0 && id < cfg_.n && !seen[id]) {
                seen[id] = 1;
                ++s.distinct;
            }
    }
    s.i = any ? std::max(0, s.distinct - 2 * cfg_.f - 1) : 0;
    return s;
}

ChainStrength Gadget::strength_for_cap(Tick now) {
    if (!opts_.freeze_strength) return strength(now);
    if (!frozen_valid_ || now >= frozen_.window_start + cfg_.delta_star) {
        frozen_ = strength(now);
        frozen_.window_start = now;
        frozen_valid_ = true;
    }
    return frozen_;
}

std::vector<Digest> Gadget::finalize_blocks(Tick now) {
    std::vector<Digest> fresh;
    if (!blacklist_.empty()) return fresh;
    Coins suffixvalue = 0;
    const Cap c = cap(opts_.rule, strength_for_cap(now).i, cfg_.f, cfg_.stake_d);
    std::size_t pos = suffixindex_;
    while (pos < ledger_.size()) {
        const auto& e = ledger_[pos];
        const bool first = finalized_set_.insert(e.block.digest).second;
        if (e.recv_time <= now - cfg_.delta_star) {
            if (first) {
                finalized_.push_back(e.block.digest);
                fresh.push_back(e.block.digest);
                fresh_.push_back(e.block.digest);
            }
            log_.push_back({now, e.block.height, e.block.digest, true, c, suffixvalue});
            ++suffixindex_;
            pos = suffixindex_;
            continue;
        }
        if (fits(c, suffixvalue + e.block.value)) {
            suffixvalue += e.block.value;
            if (first) {
                finalized_.push_back(e.block.digest);
                fresh.push_back(e.block.digest);
                fresh_.push_back(e.block.digest);
                log_.push_back({now, e.block.height, e.block.digest, false, c, suffixvalue});
            }
            ++pos;
            continue;
        }
        if (first) finalized_set_.erase(e.block.digest);
        break;
    }
    return fresh;
}

} // namespace cobra
