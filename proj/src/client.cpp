#include "cobra/client.hpp"

#include <algorithm>
#include <set>

namespace cobra {

const char* verdict_name(ProofVerdict v) {
    switch (v) {
    case ProofVerdict::Accept: return "Accept";
    case ProofVerdict::BadPath: return "BadPath";
    case ProofVerdict::BadQC: return "BadQC";
    case ProofVerdict::BrokenChain: return "BrokenChain";
    case ProofVerdict::InsufficientVotes: return "InsufficientVotes";
    }
    return "?";
}

int count_votes_for(const std::vector<std::pair<Block, QuorumCertificate>>& chain, Digest target) {
    std::set<ValidatorId> voters;
    for (const auto& [b, qc] : chain)
        for (const auto& v : b.finality_votes)
            if (v.target == target) voters.insert(v.voter);
    return static_cast<int>(voters.size());
}

ProofVerdict verify_proof(const InclusionProof& p, const SystemConfig& cfg) {
    if (p.chain.empty()) return ProofVerdict::BadPath;
    const Block& target = p.chain.front().first;
    if (p.block_digest != target.digest || p.inclusion_path.block_digest != target.digest) return ProofVerdict::BadPath;
    if (compute_digest(target) != target.digest) return ProofVerdict::BadPath;
    if (p.inclusion_path.index >= target.txs.size() || !(target.txs[p.inclusion_path.index] == p.tx))
        return ProofVerdict::BadPath;

    for (const auto& [b, qc] : p.chain) {
        if (!qc_is_valid(qc, cfg)) return ProofVerdict::BadQC;
        if (qc.block_digest != b.digest || qc.height != b.height) return ProofVerdict::BadQC;
        if (compute_digest(b) != b.digest || block_value(b) != b.value) return ProofVerdict::BadQC;
    }
    for (std::size_t i = 1; i < p.chain.size(); ++i) {
        const Block& prev = p.chain[i - 1].first;
        const Block& cur = p.chain[i].first;
        if (cur.parent_hash != prev.digest || cur.height != prev.height + 1) return ProofVerdict::BrokenChain;
    }
    const bool target_in_chain = std::any_of(p.chain.begin(), p.chain.end(),
                                             [&](const auto& e) { return e.first.digest == p.votes_for; });
    if (!target_in_chain) return ProofVerdict::InsufficientVotes;
    if (count_votes_for(p.chain, p.votes_for) < cfg.q) return ProofVerdict::InsufficientVotes;
    return ProofVerdict::Accept;
}

std::optional<InclusionProof> build_proof(const std::vector<std::pair<Block, QuorumCertificate>>& chain,
                                          const Transaction& tx, const SystemConfig& cfg) {
    for (std::size_t bi = 0; bi < chain.size(); ++bi) {
        const Block& b = chain[bi].first;
        auto it = std::find(b.txs.begin(), b.txs.end(), tx);
        if (it == b.txs.end()) continue;
        InclusionProof p;
        p.tx = tx;
        p.block_digest = b.digest;
        p.inclusion_path = {static_cast<std::size_t>(it - b.txs.begin()), b.digest};
        p.chain.assign(chain.begin() + static_cast<std::ptrdiff_t>(bi), chain.end());
        p.votes_for = b.digest;
        for (const auto& cand : p.chain)
            if (count_votes_for(p.chain, cand.first.digest) >= cfg.q) {
                p.votes_for = cand.first.digest;
                break;
            }
        // Trim the chain to the shortest prefix that still carries the votes.
        std::set<ValidatorId> voters;
        std::size_t cut = p.chain.size();
        for (std::size_t j = 0; j < p.chain.size(); ++j) {
            for (const auto& v : p.chain[j].first.finality_votes)
                if (v.target == p.votes_for) voters.insert(v.voter);
            if (static_cast<int>(voters.size()) >= cfg.q) {
                cut = j + 1;
                break;
            }
        }
        p.chain.resize(cut);
        return p;
    }
    return std::nullopt;
}

} // namespace cobra
