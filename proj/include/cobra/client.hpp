#pragma once

#include "cobra/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cobra {

struct InclusionPath {
    std::size_t index = 0;
    Digest block_digest = 0;
};

struct InclusionProof {
    Transaction tx;
    Digest block_digest = 0;
    InclusionPath inclusion_path;
    std::vector<std::pair<Block, QuorumCertificate>> chain;
    Digest votes_for = 0;
};

enum class ProofVerdict { Accept, BadPath, BadQC, BrokenChain, InsufficientVotes };

const char* verdict_name(ProofVerdict v);

// Pure verifier: no state, no side effects.
ProofVerdict verify_proof(const InclusionProof& p, const SystemConfig& cfg);

// Distinct validators in `chain` blocks attesting to `target`.
int count_votes_for(const std::vector<std::pair<Block, QuorumCertificate>>& chain, Digest target);

// Assembles a proof from a validator's delivered chain. `chain` is ordered by
// height and must contain the block holding `tx`. The vote target is the
// first block at or after the target that collected a quorum of votes.
std::optional<InclusionProof> build_proof(const std::vector<std::pair<Block, QuorumCertificate>>& chain,
                                          const Transaction& tx, const SystemConfig& cfg);

} // namespace cobra
