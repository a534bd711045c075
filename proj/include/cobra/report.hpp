#pragma once

#include "cobra/analyzer.hpp"
#include "cobra/client.hpp"
#include "cobra/oracle.hpp"
#include "cobra/sim.hpp"

#include <json.hpp>

#include <string>

namespace cobra {

constexpr int kReportSchemaVersion = 1;

nlohmann::json report_json(const RunResult& r);

// One JSON object per line.
std::string finalization_jsonl(const RunResult& r, ValidatorId v);
std::string transcript_jsonl(const RunResult& r);

nlohmann::json accounts_json(const RunResult& r);

nlohmann::json block_to_json(const Block& b);
Block block_from_json(const nlohmann::json& j);
nlohmann::json qc_to_json(const QuorumCertificate& qc);
QuorumCertificate qc_from_json(const nlohmann::json& j);

nlohmann::json proof_to_json(const InclusionProof& p);
InclusionProof proof_from_json(const nlohmann::json& j);

std::string rational_string(const Rational& r);

} // namespace cobra
