#pragma once

#include "cobra/core.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cobra {

// Dynamic signer bitmap; bit i is validator i.
struct SignerSet {
    std::vector<std::uint64_t> words;

    static SignerSet of(const std::vector<int>& ids, int n);
    void set(int id);
    bool test(int id) const;
    int count() const;
    std::vector<int> ids() const;
    bool operator==(const SignerSet&) const = default;
};

struct TraceRow {
    std::int64_t height = 0;
    int proposer = 0;
    SignerSet signers;
    double value = 0;
    std::optional<double> timestamp;
};

struct ParticipationTrace {
    int n = 0;
    std::vector<TraceRow> rows;
};

enum class TraceErrorCode { ParseError, NonMonotoneHeights, WindowLargerThanTrace, BadSigner, IoError };

class TraceError : public std::runtime_error {
public:
    TraceError(TraceErrorCode c, std::size_t line, const std::string& what)
        : std::runtime_error(what), code(c), line(line) {}
    TraceErrorCode code;
    std::size_t line;
};

enum class TraceFormat { Csv, Jsonl };

ParticipationTrace ingest_text(const std::string& text, TraceFormat fmt, int n);
ParticipationTrace ingest(const std::string& path, TraceFormat fmt, int n);

std::string to_csv(const ParticipationTrace& t, bool hex_bitmap);
std::string to_jsonl(const ParticipationTrace& t);

struct BlockStrength {
    std::int64_t height = 0;
    int votes = 0;       // signers of this block alone
    int window_union = 0; // distinct signers over the trailing window
    int i = 0;           // window_union - 2f - 1
    bool strongest = false;
};

struct Streak {
    std::int64_t start_height = 0;
    std::int64_t length = 0;
    double volume = 0;
    double duration = 0; // timestamp span when timestamps exist
};

struct CaseReport {
    std::size_t blocks = 0;
    std::size_t strongest_blocks = 0;
    double fraction_strongest = 0;
    std::vector<Streak> weak_streaks;
    double max_streak_volume = 0;
    std::int64_t max_streak_length = 0;
    bool time_window = false;
};

struct ClassifyOptions {
    int window_blocks = 1;
    // When set and every row has a timestamp, the window is (t - delta_star, t].
    std::optional<double> delta_star;
};

struct Classification {
    std::vector<BlockStrength> blocks;
    CaseReport report;
};

Classification classify(const ParticipationTrace& trace, int n, int f, const ClassifyOptions& opts);

struct CapacityVerdict {
    double volume_per_delta_star = 0;
    double stake = 0;
    bool feasible = false;
    double slack = 0;                  // stake - volume_per_delta_star
    double sustainable_delta_star = 0; // seconds; infinity when volume is 0
    double required_stake = 0;
    double weak_streak_seconds = 0;
    double weak_streak_volume = 0; // largest streak at the given volume rate
    bool streaks_covered = true;
};

// Linear volume model: volume per Δ* = daily * Δ* / 86400.
CapacityVerdict capacity(const CaseReport& report, double stake_per_validator, double daily_volume,
                         double block_time_s, double delta_star_s);

struct SyntheticSpec {
    int n = 175;
    std::int64_t total_blocks = 150952;
    std::vector<std::int64_t> weak_streaks{71, 96, 3, 147};
    double block_time_s = 6.0;
    double value_per_block = 1000.0;
    std::uint64_t seed = 7;
};

// Strong blocks carry more than 2f + ceil(f/2) + 1 signers; planted weak
// streaks carry exactly 2f + 1. Streaks are evenly spaced.
ParticipationTrace synthetic_trace(const SyntheticSpec& spec);

} // namespace cobra
