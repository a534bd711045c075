#include "cobra/analyzer.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace cobra {

SignerSet SignerSet::of(const std::vector<int>& ids, int n) {
    SignerSet s;
    s.words.assign(static_cast<std::size_t>((n + 63) / 64), 0);
    for (int id : ids) s.set(id);
    return s;
}

void SignerSet::set(int id) {
    const auto w = static_cast<std::size_t>(id / 64);
    if (w >= words.size()) words.resize(w + 1, 0);
    words[w] |= 1ull << (id % 64);
}

bool SignerSet::test(int id) const {
    const auto w = static_cast<std::size_t>(id / 64);
    return w < words.size() && ((words[w] >> (id % 64)) & 1u);
}

int SignerSet::count() const {
    int c = 0;
    for (auto w : words) c += std::popcount(w);
    return c;
}

std::vector<int> SignerSet::ids() const {
    std::vector<int> out;
    for (std::size_t w = 0; w < words.size(); ++w) {
        auto bits = words[w];
        while (bits) {
            out.push_back(static_cast<int>(w * 64) + std::countr_zero(bits));
            bits &= bits - 1;
        }
    }
    return out;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
    throw TraceError(TraceErrorCode::ParseError, line, "line " + std::to_string(line) + ": " + msg);
}

std::int64_t to_int(const std::string& s, std::size_t line, const char* field) {
    try {
        std::size_t pos = 0;
        auto v = std::stoll(s, &pos);
        if (pos != s.size()) parse_fail(line, std::string("bad ") + field);
        return v;
    } catch (const TraceError&) {
        throw;
    } catch (...) {
        parse_fail(line, std::string("bad ") + field);
    }
}

double to_double(const std::string& s, std::size_t line, const char* field) {
    try {
        std::size_t pos = 0;
        auto v = std::stod(s, &pos);
        if (pos != s.size()) parse_fail(line, std::string("bad ") + field);
        return v;
    } catch (const TraceError&) {
        throw;
    } catch (...) {
        parse_fail(line, std::string("bad ") + field);
    }
}

SignerSet parse_hex(const std::string& hex, int n, std::size_t line) {
    SignerSet s = SignerSet::of({}, n);
    int bit = 0;
    for (auto it = hex.rbegin(); it != hex.rend(); ++it, bit += 4) {
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(*it)));
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else parse_fail(line, "bad hex bitmap");
        for (int b = 0; b < 4; ++b)
            if ((v >> b) & 1) {
                if (bit + b >= n) throw TraceError(TraceErrorCode::BadSigner, line, "signer out of range");
                s.set(bit + b);
            }
    }
    return s;
}

SignerSet parse_signers(const std::string& field, int n, std::size_t line) {
    if (field.rfind("0x", 0) == 0 || field.rfind("0X", 0) == 0) return parse_hex(field.substr(2), n, line);
    SignerSet s = SignerSet::of({}, n);
    if (field.empty()) return s;
    std::stringstream ss(field);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
        auto id = to_int(tok, line, "signer");
        if (id < 0 || id >= n) throw TraceError(TraceErrorCode::BadSigner, line, "signer out of range");
        s.set(static_cast<int>(id));
    }
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

void check_monotone(const ParticipationTrace& t, std::size_t line) {
    const auto& r = t.rows;
    if (r.size() >= 2 && r[r.size() - 1].height <= r[r.size() - 2].height)
        throw TraceError(TraceErrorCode::NonMonotoneHeights, line, "line " + std::to_string(line) + ": height not increasing");
}

} // namespace

ParticipationTrace ingest_text(const std::string& text, TraceFormat fmt, int n) {
    ParticipationTrace t;
    t.n = n;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        TraceRow row;
        if (fmt == TraceFormat::Csv) {
            if (lineno == 1 && line.rfind("height", 0) == 0) continue;
            auto cols = split_csv(line);
            if (cols.size() < 4 || cols.size() > 5) parse_fail(lineno, "expected 4 or 5 columns");
            row.height = to_int(cols[0], lineno, "height");
            row.proposer = static_cast<int>(to_int(cols[1], lineno, "proposer"));
            row.signers = parse_signers(cols[2], n, lineno);
            row.value = to_double(cols[3], lineno, "value");
            if (cols.size() == 5 && !cols[4].empty()) row.timestamp = to_double(cols[4], lineno, "timestamp");
        } else {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
                row.height = j.at("height").get<std::int64_t>();
                row.proposer = j.at("proposer").get<int>();
                const auto& s = j.at("signers");
                if (s.is_string()) {
                    row.signers = parse_signers(s.get<std::string>(), n, lineno);
                } else {
                    row.signers = SignerSet::of({}, n);
                    for (const auto& id : s) {
                        int v = id.get<int>();
                        if (v < 0 || v >= n) throw TraceError(TraceErrorCode::BadSigner, lineno, "signer out of range");
                        row.signers.set(v);
                    }
                }
                row.value = j.at("value").get<double>();
                if (j.contains("timestamp") && !j["timestamp"].is_null()) row.timestamp = j["timestamp"].get<double>();
            } catch (const TraceError&) {
                throw;
            } catch (const std::exception& e) {
                parse_fail(lineno, e.what());
            }
        }
        if (row.proposer < 0 || row.proposer >= n) throw TraceError(TraceErrorCode::BadSigner, lineno, "proposer out of range");
        t.rows.push_back(std::move(row));
        check_monotone(t, lineno);
    }
    return t;
}

ParticipationTrace ingest(const std::string& path, TraceFormat fmt, int n) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw TraceError(TraceErrorCode::IoError, 0, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ingest_text(ss.str(), fmt, n);
}

namespace {

std::string hex_of(const SignerSet& s, int n) {
    const int digits = std::max(1, (n + 3) / 4);
    std::string out(static_cast<std::size_t>(digits), '0');
    for (int d = 0; d < digits; ++d) {
        int v = 0;
        for (int b = 0; b < 4; ++b)
            if (s.test(d * 4 + b)) v |= 1 << b;
        out[static_cast<std::size_t>(digits - 1 - d)] = "0123456789abcdef"[v];
    }
    return "0x" + out;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::string to_csv(const ParticipationTrace& t, bool hex_bitmap) {
    std::ostringstream os;
    os << "height,proposer,signers,value,timestamp\n";
    for (const auto& r : t.rows) {
        os << r.height << ',' << r.proposer << ',';
        if (hex_bitmap) {
            os << hex_of(r.signers, t.n);
        } else {
            auto ids = r.signers.ids();
            for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? ";" : "") << ids[i];
        }
        os << ',' << num(r.value) << ',';
        if (r.timestamp) os << num(*r.timestamp);
        os << '\n';
    }
    return os.str();
}

std::string to_jsonl(const ParticipationTrace& t) {
    std::ostringstream os;
    for (const auto& r : t.rows) {
        nlohmann::json j;
        j["height"] = r.height;
        j["proposer"] = r.proposer;
        j["signers"] = r.signers.ids();
        j["value"] = r.value;
        if (r.timestamp) j["timestamp"] = *r.timestamp;
        else j["timestamp"] = nullptr;
        os << j.dump() << '\n';
    }
    return os.str();
}

Classification classify(const ParticipationTrace& trace, int n, int f, const ClassifyOptions& opts) {
    if (opts.window_blocks < 1 || static_cast<std::size_t>(opts.window_blocks) > trace.rows.size())
        throw TraceError(TraceErrorCode::WindowLargerThanTrace, 0, "window larger than trace");
    const bool by_time = opts.delta_star.has_value() &&
                         std::all_of(trace.rows.begin(), trace.rows.end(), [](const TraceRow& r) { return r.timestamp.has_value(); });
    Classification out;
    out.report.time_window = by_time;
    std::vector<int> cnt(static_cast<std::size_t>(n), 0);
    int distinct = 0;
    std::size_t tail = 0;
    auto add = [&](const TraceRow& r, int delta) {
        for (int id : r.signers.ids()) {
            int& c = cnt[static_cast<std::size_t>(id)];
            if (delta > 0 && c++ == 0) ++distinct;
            if (delta < 0 && --c == 0) --distinct;
        }
    };
    for (std::size_t idx = 0; idx < trace.rows.size(); ++idx) {
        const auto& r = trace.rows[idx];
        add(r, +1);
        if (by_time) {
            while (tail < idx && *trace.rows[tail].timestamp <= *r.timestamp - *opts.delta_star) add(trace.rows[tail++], -1);
        } else {
            while (idx - tail + 1 > static_cast<std::size_t>(opts.window_blocks)) add(trace.rows[tail++], -1);
        }
        BlockStrength b;
        b.height = r.height;
        b.votes = r.signers.count();
        b.window_union = distinct;
        b.i = std::max(0, distinct - 2 * f - 1);
        b.strongest = 2 * b.i > f + 1;
        out.blocks.push_back(b);
    }

    auto& rep = out.report;
    rep.blocks = out.blocks.size();
    std::optional<Streak> cur;
    auto close = [&](std::size_t last_idx) {
        if (!cur) return;
        const auto& first = trace.rows[static_cast<std::size_t>(last_idx + 1 - static_cast<std::size_t>(cur->length))];
        const auto& last = trace.rows[last_idx];
        if (first.timestamp && last.timestamp) cur->duration = *last.timestamp - *first.timestamp;
        rep.max_streak_volume = std::max(rep.max_streak_volume, cur->volume);
        rep.max_streak_length = std::max(rep.max_streak_length, cur->length);
        rep.weak_streaks.push_back(*cur);
        cur.reset();
    };
    for (std::size_t idx = 0; idx < out.blocks.size(); ++idx) {
        if (out.blocks[idx].strongest) {
            ++rep.strongest_blocks;
            if (idx > 0) close(idx - 1);
            continue;
        }
        if (!cur) cur = Streak{out.blocks[idx].height, 0, 0, 0};
        ++cur->length;
        cur->volume += trace.rows[idx].value;
    }
    if (!out.blocks.empty()) close(out.blocks.size() - 1);
    rep.fraction_strongest = rep.blocks ? static_cast<double>(rep.strongest_blocks) / static_cast<double>(rep.blocks) : 0.0;
    return out;
}

CapacityVerdict capacity(const CaseReport& report, double stake, double daily, double block_time_s, double delta_star_s) {
    CapacityVerdict v;
    v.stake = stake;
    v.volume_per_delta_star = daily * delta_star_s / 86400.0;
    v.feasible = v.volume_per_delta_star <= stake;
    v.slack = stake - v.volume_per_delta_star;
    v.sustainable_delta_star = daily > 0 ? stake * 86400.0 / daily : std::numeric_limits<double>::infinity();
    v.required_stake = v.volume_per_delta_star;
    v.weak_streak_seconds = static_cast<double>(report.max_streak_length) * block_time_s;
    v.weak_streak_volume = daily * v.weak_streak_seconds / 86400.0;
    v.streaks_covered = v.weak_streak_volume <= stake;
    return v;
}

ParticipationTrace synthetic_trace(const SyntheticSpec& spec) {
    ParticipationTrace t;
    t.n = spec.n;
    const int f = (spec.n - 1) / 3;
    const int thr = 2 * f + (f + 1) / 2 + 1;
    std::mt19937_64 rng(spec.seed);
    std::vector<std::int64_t> starts;
    const auto s = static_cast<std::int64_t>(spec.weak_streaks.size());
    for (std::int64_t j = 0; j < s; ++j) starts.push_back(spec.total_blocks * (j + 1) / (s + 1));
    std::vector<int> ids(static_cast<std::size_t>(spec.n));
    std::iota(ids.begin(), ids.end(), 0);
    t.rows.reserve(static_cast<std::size_t>(spec.total_blocks));
    for (std::int64_t h = 1; h <= spec.total_blocks; ++h) {
        bool weak = false;
        for (std::int64_t j = 0; j < s; ++j)
            if (h - 1 >= starts[j] && h - 1 < starts[j] + spec.weak_streaks[static_cast<std::size_t>(j)]) weak = true;
        std::uniform_int_distribution<int> dist(weak ? 2 * f + 1 : thr + 1, weak ? thr : spec.n);
        const int count = dist(rng);
        std::shuffle(ids.begin(), ids.end(), rng);
        TraceRow r;
        r.height = h;
        r.proposer = ids[0];
        r.signers = SignerSet::of(std::vector<int>(ids.begin(), ids.begin() + count), spec.n);
        r.value = spec.value_per_block;
        r.timestamp = static_cast<double>(h) * spec.block_time_s;
        t.rows.push_back(std::move(r));
    }
    return t;
}

} // namespace cobra
