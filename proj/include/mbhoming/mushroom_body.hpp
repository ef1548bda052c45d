#pragma once

// Sparse associative memory.
//
// Projection neurons (PN) fan out to a large population of Kenyon cells (KC)
// through a fixed random binary matrix. Only the k most driven KCs stay
// active. Each output neuron (MBON) owns one weight per KC, initialised to 1;
// learning a view drops the weights of its active KCs to 0, and the
// familiarity of a view is the mean weight over its active KCs, so 0 means
// "seen before" and 1 means "never seen".

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbhoming/error.hpp"
#include "mbhoming/random.hpp"
#include "mbhoming/teaching_signal.hpp"

namespace mbhoming {

class ProjectionMatrix {
public:
    // Each KC draws fan_in distinct PNs uniformly without replacement.
    static ProjectionMatrix build(std::size_t n_pn, std::size_t n_kc, std::size_t fan_in, std::uint64_t seed) {
        if (n_pn == 0 || n_kc == 0 || fan_in == 0) {
            throw ConfigError("build_projection: n_pn, n_kc and fan_in must be positive");
        }
        if (fan_in > n_pn) {
            throw ConfigError("build_projection: fan_in (" + std::to_string(fan_in) + ") exceeds n_pn (" +
                              std::to_string(n_pn) + ")");
        }
        ProjectionMatrix m;
        m.n_pn_ = n_pn;
        m.n_kc_ = n_kc;
        m.fan_in_ = fan_in;
        m.seed_ = seed;
        m.connections_.resize(n_kc * fan_in);

        Rng rng(seed);
        std::vector<std::uint32_t> pool;
        for (std::size_t kc = 0; kc < n_kc; ++kc) {
            auto row = std::span(m.connections_).subspan(kc * fan_in, fan_in);
            if (fan_in * 4 > n_pn) {
                // Dense draw: partial Fisher-Yates over the whole PN range.
                pool.resize(n_pn);
                std::iota(pool.begin(), pool.end(), std::uint32_t{0});
                for (std::size_t i = 0; i < fan_in; ++i) {
                    const auto j = i + rng.index(n_pn - i);
                    std::swap(pool[i], pool[j]);
                    row[i] = pool[i];
                }
            } else {
                // Sparse draw: Floyd's algorithm.
                std::size_t filled = 0;
                for (std::size_t j = n_pn - fan_in; j < n_pn; ++j) {
                    auto t = static_cast<std::uint32_t>(rng.index(j + 1));
                    if (std::find(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(filled), t) !=
                        row.begin() + static_cast<std::ptrdiff_t>(filled)) {
                        t = static_cast<std::uint32_t>(j);
                    }
                    row[filled++] = t;
                }
            }
            std::sort(row.begin(), row.end());
        }
        return m;
    }

    std::size_t n_pn() const noexcept { return n_pn_; }
    std::size_t n_kc() const noexcept { return n_kc_; }
    std::size_t fan_in() const noexcept { return fan_in_; }
    std::uint64_t seed() const noexcept { return seed_; }

    // Sorted PN indices feeding Kenyon cell `kc`.
    std::span<const std::uint32_t> inputs(std::size_t kc) const {
        return std::span(connections_).subspan(kc * fan_in_, fan_in_);
    }

    friend bool operator==(const ProjectionMatrix&, const ProjectionMatrix&) = default;

private:
    std::size_t n_pn_ = 0;
    std::size_t n_kc_ = 0;
    std::size_t fan_in_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<std::uint32_t> connections_;
};

inline ProjectionMatrix build_projection(std::size_t n_pn, std::size_t n_kc, std::size_t fan_in, std::uint64_t seed) {
    return ProjectionMatrix::build(n_pn, n_kc, fan_in, seed);
}

// Strictly increasing indices of the active Kenyon cells.
struct KCActivation {
    std::vector<std::uint32_t> active;

    std::size_t k() const noexcept { return active.size(); }
    friend bool operator==(const KCActivation&, const KCActivation&) = default;
};

// Summed PN drive of every KC.
inline std::vector<double> kc_drive(std::span<const double> pn, const ProjectionMatrix& proj) {
    if (pn.size() != proj.n_pn()) {
        throw InputError("encode: PN vector has " + std::to_string(pn.size()) + " entries, projection expects " +
                         std::to_string(proj.n_pn()));
    }
    std::vector<double> drive(proj.n_kc());
    for (std::size_t kc = 0; kc < proj.n_kc(); ++kc) {
        double acc = 0.0;
        for (const auto p : proj.inputs(kc)) acc += pn[p];
        drive[kc] = acc;
    }
    return drive;
}

// k-winner-take-all; on equal drive the lower KC index wins.
inline KCActivation encode(std::span<const double> pn, const ProjectionMatrix& proj, std::size_t k) {
    if (k == 0 || k > proj.n_kc()) {
        throw InputError("encode: k must be in [1, n_kc]");
    }
    const auto drive = kc_drive(pn, proj);
    std::vector<std::uint32_t> order(drive.size());
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    const auto stronger = [&drive](std::uint32_t a, std::uint32_t b) {
        return drive[a] > drive[b] || (drive[a] == drive[b] && a < b);
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(), stronger);
    std::vector<std::uint32_t> winners(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(winners.begin(), winners.end());
    return KCActivation{std::move(winners)};
}

enum class MBONId : std::uint8_t { LeftA = 0, RightA = 1, LeftB = 2, RightB = 3, Nest = 4 };

inline constexpr std::size_t kMbonCount = 5;
inline constexpr std::array<MBONId, kMbonCount> kAllMbons{MBONId::LeftA, MBONId::RightA, MBONId::LeftB,
                                                          MBONId::RightB, MBONId::Nest};

inline constexpr std::string_view to_string(MBONId id) {
    constexpr std::array<std::string_view, kMbonCount> names{"LeftA", "RightA", "LeftB", "RightB", "Nest"};
    return names[static_cast<std::size_t>(id)];
}

// Familiarity per MBON: 0 = fully familiar, 1 = fully novel.
struct FamiliarityReadout {
    std::array<double, kMbonCount> values{1.0, 1.0, 1.0, 1.0, 1.0};

    double& operator[](MBONId id) { return values[static_cast<std::size_t>(id)]; }
    double operator[](MBONId id) const { return values[static_cast<std::size_t>(id)]; }
};

class MBONBank {
public:
    MBONBank() = default;
    explicit MBONBank(std::size_t n_kc) : n_kc_(n_kc) {
        for (auto& w : weights_) w.assign(n_kc, 1);
    }

    std::size_t n_kc() const noexcept { return n_kc_; }

    double weight(MBONId id, std::size_t kc) const { return weights_[idx(id)][kc]; }

    std::size_t learned_count(MBONId id) const { return learned_[idx(id)]; }

    std::size_t total_learned() const {
        return std::accumulate(learned_.begin(), learned_.end(), std::size_t{0});
    }

    bool empty() const { return total_learned() == 0; }

    // One-shot depression of every active synapse onto `target`. Returns the
    // number of synapses that were still at 1.
    std::size_t learn(MBONId target, const KCActivation& kc) {
        auto& w = weights_[idx(target)];
        std::size_t changed = 0;
        for (const auto i : kc.active) {
            if (i >= n_kc_) throw InputError("learn: KC index out of range");
            if (w[i] != 0) {
                w[i] = 0;
                ++changed;
            }
        }
        learned_[idx(target)] += changed;
        return changed;
    }

    // Mean weight over the active set.
    double familiarity(MBONId id, const KCActivation& kc) const {
        if (kc.active.empty()) throw InputError("familiarity: empty activation");
        const auto& w = weights_[idx(id)];
        std::size_t sum = 0;
        for (const auto i : kc.active) {
            if (i >= n_kc_) throw InputError("familiarity: KC index out of range");
            sum += w[i];
        }
        return static_cast<double>(sum) / static_cast<double>(kc.active.size());
    }

    // Sorted indices of learned (zero) synapses.
    std::vector<std::uint32_t> learned_indices(MBONId id) const {
        std::vector<std::uint32_t> out;
        out.reserve(learned_[idx(id)]);
        const auto& w = weights_[idx(id)];
        for (std::size_t i = 0; i < n_kc_; ++i) {
            if (w[i] == 0) out.push_back(static_cast<std::uint32_t>(i));
        }
        return out;
    }

    friend bool operator==(const MBONBank&, const MBONBank&) = default;

private:
    static std::size_t idx(MBONId id) { return static_cast<std::size_t>(id); }

    std::size_t n_kc_ = 0;
    std::array<std::vector<std::uint8_t>, kMbonCount> weights_;
    std::array<std::size_t, kMbonCount> learned_{};
};

inline MBONBank learn(MBONBank bank, MBONId target, const KCActivation& kc) {
    bank.learn(target, kc);
    return bank;
}

inline double familiarity(const MBONBank& bank, MBONId id, const KCActivation& kc) {
    return bank.familiarity(id, kc);
}

// ---------------------------------------------------------------------------
// Weight file
//
//   "MBW1" | u32 n_kc | u32 n_mbon (5) | u32 index_width (4) | u32 reserved (0)
//   | u32 list_mask
//   then for each MBON whose bit is set in list_mask, in the order LeftA,
//   RightA, LeftB, RightB, Nest: its learned KC indices, strictly increasing,
//   with bit 31 set on the last one.
//
// All integers little-endian. An empty bank is exactly the 24-byte header and
// every learned synapse costs 4 bytes, so n_kc must stay below 2^31.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kWeightHeaderSize = 24;
inline constexpr std::uint32_t kListEndBit = 0x80000000u;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos, std::string_view field) {
    if (in.size() < pos + 4) {
        throw FormatError("weight file truncated while reading " + std::string(field), pos);
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
    pos += 4;
    return v;
}

} // namespace detail

inline std::vector<std::uint8_t> serialize(const MBONBank& bank) {
    if (bank.n_kc() >= kListEndBit) throw RangeError("serialize: n_kc too large for the weight file");
    std::vector<std::uint8_t> out{'M', 'B', 'W', '1'};
    out.reserve(kWeightHeaderSize + 4 * bank.total_learned());
    detail::put_u32(out, static_cast<std::uint32_t>(bank.n_kc()));
    detail::put_u32(out, static_cast<std::uint32_t>(kMbonCount));
    detail::put_u32(out, 4);
    detail::put_u32(out, 0);
    std::uint32_t mask = 0;
    for (std::size_t m = 0; m < kMbonCount; ++m) {
        if (bank.learned_count(kAllMbons[m]) > 0) mask |= 1u << m;
    }
    detail::put_u32(out, mask);
    for (const auto id : kAllMbons) {
        const auto idx = bank.learned_indices(id);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            detail::put_u32(out, i + 1 == idx.size() ? idx[i] | kListEndBit : idx[i]);
        }
    }
    return out;
}

inline MBONBank deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw FormatError("weight file truncated in magic", bytes.size());
    if (!(bytes[0] == 'M' && bytes[1] == 'B' && bytes[2] == 'W' && bytes[3] == '1')) {
        throw FormatError("bad magic, expected MBW1", 0);
    }
    std::size_t pos = 4;
    const auto n_kc = detail::get_u32(bytes, pos, "n_kc");
    if (n_kc == 0 || n_kc >= kListEndBit) throw FormatError("n_kc out of range", 4);
    if (detail::get_u32(bytes, pos, "n_mbon") != kMbonCount) throw FormatError("n_mbon must be 5", 8);
    if (detail::get_u32(bytes, pos, "index_width") != 4) throw FormatError("index_width must be 4", 12);
    if (detail::get_u32(bytes, pos, "reserved") != 0) throw FormatError("reserved field must be 0", 16);
    const auto mask = detail::get_u32(bytes, pos, "list_mask");
    if (mask >> kMbonCount) throw FormatError("list_mask names a nonexistent MBON", 20);

    MBONBank bank(n_kc);
    for (std::size_t m = 0; m < kMbonCount; ++m) {
        if (!(mask & (1u << m))) continue;
        KCActivation learned;
        for (;;) {
            const std::size_t at = pos;
            const auto raw = detail::get_u32(bytes, pos, "index of " + std::string(to_string(kAllMbons[m])));
            const auto v = raw & ~kListEndBit;
            if (v >= n_kc) throw FormatError("KC index out of range", at);
            if (!learned.active.empty() && v <= learned.active.back()) {
                throw FormatError("KC indices not strictly increasing", at);
            }
            learned.active.push_back(v);
            if (raw & kListEndBit) break;
        }
        bank.learn(kAllMbons[m], learned);
    }
    if (pos != bytes.size()) throw FormatError("trailing bytes after last MBON", pos);
    return bank;
}

// ---------------------------------------------------------------------------
// Two-hemisphere network with lateralised output banks.
// ---------------------------------------------------------------------------

struct NetworkConfig {
    std::size_t n_kc = 5000;
    std::size_t fan_in = 10;
    std::size_t k = 50;
    // Both hemispheres use the same projection when set.
    bool shared_projection = false;

    void validate(std::size_t n_pn) const {
        if (n_kc == 0) throw ConfigError("network: n_kc must be positive");
        if (fan_in == 0 || fan_in > n_pn) throw ConfigError("network: fan_in must be in [1, n_pn]");
        if (k == 0 || k > n_kc) throw ConfigError("network: k must be in [1, n_kc]");
    }

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct HemisphereCodes {
    KCActivation a;
    KCActivation b;
};

class MushroomBody {
public:
    MushroomBody(std::size_t n_pn, const NetworkConfig& cfg, std::uint64_t seed)
        : cfg_(cfg),
          proj_a_(build_projection(n_pn, cfg.n_kc, cfg.fan_in, mix_seed(seed, 0))),
          proj_b_(cfg.shared_projection ? proj_a_ : build_projection(n_pn, cfg.n_kc, cfg.fan_in, mix_seed(seed, 1))),
          bank_(cfg.n_kc) {
        cfg.validate(n_pn);
    }

    const NetworkConfig& config() const noexcept { return cfg_; }
    const ProjectionMatrix& projection_a() const noexcept { return proj_a_; }
    const ProjectionMatrix& projection_b() const noexcept { return proj_b_; }
    const MBONBank& bank() const noexcept { return bank_; }

    void set_bank(MBONBank bank) {
        if (bank.n_kc() != cfg_.n_kc) throw InputError("set_bank: n_kc mismatch");
        bank_ = std::move(bank);
    }

    HemisphereCodes encode(std::span<const double> pn) const {
        return {mbhoming::encode(pn, proj_a_, cfg_.k), mbhoming::encode(pn, proj_b_, cfg_.k)};
    }

    // Left/Right views go to the matching bank of both hemispheres; nest
    // views go to the nest MBON, which reads hemisphere A. Returns the number
    // of synapses depressed; 0 means the view was already fully familiar.
    std::size_t learn(TeachingSignal signal, const HemisphereCodes& codes) {
        switch (signal) {
        case TeachingSignal::Left:
            return bank_.learn(MBONId::LeftA, codes.a) + bank_.learn(MBONId::LeftB, codes.b);
        case TeachingSignal::Right:
            return bank_.learn(MBONId::RightA, codes.a) + bank_.learn(MBONId::RightB, codes.b);
        case TeachingSignal::Nest:
            return bank_.learn(MBONId::Nest, codes.a);
        }
        return 0;
    }

    FamiliarityReadout readout(const HemisphereCodes& codes) const {
        FamiliarityReadout f;
        f[MBONId::LeftA] = bank_.familiarity(MBONId::LeftA, codes.a);
        f[MBONId::RightA] = bank_.familiarity(MBONId::RightA, codes.a);
        f[MBONId::LeftB] = bank_.familiarity(MBONId::LeftB, codes.b);
        f[MBONId::RightB] = bank_.familiarity(MBONId::RightB, codes.b);
        f[MBONId::Nest] = bank_.familiarity(MBONId::Nest, codes.a);
        return f;
    }

private:
    NetworkConfig cfg_;
    ProjectionMatrix proj_a_;
    ProjectionMatrix proj_b_;
    MBONBank bank_;
};

} // namespace mbhoming
