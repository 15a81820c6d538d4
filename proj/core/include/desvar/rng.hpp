#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace desvar {

struct StreamSeed {
    std::uint64_t value = 0;

    friend auto operator<=>(const StreamSeed&, const StreamSeed&) = default;
};

enum class StreamMode { direct, antithetic };

// Treatment applied to a replication group.
enum class Scenario { base, crn, av, cv };

std::string_view to_string(StreamMode mode);
std::string_view to_string(Scenario scenario);
Scenario parse_scenario(std::string_view text);

// Identifies the generator and the uniform mapping; stamped into every manifest.
extern const std::string_view kGeneratorId;

// SplitMix64 (Steele, Lea & Flood 2014): a Weyl counter with increment
// 0x9e3779b97f4a7c15 run through a 64-bit finalizer. The top 53 bits k of each
// output map to k * 2^-53, with k == 0 remapped to 1 so draws stay inside
// (0,1). Antithetic draws are 1 - u, which is exact for this lattice.
class RandomStream {
public:
    explicit RandomStream(StreamSeed seed, StreamMode mode = StreamMode::direct) noexcept
        : seed_(seed), mode_(mode), state_(seed.value) {}

    double next_uniform() noexcept;

    StreamSeed seed() const noexcept { return seed_; }
    StreamMode mode() const noexcept { return mode_; }
    std::uint64_t draw_count() const noexcept { return draw_count_; }

    // Raw generator output, exposed for tests and seed derivation.
    static std::uint64_t mix64(std::uint64_t z) noexcept;

private:
    StreamSeed seed_;
    StreamMode mode_;
    std::uint64_t state_;
    std::uint64_t draw_count_ = 0;
};

enum class SeedSharing {
    shared,     // every source draws from one stream (unsynchronized)
    dedicated,  // one stream per source (synchronized)
};

// Complete record of the streams behind one replication.
struct SeedManifest {
    std::string generator_id{kGeneratorId};
    Scenario scenario = Scenario::crn;
    std::int64_t replication = 0;
    StreamMode mode = StreamMode::direct;
    SeedSharing sharing = SeedSharing::dedicated;
    std::vector<std::pair<std::string, StreamSeed>> entries;

    std::optional<StreamSeed> find(std::string_view source) const;

    // Plain-text form: header key=value lines, a `---` separator, then one
    // `source=seed` line per entry in manifest order.
    std::string to_text() const;
    static SeedManifest from_text(std::string_view text);

    friend bool operator==(const SeedManifest&, const SeedManifest&) = default;
};

// Seed of a dedicated stream for (base seed, scenario tag, source, replication).
StreamSeed derive_seed(StreamSeed base_seed, std::string_view scenario_tag,
                       std::string_view source, std::int64_t replication);

// Base: all sources share one per-replication seed. CRN/CV: one seed per
// source. AV: replications 2k and 2k+1 share the seeds of 2k; the odd member
// is antithetic. Seed spaces of the four scenarios are disjoint.
SeedManifest manifest_for_scenario(std::span<const std::string> sources, Scenario scenario,
                                   StreamSeed base_seed, std::int64_t replication);

}  // namespace desvar
