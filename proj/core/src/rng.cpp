#include "desvar/rng.hpp"

#include "desvar/error.hpp"

#include <charconv>
#include <set>
#include <sstream>

namespace desvar {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr double kTwoPowMinus53 = 0x1.0p-53;

std::uint64_t fnv1a(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename Int>
Int parse_int(std::string_view text, std::string_view what) {
    Int value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ValidationError("manifest: bad " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

void check_source_name(std::string_view name) {
    if (name.empty() || name == "---") throw ValidationError("manifest: empty source name");
    for (char c : name) {
        if (c == '=' || c == '\n' || c == ' ' || c == '\t' || c == '#') {
            throw ValidationError("manifest: invalid source name '" + std::string(name) + "'");
        }
    }
}

}  // namespace

const std::string_view kGeneratorId =
    "splitmix64;gamma=0x9e3779b97f4a7c15;u=(x>>11)*2^-53,0->2^-53;av=1-u";

std::string_view to_string(StreamMode mode) {
    return mode == StreamMode::direct ? "direct" : "antithetic";
}

std::string_view to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::base: return "Base";
        case Scenario::crn: return "CRN";
        case Scenario::av: return "AV";
        case Scenario::cv: return "CV";
    }
    return "?";
}

Scenario parse_scenario(std::string_view text) {
    if (text == "Base" || text == "base") return Scenario::base;
    if (text == "CRN" || text == "crn") return Scenario::crn;
    if (text == "AV" || text == "av") return Scenario::av;
    if (text == "CV" || text == "cv") return Scenario::cv;
    throw ValidationError("unknown scenario '" + std::string(text) + "'");
}

std::uint64_t RandomStream::mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double RandomStream::next_uniform() noexcept {
    state_ += kGolden;
    std::uint64_t k = mix64(state_) >> 11;
    if (k == 0) k = 1;
    ++draw_count_;
    const double u = static_cast<double>(k) * kTwoPowMinus53;
    return mode_ == StreamMode::direct ? u : 1.0 - u;
}

std::optional<StreamSeed> SeedManifest::find(std::string_view source) const {
    for (const auto& [name, seed] : entries) {
        if (name == source) return seed;
    }
    return std::nullopt;
}

std::string SeedManifest::to_text() const {
    std::ostringstream out;
    out << "# desvar seed manifest\n";
    out << "generator_id=" << generator_id << '\n';
    out << "scenario=" << to_string(scenario) << '\n';
    out << "replication=" << replication << '\n';
    out << "mode=" << to_string(mode) << '\n';
    out << "sharing=" << (sharing == SeedSharing::shared ? "shared" : "dedicated") << '\n';
    out << "---\n";
    for (const auto& [name, seed] : entries) out << name << '=' << seed.value << '\n';
    return out.str();
}

SeedManifest SeedManifest::from_text(std::string_view text) {
    SeedManifest m;
    m.generator_id.clear();
    bool in_entries = false;
    bool saw_generator = false;
    std::set<std::string, std::less<>> seen;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty() || line.front() == '#') continue;
        if (line == "---") {
            in_entries = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("manifest: expected key=value, got '" + std::string(line) + "'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (in_entries) {
            check_source_name(key);
            if (!seen.insert(std::string(key)).second) {
                throw ValidationError("manifest conflict: duplicate source '" + std::string(key) + "'");
            }
            m.entries.emplace_back(std::string(key), StreamSeed{parse_int<std::uint64_t>(value, "seed")});
        } else if (key == "generator_id") {
            m.generator_id = std::string(value);
            saw_generator = true;
        } else if (key == "scenario") {
            m.scenario = parse_scenario(value);
        } else if (key == "replication") {
            m.replication = parse_int<std::int64_t>(value, "replication");
        } else if (key == "mode") {
            if (value == "direct") m.mode = StreamMode::direct;
            else if (value == "antithetic") m.mode = StreamMode::antithetic;
            else throw ValidationError("manifest: bad mode '" + std::string(value) + "'");
        } else if (key == "sharing") {
            if (value == "shared") m.sharing = SeedSharing::shared;
            else if (value == "dedicated") m.sharing = SeedSharing::dedicated;
            else throw ValidationError("manifest: bad sharing '" + std::string(value) + "'");
        } else {
            throw ValidationError("manifest: unknown header key '" + std::string(key) + "'");
        }
    }
    if (!saw_generator) throw ValidationError("manifest: missing generator_id header");
    return m;
}

StreamSeed derive_seed(StreamSeed base_seed, std::string_view scenario_tag,
                       std::string_view source, std::int64_t replication) {
    std::uint64_t h = RandomStream::mix64(base_seed.value + kGolden);
    h = RandomStream::mix64(h ^ fnv1a(scenario_tag));
    h = RandomStream::mix64(h ^ fnv1a(source));
    h = RandomStream::mix64(h ^ (static_cast<std::uint64_t>(replication) + 1) * kGolden);
    return StreamSeed{h};
}

SeedManifest manifest_for_scenario(std::span<const std::string> sources, Scenario scenario,
                                   StreamSeed base_seed, std::int64_t replication) {
    if (sources.empty()) throw ValidationError("manifest: no randomness sources");
    if (replication < 0) throw ValidationError("manifest: negative replication index");

    SeedManifest m;
    m.scenario = scenario;
    m.replication = replication;
    m.sharing = scenario == Scenario::base ? SeedSharing::shared : SeedSharing::dedicated;
    m.mode = (scenario == Scenario::av && replication % 2 == 1) ? StreamMode::antithetic
                                                                : StreamMode::direct;
    const std::int64_t seed_index = scenario == Scenario::av ? replication - replication % 2 : replication;
    const std::string tag{to_string(scenario)};
    const StreamSeed shared = derive_seed(base_seed, tag, "*shared*", seed_index);

    std::set<std::string_view> names;
    std::set<std::uint64_t> seeds;
    for (const auto& source : sources) {
        check_source_name(source);
        if (!names.insert(source).second) {
            throw ValidationError("manifest conflict: duplicate source '" + source + "'");
        }
        const StreamSeed seed = m.sharing == SeedSharing::shared
                                    ? shared
                                    : derive_seed(base_seed, tag, source, seed_index);
        if (m.sharing == SeedSharing::dedicated && !seeds.insert(seed.value).second) {
            throw ValidationError("manifest conflict: seed collision at source '" + source + "'");
        }
        m.entries.emplace_back(source, seed);
    }
    return m;
}

}  // namespace desvar
