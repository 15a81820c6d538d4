#include <desvar/error.hpp>
#include <desvar/rng.hpp>

#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

using namespace desvar;

namespace {

// Straight transcription of the published SplitMix64 reference, kept apart
// from the library so the two can disagree.
struct ReferenceSplitMix {
    std::uint64_t x;
    std::uint64_t next() {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

double reference_uniform(std::uint64_t raw) {
    std::uint64_t k = raw >> 11;
    if (k == 0) k = 1;
    return std::ldexp(static_cast<double>(k), -53);
}

const std::vector<std::string> kSources{"arrivals", "service.a", "service.b"};

}  // namespace

TEST_CASE("matches the SplitMix64 reference draws") {
    ReferenceSplitMix ref{1234567};
    CHECK(ref.next() == 6457827717110365317ULL);
    CHECK(ref.next() == 3203168211198807973ULL);

    for (std::uint64_t seed : {0ULL, 42ULL, 43ULL, 0xdeadbeefULL}) {
        ReferenceSplitMix r{seed};
        RandomStream s(StreamSeed{seed});
        for (int i = 0; i < 100; ++i) CHECK(s.next_uniform() == reference_uniform(r.next()));
    }
}

TEST_CASE("same seed replays, neighbouring seeds differ") {
    RandomStream a(StreamSeed{42});
    RandomStream b(StreamSeed{42});
    for (int i = 0; i < 5; ++i) CHECK(a.next_uniform() == b.next_uniform());

    ReferenceSplitMix r42{42}, r43{43};
    const double u42 = reference_uniform(r42.next());
    const double u43 = reference_uniform(r43.next());
    REQUIRE(u42 != u43);
    CHECK(RandomStream(StreamSeed{42}).next_uniform() == u42);
    CHECK(RandomStream(StreamSeed{43}).next_uniform() == u43);
}

TEST_CASE("antithetic draws complement the direct ones exactly") {
    RandomStream d(StreamSeed{42});
    RandomStream a(StreamSeed{42}, StreamMode::antithetic);
    for (int i = 0; i < 100000; ++i) {
        const double u = d.next_uniform();
        const double v = a.next_uniform();
        REQUIRE(u + v == 1.0);
    }
    CHECK(a.draw_count() == 100000);
}

TEST_CASE("uniform range, mean and draw counting") {
    RandomStream s(StreamSeed{7});
    double sum = 0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
        const double u = s.next_uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(s.draw_count() == static_cast<std::uint64_t>(n));
    CHECK(std::abs(sum / n - 0.5) < 0.002);
}

TEST_CASE("distinct seeds are close to uncorrelated") {
    RandomStream a(derive_seed(StreamSeed{1}, "crn", "x", 0));
    RandomStream b(derive_seed(StreamSeed{1}, "crn", "y", 0));
    const int n = 100000;
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < n; ++i) {
        const double u = a.next_uniform(), v = b.next_uniform();
        sa += u; sb += v; sab += u * v; saa += u * u; sbb += v * v;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    CHECK(std::abs(corr) < 0.02);
}

TEST_CASE("CRN manifest: one distinct seed per source, stable") {
    const auto m = manifest_for_scenario(kSources, Scenario::crn, StreamSeed{2010}, 0);
    CHECK(m.sharing == SeedSharing::dedicated);
    CHECK(m.mode == StreamMode::direct);
    REQUIRE(m.entries.size() == 3);
    std::set<std::uint64_t> seeds;
    for (const auto& [_, s] : m.entries) seeds.insert(s.value);
    CHECK(seeds.size() == 3);
    CHECK(m == manifest_for_scenario(kSources, Scenario::crn, StreamSeed{2010}, 0));
    CHECK(m.entries[0].first == "arrivals");
}

TEST_CASE("Base manifest shares one stream") {
    const auto m = manifest_for_scenario(kSources, Scenario::base, StreamSeed{2010}, 0);
    CHECK(m.sharing == SeedSharing::shared);
    for (const auto& [_, s] : m.entries) CHECK(s == m.entries.front().second);
    CHECK(m.entries.front().second != manifest_for_scenario(kSources, Scenario::base, StreamSeed{2010}, 1).entries.front().second);
}

TEST_CASE("AV pairs differ only in mode") {
    for (int k = 0; k < 5; ++k) {
        auto even = manifest_for_scenario(kSources, Scenario::av, StreamSeed{9}, 2 * k);
        auto odd = manifest_for_scenario(kSources, Scenario::av, StreamSeed{9}, 2 * k + 1);
        CHECK(even.mode == StreamMode::direct);
        CHECK(odd.mode == StreamMode::antithetic);
        CHECK(even.entries == odd.entries);
        CHECK(odd.replication == 2 * k + 1);
    }
    CHECK(manifest_for_scenario(kSources, Scenario::av, StreamSeed{9}, 0).entries !=
          manifest_for_scenario(kSources, Scenario::av, StreamSeed{9}, 2).entries);
}

TEST_CASE("scenario seed spaces are disjoint") {
    std::set<std::uint64_t> all;
    std::size_t total = 0;
    for (auto sc : {Scenario::base, Scenario::crn, Scenario::av, Scenario::cv}) {
        std::set<std::uint64_t> group;
        for (int r = 0; r < 10; ++r) {
            for (const auto& [_, s] : manifest_for_scenario(kSources, sc, StreamSeed{2010}, r).entries) group.insert(s.value);
        }
        total += group.size();
        all.insert(group.begin(), group.end());
    }
    CHECK(all.size() == total);
}

TEST_CASE("manifest errors") {
    const std::vector<std::string> dup{"arrivals", "arrivals"};
    CHECK_THROWS_WITH_AS(manifest_for_scenario(dup, Scenario::crn, StreamSeed{1}, 0),
                         doctest::Contains("manifest conflict"), ValidationError);
    CHECK_THROWS_AS(manifest_for_scenario(std::vector<std::string>{}, Scenario::crn, StreamSeed{1}, 0), ValidationError);
    CHECK_THROWS_AS(manifest_for_scenario(kSources, Scenario::crn, StreamSeed{1}, -1), ValidationError);
}

TEST_CASE("manifest text round trip") {
    for (auto sc : {Scenario::base, Scenario::crn, Scenario::av, Scenario::cv}) {
        for (int r = 0; r < 4; ++r) {
            const auto m = manifest_for_scenario(kSources, sc, StreamSeed{77}, r);
            const auto text = m.to_text();
            const auto back = SeedManifest::from_text(text);
            CHECK(back == m);
            CHECK(back.to_text() == text);
        }
    }
    CHECK_THROWS_AS(SeedManifest::from_text("garbage"), ValidationError);
}

TEST_CASE("scenario names") {
    CHECK(to_string(Scenario::cv) == "CV");
    CHECK(parse_scenario("AV") == Scenario::av);
    CHECK_THROWS_AS(parse_scenario("XYZ"), ValidationError);
}
