#include <algorithm>
#include <fstream>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "ncderp/error.hpp"
#include "ncderp/montage.hpp"
#include "ncderp/recording.hpp"

using namespace ncderp;
using testing_support::TempDir;

namespace {

std::string read_all(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

void write_all(const std::filesystem::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << s;
}

Recording tiny_recording() {
    Recording rec;
    rec.sample_rate_hz = 100;
    rec.channels = {{"Cz", 0}, {"Pz", 1}};
    rec.samples = {{0.5f, -1.25f, 2.0f, 0.0f, 3.5f}, {1.0f, 1.0f, -0.75f, 0.125f, 0.0f}};
    rec.events = {{0, 3, true}, {2, 9, false}};
    rec.meta = {{"id", "s1"}, {"note", "a;b=c%d\nnext"}};
    return rec;
}

}  // namespace

TEST_SUITE("recording") {

TEST_CASE("file round trip preserves every field") {
    TempDir dir;
    const Recording rec = tiny_recording();
    write_recording(rec, dir / "r.erp");
    CHECK(read_recording(dir / "r.erp") == rec);
}

TEST_CASE("synthetic recording round trips bit-exactly") {
    TempDir dir;
    SynthesisConfig cfg;
    cfg.n_channels = 3;
    const Recording rec = synthesize(cfg);
    write_recording(rec, dir / "s.erp");
    CHECK(read_recording(dir / "s.erp") == rec);
}

TEST_CASE("synthesis is seeded") {
    SynthesisConfig cfg;
    cfg.n_channels = 2;
    CHECK(synthesize(cfg) == synthesize(cfg));
    SynthesisConfig other = cfg;
    other.rng_seed = cfg.rng_seed + 1;
    CHECK_FALSE(synthesize(cfg) == synthesize(other));
}

TEST_CASE("speller layout: every trial flashes all 12 codes, one row and one column are targets") {
    SynthesisConfig cfg;
    cfg.n_characters = 3;
    cfg.repeats_per_character = 5;
    const Recording rec = synthesize(cfg);
    REQUIRE(rec.events.size() == 3u * 5u * 12u);
    for (int ch = 0; ch < 3; ++ch) {
        std::set<int> target_codes;
        for (int t = 0; t < 5; ++t) {
            std::set<int> codes;
            int targets = 0;
            for (int k = 0; k < 12; ++k) {
                const auto& e = rec.events[static_cast<std::size_t>((ch * 5 + t) * 12 + k)];
                codes.insert(e.stimulus_code);
                if (e.is_target) {
                    ++targets;
                    target_codes.insert(e.stimulus_code);
                }
            }
            CHECK(codes.size() == 12);
            CHECK(targets == 2);
        }
        REQUIRE(target_codes.size() == 2);
        CHECK(*target_codes.begin() <= 6);
        CHECK(*target_codes.rbegin() >= 7);
    }
}

TEST_CASE("target windows carry the Gaussian pulse at the configured latency") {
    SynthesisConfig cfg;
    cfg.n_characters = 2;
    cfg.snr = 1000.0;
    cfg.noise_sd = 0.001;  // pulse amplitude 1, noise negligible
    cfg.channel_gain = {1.0};
    const Recording rec = synthesize(cfg);
    const std::size_t peak = static_cast<std::size_t>(0.3 * rec.sample_rate_hz);
    const double sigma_samples = 0.1 / 2.3548 * rec.sample_rate_hz;
    for (const auto& e : rec.events) {
        const auto& x = rec.samples[0];
        const std::size_t s = static_cast<std::size_t>(e.sample_index);
        if (e.is_target) {
            CHECK(x[s + peak] == doctest::Approx(1.0).epsilon(0.02));
            // Half maximum lies about one half-width from the peak.
            const double half = x[s + peak + static_cast<std::size_t>(std::lround(1.1774 * sigma_samples))];
            CHECK(half == doctest::Approx(0.5).epsilon(0.1));
        } else {
            CHECK(std::abs(x[s + peak]) < 0.01);
        }
    }
}

TEST_CASE("channel gains scale the pulse per channel") {
    SynthesisConfig cfg;
    cfg.n_channels = 3;
    cfg.snr = 1000.0;
    cfg.noise_sd = 0.001;
    cfg.channel_gain = {1.0, 0.5, 0.0};
    const Recording rec = synthesize(cfg);
    const auto& e = *std::find_if(rec.events.begin(), rec.events.end(), [](auto& ev) { return ev.is_target; });
    const std::size_t at = static_cast<std::size_t>(e.sample_index) + 72;
    CHECK(rec.samples[0][at] == doctest::Approx(1.0).epsilon(0.02));
    CHECK(rec.samples[1][at] == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(rec.samples[2][at]) < 0.01);
}

TEST_CASE("default channel names start at the vertex") {
    SynthesisConfig cfg;
    cfg.n_channels = 4;
    const Recording rec = synthesize(cfg);
    CHECK(rec.channels[0].name == "Cz");
    CHECK(rec.channels[3].index == 3);
}

TEST_CASE("synthesis parameters are validated") {
    SynthesisConfig cfg;
    cfg.p300_latency_ms = 550;
    cfg.p300_width_ms = 100;
    CHECK_THROWS_AS(validate(cfg), Error);
    cfg = {};
    cfg.n_channels = 2;
    cfg.channel_gain = {1.0, 1.5};
    CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("[0, 1]"), Error);
    cfg = {};
    cfg.channel_gain = {1.0, 1.0};
    CHECK_THROWS_AS(validate(cfg), Error);
}

TEST_CASE("malformed files report a location") {
    TempDir dir;
    write_recording(tiny_recording(), dir / "ok.erp");
    const std::string good = read_all(dir / "ok.erp");

    SUBCASE("bad magic") {
        write_all(dir / "bad.erp", "XXXREC" + good.substr(6));
        CHECK_THROWS_WITH_AS(read_recording(dir / "bad.erp"), doctest::Contains("bad.erp:1"), Error);
    }
    SUBCASE("event beyond the samples") {
        std::string text = good;
        const auto pos = text.find("\n2,9,0\n");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 7, "\n7,9,0\n");
        write_all(dir / "bad.erp", text);
        CHECK_THROWS_WITH_AS(read_recording(dir / "bad.erp"), doctest::Contains("event out of range"), Error);
    }
    SUBCASE("truncated sample block") {
        write_all(dir / "bad.erp", good.substr(0, good.size() - 3));
        CHECK_THROWS_AS(read_recording(dir / "bad.erp"), Error);
    }
    SUBCASE("missing separator") {
        std::string text = good;
        text.replace(text.find("---"), 3, "+++");
        write_all(dir / "bad.erp", text);
        CHECK_THROWS_WITH_AS(read_recording(dir / "bad.erp"), doctest::Contains("separator"), Error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_recording(dir / "nope.erp"), Error);
    }
}

TEST_CASE("validate rejects inconsistent recordings") {
    Recording rec = tiny_recording();
    rec.samples[1].pop_back();
    CHECK_THROWS_AS(validate(rec), Error);
    rec = tiny_recording();
    rec.events[1].sample_index = 0;
    CHECK_THROWS_AS(validate(rec), Error);
    rec = tiny_recording();
    rec.channels[1].name = "Cz";
    CHECK_THROWS_AS(validate(rec), Error);
}

TEST_CASE("bundled montage covers 64 electrodes, the inferior ring just outside the unit circle") {
    const auto& m = standard_montage();
    REQUIRE(m.size() == 64);
    for (const auto& e : m) {
        const double r = std::hypot(e.x, e.y);
        const bool inferior = e.name == "T9" || e.name == "T10" || e.name == "Iz";
        CHECK(r <= (inferior ? 1.125 : 1.0) + 1e-4);
    }
    CHECK(find_electrode(m, "cz").x == doctest::Approx(0.0));
    CHECK(find_electrode(m, "T7").x == doctest::Approx(-1.0));
    CHECK_THROWS_WITH_AS(find_electrode(m, "Xx9"), doctest::Contains("unknown electrode"), Error);
}

}  // TEST_SUITE
