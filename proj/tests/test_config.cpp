#include "doctest.h"

#include "ncderp/config.hpp"
#include "ncderp/error.hpp"
#include "ncderp/harness.hpp"

using namespace ncderp;

TEST_SUITE("config") {

TEST_CASE("scalar, list and section parsing") {
    const auto kv = KeyValueConfig::parse(R"(
# comment line
name = "Cz # not a comment"   # trailing comment
count = 1_000
ratio = 2.5e-1
flag = true
names = ["a", "b,c",
         "d"]
gains = [1, 0.5]
[search]
seed = 7
)");
    CHECK(kv.get_string("name", "") == "Cz # not a comment");
    CHECK(kv.get_int("count", 0) == 1000);
    CHECK(kv.get_real("ratio", 0) == 0.25);
    CHECK(kv.get_real("count", 0) == 1000.0);
    CHECK(kv.get_bool("flag", false));
    CHECK(kv.get_strings("names") == std::vector<std::string>{"a", "b,c", "d"});
    CHECK(kv.get_reals("gains") == std::vector<double>{1.0, 0.5});
    CHECK(kv.get_int("search.seed", 0) == 7);
    CHECK(kv.get_int("missing", 42) == 42);
}

TEST_CASE("type and syntax errors carry the origin") {
    CHECK_THROWS_WITH_AS(KeyValueConfig::parse("a = bare words", "x.toml"), doctest::Contains("x.toml:1"), Error);
    CHECK_THROWS_WITH_AS(KeyValueConfig::parse("a = 1\na = 2", "x.toml"), doctest::Contains("duplicate"), Error);
    CHECK_THROWS_AS(KeyValueConfig::parse("a = [1, 2"), Error);
    CHECK_THROWS_AS(KeyValueConfig::parse("just text"), Error);
    const auto kv = KeyValueConfig::parse("a = \"s\"\nb = [1]");
    CHECK_THROWS_AS(kv.get_int("a", 0), Error);
    CHECK_THROWS_AS(kv.get_int("b", 0), Error);
    CHECK_THROWS_AS(kv.get_strings("b"), Error);
}

TEST_CASE("experiment schema") {
    const auto cfg = experiment_config_from(KeyValueConfig::parse(R"(
recordings = ["a.erp", "/abs/b.erp"]
electrodes = ["Cz", "Pz"]
m = 4
c = 6
m_max = 10
repeats = 3
objects_per_run = 10
compressor = "bwt"
seed = 99
tree_budget = 300
low_cut = 1.0
filter_mode = "forward"
output = "out"
)"),
                                            "/base");
    CHECK(cfg.recordings == std::vector<std::filesystem::path>{"/base/a.erp", "/abs/b.erp"});
    CHECK(cfg.electrodes == std::vector<std::string>{"Cz", "Pz"});
    CHECK(cfg.m_means == 4);
    CHECK(cfg.c_concats == 6);
    CHECK(cfg.m_max == 10);
    CHECK(cfg.c_max == 14);
    CHECK(cfg.repeats == 3);
    CHECK(cfg.compressor == "bwt");
    CHECK(cfg.seed == 99);
    CHECK(cfg.tree_max_rejections == 300);
    CHECK(cfg.filter.low_cut_hz == 1.0);
    CHECK(cfg.filter.mode == FilterMode::forward);
    CHECK(cfg.output_dir == "/base/out");
}

TEST_CASE("experiment schema rejects bad values") {
    auto parse = [](const std::string& text) { return experiment_config_from(KeyValueConfig::parse(text)); };
    CHECK_THROWS_WITH_AS(parse("colour = 1"), doctest::Contains("unknown key 'colour'"), Error);
    CHECK_THROWS_AS(parse("m_max = 15"), Error);
    CHECK_THROWS_AS(parse("m_min = 5\nm_max = 4"), Error);
    CHECK_THROWS_AS(parse("repeats = 0"), Error);
    CHECK_THROWS_AS(parse("objects_per_run = 7"), Error);
    CHECK_THROWS_AS(parse("compressor = \"lzma\""), Error);
    CHECK_THROWS_AS(parse("top_k = 8"), Error);
    CHECK_THROWS_AS(parse("filter_mode = \"sideways\""), Error);
}

TEST_CASE("synthesis schema") {
    const auto s = synthesis_config_from(KeyValueConfig::parse(
        "n_channels = 3\nchannel_gain = [1.0, 0.3, 0.05]\nchannel_names = [\"Cz\", \"Pz\", \"Oz\"]\nsnr = 2\nseed = 4"));
    CHECK(s.n_channels == 3);
    CHECK(s.channel_gain == std::vector<double>{1.0, 0.3, 0.05});
    CHECK(s.channel_names[2] == "Oz");
    CHECK(s.snr == 2.0);
    CHECK(s.rng_seed == 4);
    CHECK_THROWS_AS(synthesis_config_from(KeyValueConfig::parse("n_channels = 2\nchannel_gain = [1.0]")), Error);
    CHECK_THROWS_AS(synthesis_config_from(KeyValueConfig::parse("speed = 2")), Error);
}

}  // TEST_SUITE
