#include <algorithm>
#include <random>

#include <zlib.h>

#include "doctest.h"

#include "ncderp/compressor.hpp"
#include "ncderp/error.hpp"

using namespace ncderp;

namespace {

std::string random_text(std::size_t n, int alphabet, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(0, alphabet - 1);
    std::string s(n, '\0');
    for (auto& c : s) c = static_cast<char>('!' + d(rng));
    return s;
}

// Sorts every rotation of s + sentinel, sentinel smallest.
std::string naive_bwt(const std::string& s, std::uint32_t& primary) {
    const std::size_t n = s.size() + 1;
    std::vector<int> t(n);
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = static_cast<unsigned char>(s[i]);
    t[n - 1] = -1;
    std::vector<std::size_t> rot(n);
    for (std::size_t i = 0; i < n; ++i) rot[i] = i;
    std::sort(rot.begin(), rot.end(), [&](std::size_t a, std::size_t b) {
        for (std::size_t k = 0; k < n; ++k) {
            const int x = t[(a + k) % n], y = t[(b + k) % n];
            if (x != y) return x < y;
        }
        return false;
    });
    std::string last;
    for (std::size_t r = 0; r < n; ++r) {
        const int c = t[(rot[r] + n - 1) % n];
        if (c < 0) primary = static_cast<std::uint32_t>(r);
        else last += static_cast<char>(c);
    }
    return last;
}

std::string inflate_raw(const std::string& packed) {
    z_stream zs{};
    REQUIRE(inflateInit2(&zs, -15) == Z_OK);
    std::string out(1 << 20, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(packed.data()));
    zs.avail_in = static_cast<uInt>(packed.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    inflateEnd(&zs);
    REQUIRE(rc == Z_STREAM_END);
    return out;
}

}  // namespace

TEST_SUITE("compressor") {

TEST_CASE("block-sorting transform matches naive rotation sorting") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 60;
        const std::string s = random_text(n, 1 + static_cast<int>(rng() % 4), rng);
        std::uint32_t p1 = 0, p2 = 0;
        const std::string fast = blocksort::bwt_forward(s, p1);
        CHECK(fast == naive_bwt(s, p2));
        CHECK(p1 == p2);
        CHECK(blocksort::bwt_inverse(fast, p1) == s);
    }
}

TEST_CASE("block-sorting compressor round trips") {
    const BlockSortCompressor c;
    std::mt19937_64 rng(3);
    std::vector<std::string> inputs = {"a", "abracadabra", std::string(5000, 'x'), std::string(1, '\0')};
    for (int i = 0; i < 30; ++i) inputs.push_back(random_text(1 + rng() % 5000, 1 + static_cast<int>(rng() % 90), rng));
    std::string binary(3000, '\0');
    for (auto& ch : binary) ch = static_cast<char>(rng());
    inputs.push_back(binary);
    for (const auto& s : inputs) {
        const std::string packed = c.compress(s);
        CHECK(packed.size() == c.compressed_size(s));
        CHECK(c.decompress(packed) == s);
    }
    CHECK(c.decompress(c.compress("")) == "");
}

TEST_CASE("block-sorting compressor spans several blocks") {
    const BlockSortCompressor c;
    std::mt19937_64 rng(5);
    const std::string big = random_text(BlockSortCompressor::kBlockSize + 12345, 8, rng);
    CHECK(c.decompress(c.compress(big)) == big);
}

TEST_CASE("redundant input compresses well") {
    for (const auto& name : compressor_names()) {
        const auto c = make_compressor(name);
        std::mt19937_64 rng(1);
        const std::string noise = random_text(4000, 64, rng);
        CHECK(c->compressed_size(std::string(4000, 'A')) < 100);
        CHECK(c->compressed_size(noise + noise) < c->compressed_size(noise) * 1.2);
        CHECK(c->compressed_size(noise) > 2800);  // 6 bits of entropy per byte
    }
}

TEST_CASE("deflate output is a raw stream that inflates back") {
    const DeflateCompressor c;
    const std::string text = "P300 P300 P300 nonP300 0123456789";
    const std::string packed = c.compress(text);
    CHECK(packed.size() == c.compressed_size(text));
    CHECK(inflate_raw(packed) == text);
}

TEST_CASE("compressor registry") {
    CHECK(make_compressor("zlib")->name() == "zlib");
    CHECK(make_compressor("deflate")->name() == "zlib");
    CHECK(make_compressor("bwt")->name() == "bwt");
    CHECK(make_compressor("blocksort")->name() == "bwt");
    CHECK_THROWS_WITH_AS(make_compressor("lzma"), doctest::Contains("unknown compressor"), Error);
}

TEST_CASE("corrupt block-sorted data is rejected") {
    const BlockSortCompressor c;
    std::string packed = c.compress("hello world hello world");
    CHECK_THROWS_AS(c.decompress(packed.substr(0, 1)), Error);
}

}  // TEST_SUITE
