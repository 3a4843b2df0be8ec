#include <algorithm>
#include <array>
#include <bit>
#include <numeric>

#include "ncderp/compressor.hpp"
#include "ncderp/error.hpp"

namespace ncderp {

namespace blocksort {

std::string bwt_forward(std::string_view block, std::uint32_t& primary) {
    const std::size_t n = block.size();
    std::vector<std::uint32_t> sa(n), rank(n), tmp(n);
    std::iota(sa.begin(), sa.end(), 0u);
    for (std::size_t i = 0; i < n; ++i) rank[i] = static_cast<unsigned char>(block[i]);

    // Prefix doubling over suffixes of block + sentinel; a suffix running off
    // the end compares as smaller (the sentinel).
    for (std::size_t k = 1;; k <<= 1) {
        auto key = [&](std::uint32_t i) -> std::int64_t {
            return i + k < n ? static_cast<std::int64_t>(rank[i + k]) : -1;
        };
        std::sort(sa.begin(), sa.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (rank[a] != rank[b]) return rank[a] < rank[b];
            return key(a) < key(b);
        });
        if (n == 0) break;
        tmp[sa[0]] = 0;
        for (std::size_t i = 1; i < n; ++i) {
            const bool same = rank[sa[i]] == rank[sa[i - 1]] && key(sa[i]) == key(sa[i - 1]);
            tmp[sa[i]] = tmp[sa[i - 1]] + (same ? 0 : 1);
        }
        rank.swap(tmp);
        if (rank[sa[n - 1]] == n - 1 || k >= n) break;
    }

    // Row 0 is the rotation starting at the sentinel; its last char is block[n-1].
    std::string out;
    out.reserve(n);
    if (n > 0) out += block[n - 1];
    primary = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (sa[i] == 0) {
            primary = static_cast<std::uint32_t>(i + 1);
            continue;
        }
        out += block[sa[i] - 1];
    }
    return out;
}

std::string bwt_inverse(std::string_view last_column, std::uint32_t primary) {
    const std::size_t n = last_column.size();
    if (n == 0) return {};
    if (primary == 0 || primary > n) throw Error("bwt: primary index out of range");
    // Full last column has n+1 rows with the sentinel at `primary`.
    auto at = [&](std::size_t row) -> int {
        if (row == primary) return -1;
        return static_cast<unsigned char>(last_column[row < primary ? row : row - 1]);
    };
    std::array<std::uint32_t, 257> first{};  // first row of each byte in the first column
    std::array<std::uint32_t, 256> count{};
    for (char c : last_column) ++count[static_cast<unsigned char>(c)];
    first[0] = 1;
    for (int c = 0; c < 256; ++c) first[c + 1] = first[c] + count[c];

    std::vector<std::uint32_t> lf(n + 1, 0);
    std::array<std::uint32_t, 256> seen{};
    for (std::size_t row = 0; row <= n; ++row) {
        const int c = at(row);
        if (c < 0) continue;
        lf[row] = first[c] + seen[c]++;
    }
    std::string out(n, '\0');
    std::size_t row = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const int c = at(row);
        if (c < 0) throw Error("bwt: corrupt transform");
        out[n - 1 - k] = static_cast<char>(c);
        row = lf[row];
    }
    return out;
}

}  // namespace blocksort

namespace {

constexpr int kRunA = 0;
constexpr int kRunB = 1;
constexpr int kEob = 257;

class AdaptiveModel {
public:
    explicit AdaptiveModel(int symbols) : freq_(static_cast<std::size_t>(symbols), 1), total_(static_cast<std::uint32_t>(symbols)) {}

    std::uint32_t total() const { return total_; }

    void range(int sym, std::uint32_t& lo, std::uint32_t& hi) const {
        lo = 0;
        for (int s = 0; s < sym; ++s) lo += freq_[static_cast<std::size_t>(s)];
        hi = lo + freq_[static_cast<std::size_t>(sym)];
    }

    int find(std::uint32_t target, std::uint32_t& lo, std::uint32_t& hi) const {
        std::uint32_t cum = 0;
        for (std::size_t s = 0; s < freq_.size(); ++s) {
            if (target < cum + freq_[s]) {
                lo = cum;
                hi = cum + freq_[s];
                return static_cast<int>(s);
            }
            cum += freq_[s];
        }
        throw Error("bwt: arithmetic decoder out of range");
    }

    void update(int sym) {
        freq_[static_cast<std::size_t>(sym)] += kIncrement;
        total_ += kIncrement;
        if (total_ > kMaxTotal) {
            total_ = 0;
            for (auto& f : freq_) {
                f = (f + 1) / 2;
                total_ += f;
            }
        }
    }

private:
    static constexpr std::uint32_t kIncrement = 32;
    static constexpr std::uint32_t kMaxTotal = 1u << 13;
    std::vector<std::uint32_t> freq_;
    std::uint32_t total_;
};

constexpr std::uint64_t kTop = 0xFFFFFFFFULL;
constexpr std::uint64_t kHalf = 0x80000000ULL;
constexpr std::uint64_t kQuarter = 0x40000000ULL;

class BitWriter {
public:
    explicit BitWriter(std::string& out) : out_(out) {}
    void put(int bit) {
        acc_ = static_cast<std::uint8_t>((acc_ << 1) | bit);
        if (++fill_ == 8) {
            out_ += static_cast<char>(acc_);
            acc_ = 0;
            fill_ = 0;
        }
    }
    void flush() {
        while (fill_ != 0) put(0);
    }

private:
    std::string& out_;
    std::uint8_t acc_ = 0;
    int fill_ = 0;
};

class ArithmeticEncoder {
public:
    explicit ArithmeticEncoder(std::string& out) : bits_(out) {}

    void encode(std::uint32_t lo, std::uint32_t hi, std::uint32_t total) {
        const std::uint64_t range = high_ - low_ + 1;
        high_ = low_ + range * hi / total - 1;
        low_ = low_ + range * lo / total;
        for (;;) {
            if (high_ < kHalf) {
                emit(0);
            } else if (low_ >= kHalf) {
                emit(1);
                low_ -= kHalf;
                high_ -= kHalf;
            } else if (low_ >= kQuarter && high_ < kHalf + kQuarter) {
                ++pending_;
                low_ -= kQuarter;
                high_ -= kQuarter;
            } else {
                break;
            }
            low_ <<= 1;
            high_ = (high_ << 1) | 1;
        }
    }

    void finish() {
        ++pending_;
        emit(low_ < kQuarter ? 0 : 1);
        bits_.flush();
    }

private:
    void emit(int bit) {
        bits_.put(bit);
        for (; pending_ > 0; --pending_) bits_.put(!bit);
    }

    BitWriter bits_;
    std::uint64_t low_ = 0;
    std::uint64_t high_ = kTop;
    std::uint64_t pending_ = 0;
};

class ArithmeticDecoder {
public:
    explicit ArithmeticDecoder(std::string_view in) : in_(in) {
        for (int i = 0; i < 32; ++i) value_ = (value_ << 1) | next_bit();
    }

    std::uint32_t target(std::uint32_t total) const {
        const std::uint64_t range = high_ - low_ + 1;
        return static_cast<std::uint32_t>(((value_ - low_ + 1) * total - 1) / range);
    }

    void consume(std::uint32_t lo, std::uint32_t hi, std::uint32_t total) {
        const std::uint64_t range = high_ - low_ + 1;
        high_ = low_ + range * hi / total - 1;
        low_ = low_ + range * lo / total;
        for (;;) {
            if (high_ < kHalf) {
            } else if (low_ >= kHalf) {
                low_ -= kHalf;
                high_ -= kHalf;
                value_ -= kHalf;
            } else if (low_ >= kQuarter && high_ < kHalf + kQuarter) {
                low_ -= kQuarter;
                high_ -= kQuarter;
                value_ -= kQuarter;
            } else {
                break;
            }
            low_ <<= 1;
            high_ = (high_ << 1) | 1;
            value_ = (value_ << 1) | next_bit();
        }
    }

private:
    std::uint64_t next_bit() {
        const std::size_t byte = bit_ >> 3;
        const int shift = 7 - static_cast<int>(bit_ & 7);
        ++bit_;
        if (byte >= in_.size()) return 0;
        return (static_cast<unsigned char>(in_[byte]) >> shift) & 1u;
    }

    std::string_view in_;
    std::size_t bit_ = 0;
    std::uint64_t low_ = 0;
    std::uint64_t high_ = kTop;
    std::uint64_t value_ = 0;
};

void put_varint(std::string& out, std::uint64_t v) {
    while (v >= 0x80) {
        out += static_cast<char>((v & 0x7F) | 0x80);
        v >>= 7;
    }
    out += static_cast<char>(v);
}

std::uint64_t get_varint(std::string_view in, std::size_t& pos) {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
        if (pos >= in.size()) throw Error("bwt: truncated header");
        const auto b = static_cast<unsigned char>(in[pos++]);
        v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
        if (!(b & 0x80)) return v;
    }
    throw Error("bwt: malformed varint");
}

// Symbols are split into a magnitude bucket and an offset within the bucket.
// Buckets are coded in one of two contexts: after a zero-run symbol or not.
class RankModel {
public:
    RankModel() {
        buckets_.assign(2, AdaptiveModel(kBuckets));
        for (int b = 0; b < kBuckets; ++b) offsets_.emplace_back(b >= kFirstRank ? 1 << (b - kFirstRank) : 1);
    }

    void encode(int sym, ArithmeticEncoder& enc) {
        int bucket = sym == kRunA ? 0 : sym == kRunB ? 1 : sym == kEob ? 2 : -1;
        int offset = 0;
        if (bucket < 0) {
            const int rank = sym - 1;
            const int k = std::bit_width(static_cast<unsigned>(rank)) - 1;
            bucket = kFirstRank + k;
            offset = rank - (1 << k);
        }
        code(buckets_[static_cast<std::size_t>(context_)], bucket, enc);
        if (bucket >= kFirstRank + 1) code(offsets_[static_cast<std::size_t>(bucket)], offset, enc);
        context_ = bucket < 2 ? 1 : 0;
    }

    int decode(ArithmeticDecoder& dec) {
        const int bucket = take(buckets_[static_cast<std::size_t>(context_)], dec);
        context_ = bucket < 2 ? 1 : 0;
        if (bucket < kFirstRank) return bucket == 0 ? kRunA : bucket == 1 ? kRunB : kEob;
        const int k = bucket - kFirstRank;
        const int offset = k > 0 ? take(offsets_[static_cast<std::size_t>(bucket)], dec) : 0;
        return (1 << k) + offset + 1;
    }

private:
    static constexpr int kFirstRank = 3;
    static constexpr int kBuckets = kFirstRank + 8;

    static void code(AdaptiveModel& m, int sym, ArithmeticEncoder& enc) {
        std::uint32_t lo = 0, hi = 0;
        m.range(sym, lo, hi);
        enc.encode(lo, hi, m.total());
        m.update(sym);
    }

    static int take(AdaptiveModel& m, ArithmeticDecoder& dec) {
        std::uint32_t lo = 0, hi = 0;
        const int sym = m.find(dec.target(m.total()), lo, hi);
        dec.consume(lo, hi, m.total());
        m.update(sym);
        return sym;
    }

    std::vector<AdaptiveModel> buckets_;
    std::vector<AdaptiveModel> offsets_;
    int context_ = 0;
};

// Move-to-front followed by bijective base-2 coding of zero runs.
std::vector<int> mtf_rle(std::string_view column) {
    std::array<std::uint8_t, 256> order{};
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> out;
    std::uint64_t run = 0;
    auto flush_run = [&] {
        while (run > 0) {
            if (run & 1) {
                out.push_back(kRunA);
                run = (run - 1) / 2;
            } else {
                out.push_back(kRunB);
                run = (run - 2) / 2;
            }
        }
    };
    for (char ch : column) {
        const auto c = static_cast<std::uint8_t>(ch);
        const auto it = std::find(order.begin(), order.end(), c);
        const int idx = static_cast<int>(it - order.begin());
        std::rotate(order.begin(), it, it + 1);
        if (idx == 0) {
            ++run;
        } else {
            flush_run();
            out.push_back(idx + 1);
        }
    }
    flush_run();
    return out;
}

}  // namespace

std::string BlockSortCompressor::compress(std::string_view data) const {
    std::string out;
    put_varint(out, data.size());
    std::vector<std::vector<int>> coded;
    for (std::size_t start = 0; start < data.size(); start += kBlockSize) {
        std::uint32_t primary = 0;
        const auto column = blocksort::bwt_forward(data.substr(start, kBlockSize), primary);
        put_varint(out, primary);
        coded.push_back(mtf_rle(column));
    }
    RankModel model;
    ArithmeticEncoder enc(out);
    auto emit = [&](int sym) { model.encode(sym, enc); };
    for (const auto& block : coded) {
        for (int sym : block) emit(sym);
        emit(kEob);
    }
    enc.finish();
    return out;
}

std::string BlockSortCompressor::decompress(std::string_view packed) const {
    std::size_t pos = 0;
    const std::uint64_t total = get_varint(packed, pos);
    const std::size_t n_blocks = (total + kBlockSize - 1) / kBlockSize;
    std::vector<std::uint32_t> primaries;
    for (std::size_t b = 0; b < n_blocks; ++b) primaries.push_back(static_cast<std::uint32_t>(get_varint(packed, pos)));

    RankModel model;
    ArithmeticDecoder dec(packed.substr(pos));
    std::string out;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t block_len = std::min<std::uint64_t>(kBlockSize, total - b * kBlockSize);
        std::string column;
        std::array<std::uint8_t, 256> order{};
        std::iota(order.begin(), order.end(), 0);
        std::uint64_t run = 0;
        int run_bit = 0;
        auto flush_run = [&] {
            column.append(run, static_cast<char>(order[0]));
            run = 0;
            run_bit = 0;
        };
        for (;;) {
            const int sym = model.decode(dec);
            if (sym == kRunA || sym == kRunB) {
                if (run_bit > 40) throw Error("bwt: run too long");
                run += static_cast<std::uint64_t>(sym == kRunA ? 1 : 2) << run_bit++;
                continue;
            }
            flush_run();
            if (sym == kEob) break;
            const int idx = sym - 1;
            const std::uint8_t c = order[idx];
            std::rotate(order.begin(), order.begin() + idx, order.begin() + idx + 1);
            column += static_cast<char>(c);
            if (column.size() > block_len) throw Error("bwt: block overflow");
        }
        if (column.size() != block_len) throw Error("bwt: block length mismatch");
        out += blocksort::bwt_inverse(column, primaries[b]);
    }
    return out;
}

}  // namespace ncderp
