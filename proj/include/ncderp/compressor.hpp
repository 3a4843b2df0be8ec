#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ncderp {

/// Lossless compressor as seen by the distance computation: only the size of
/// the compressed representation matters. Implementations are stateless, so a
/// single instance may be shared across threads.
class Compressor {
public:
    virtual ~Compressor() = default;
    virtual std::string name() const = 0;
    virtual std::size_t compressed_size(std::string_view data) const = 0;
};

/// zlib deflate at level 9, measured as a raw stream (no zlib/gzip wrapper).
class DeflateCompressor final : public Compressor {
public:
    std::string name() const override { return "zlib"; }
    std::size_t compressed_size(std::string_view data) const override;
    std::string compress(std::string_view data) const;
};

/// Block-sorting compressor: Burrows-Wheeler transform, move-to-front,
/// zero-run coding and an adaptive order-0 arithmetic coder.
class BlockSortCompressor final : public Compressor {
public:
    static constexpr std::size_t kBlockSize = 900000;

    std::string name() const override { return "bwt"; }
    std::size_t compressed_size(std::string_view data) const override;
    std::string compress(std::string_view data) const;
    std::string decompress(std::string_view packed) const;
};

/// "zlib" (alias "deflate", the default) or "bwt" (alias "blocksort").
std::unique_ptr<Compressor> make_compressor(std::string_view name);
std::vector<std::string> compressor_names();

namespace blocksort {

/// Transform of `block` followed by an implicit unique smallest sentinel.
/// Returns the last column without the sentinel; `primary` receives the row
/// holding the sentinel.
std::string bwt_forward(std::string_view block, std::uint32_t& primary);
std::string bwt_inverse(std::string_view last_column, std::uint32_t primary);

}  // namespace blocksort

}  // namespace ncderp
