#include "ncderp/compressor.hpp"

#include <zlib.h>

#include "ncderp/error.hpp"

namespace ncderp {

namespace {

// One deflate state per thread, reset between calls; initializing a level-9
// stream maps and zeroes several hundred KiB each time.
class DeflateStream {
public:
    DeflateStream() {
        if (deflateInit2(&zs_, Z_BEST_COMPRESSION, Z_DEFLATED, -15, 9, Z_DEFAULT_STRATEGY) != Z_OK)
            throw Error("zlib: deflateInit2 failed");
    }
    ~DeflateStream() { deflateEnd(&zs_); }
    DeflateStream(const DeflateStream&) = delete;
    DeflateStream& operator=(const DeflateStream&) = delete;

    // Compresses into the internal buffer and returns the byte count.
    std::size_t run(std::string_view data) {
        if (deflateReset(&zs_) != Z_OK) throw Error("zlib: deflateReset failed");
        buffer_.resize(deflateBound(&zs_, static_cast<uLong>(data.size())));
        zs_.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
        zs_.avail_in = static_cast<uInt>(data.size());
        zs_.next_out = reinterpret_cast<Bytef*>(buffer_.data());
        zs_.avail_out = static_cast<uInt>(buffer_.size());
        if (deflate(&zs_, Z_FINISH) != Z_STREAM_END) throw Error("zlib: deflate did not finish");
        return zs_.total_out;
    }

    const std::string& buffer() const { return buffer_; }

private:
    z_stream zs_{};
    std::string buffer_;
};

DeflateStream& thread_stream() {
    thread_local DeflateStream stream;
    return stream;
}

}  // namespace

std::string DeflateCompressor::compress(std::string_view data) const {
    auto& stream = thread_stream();
    return stream.buffer().substr(0, stream.run(data));
}

std::size_t DeflateCompressor::compressed_size(std::string_view data) const { return thread_stream().run(data); }

std::size_t BlockSortCompressor::compressed_size(std::string_view data) const { return compress(data).size(); }

std::unique_ptr<Compressor> make_compressor(std::string_view name) {
    if (name == "zlib" || name == "deflate") return std::make_unique<DeflateCompressor>();
    if (name == "bwt" || name == "blocksort") return std::make_unique<BlockSortCompressor>();
    throw Error("unknown compressor '" + std::string(name) + "' (expected zlib or bwt)");
}

std::vector<std::string> compressor_names() { return {"zlib", "bwt"}; }

}  // namespace ncderp
