#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace mdq {

// Stream dump: header + per-stage zigzag LEB128 indices, little endian.
struct StreamDump {
    std::uint8_t kind = 0;
    std::uint16_t dim = 1;
    std::uint64_t seed = 0;
    std::uint64_t params_fingerprint = 0;
    std::uint64_t samples = 0;
    std::vector<std::vector<std::int64_t>> stage_indices;
};

void write_stream_dump(std::ostream& os, const StreamDump& d);
StreamDump read_stream_dump(std::istream& is);

std::uint64_t zigzag(std::int64_t v);
std::int64_t unzigzag(std::uint64_t v);

// Adaptive binary range coder (carryless, 32-bit). Demonstration-quality
// entropy coding of index streams with the dither bin as context; the
// acceptance path uses the plug-in entropy estimator instead.
class RangeEncoder {
public:
    explicit RangeEncoder(std::vector<std::uint8_t>& out);
    void encode_bit(std::uint16_t& prob, int bit); // prob = P(0) in 1/4096 units
    void flush();

private:
    std::vector<std::uint8_t>& out_;
    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t cache_size_ = 1;
    void shift_low();
};

class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const std::uint8_t> in);
    int decode_bit(std::uint16_t& prob);

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu, code_ = 0;
    std::uint8_t next_byte();
};

// Context-adaptive coder for one index stream: bit-tree over the zigzag
// value, contexts keyed by (dither bin >> 3, bit position).
class IndexStreamCoder {
public:
    IndexStreamCoder();
    std::vector<std::uint8_t> encode(std::span<const std::int64_t> indices,
                                     std::span<const double> dither_unit);
    std::vector<std::int64_t> decode(std::span<const std::uint8_t> bytes,
                                     std::span<const double> dither_unit);

private:
    static constexpr int kContexts = 8;
    static constexpr int kBits = 40; // clamped index magnitude < 2^39
    std::vector<std::uint16_t> models_;
    std::uint16_t& model(int ctx, int bit, int path_bit);
    void reset();
};

} // namespace mdq
