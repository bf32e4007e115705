#include "mdq/bitstream.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace mdq {

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) os.put(char((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        int c = is.get();
        if (c < 0) throw std::runtime_error("stream dump: truncated");
        v |= std::uint64_t(c) << (8 * i);
    }
    return v;
}

void put_varint(std::ostream& os, std::uint64_t v) {
    while (v >= 0x80) {
        os.put(char((v & 0x7F) | 0x80));
        v >>= 7;
    }
    os.put(char(v));
}

std::uint64_t get_varint(std::istream& is) {
    std::uint64_t v = 0;
    int shift = 0;
    for (;;) {
        int c = is.get();
        if (c < 0) throw std::runtime_error("stream dump: truncated varint");
        v |= std::uint64_t(c & 0x7F) << shift;
        if (!(c & 0x80)) return v;
        shift += 7;
        if (shift > 63) throw std::runtime_error("stream dump: varint overflow");
    }
}

constexpr char kMagic[4] = {'M', 'D', 'Q', '1'};

} // namespace

std::uint64_t zigzag(std::int64_t v) { return (std::uint64_t(v) << 1) ^ std::uint64_t(v >> 63); }
std::int64_t unzigzag(std::uint64_t v) { return std::int64_t(v >> 1) ^ -std::int64_t(v & 1); }

void write_stream_dump(std::ostream& os, const StreamDump& d) {
    os.write(kMagic, 4);
    os.put(char(d.kind));
    os.put(char(d.dim & 0xFF));
    os.put(char((d.dim >> 8) & 0xFF));
    put_u64(os, d.seed);
    put_u64(os, d.params_fingerprint);
    put_u64(os, d.samples);
    os.put(char(d.stage_indices.size()));
    for (const auto& stage : d.stage_indices) {
        put_u64(os, stage.size());
        for (std::int64_t v : stage) put_varint(os, zigzag(v));
    }
}

StreamDump read_stream_dump(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (is.gcount() != 4 || magic[0] != 'M' || magic[1] != 'D' || magic[2] != 'Q' || magic[3] != '1')
        throw std::runtime_error("stream dump: bad magic");
    StreamDump d;
    d.kind = std::uint8_t(is.get());
    d.dim = std::uint16_t(is.get());
    d.dim |= std::uint16_t(is.get()) << 8;
    d.seed = get_u64(is);
    d.params_fingerprint = get_u64(is);
    d.samples = get_u64(is);
    const int stages = is.get();
    if (stages < 0 || stages > 8) throw std::runtime_error("stream dump: bad stage count");
    d.stage_indices.resize(std::size_t(stages));
    for (auto& stage : d.stage_indices) {
        stage.resize(get_u64(is));
        for (auto& v : stage) v = unzigzag(get_varint(is));
    }
    return d;
}

RangeEncoder::RangeEncoder(std::vector<std::uint8_t>& out) : out_(out) {}

void RangeEncoder::shift_low() {
    if (std::uint32_t(low_) < 0xFF000000u || (low_ >> 32) != 0) {
        std::uint8_t carry = std::uint8_t(low_ >> 32);
        std::uint8_t temp = cache_;
        do {
            out_.push_back(std::uint8_t(temp + carry));
            temp = 0xFF;
        } while (--cache_size_ != 0);
        cache_ = std::uint8_t(low_ >> 24);
    }
    ++cache_size_;
    low_ = (low_ << 8) & 0xFFFFFFFFull;
}

void RangeEncoder::encode_bit(std::uint16_t& prob, int bit) {
    const std::uint32_t bound = (range_ >> 12) * prob;
    if (bit == 0) {
        range_ = bound;
        prob = std::uint16_t(prob + ((4096 - prob) >> 5));
    } else {
        low_ += bound;
        range_ -= bound;
        prob = std::uint16_t(prob - (prob >> 5));
    }
    while (range_ < (1u << 24)) {
        shift_low();
        range_ <<= 8;
    }
}

void RangeEncoder::flush() {
    for (int i = 0; i < 5; ++i) shift_low();
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> in) : in_(in) {
    for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte(); // first byte is the 0 cache
}

std::uint8_t RangeDecoder::next_byte() { return pos_ < in_.size() ? in_[pos_++] : 0; }

int RangeDecoder::decode_bit(std::uint16_t& prob) {
    const std::uint32_t bound = (range_ >> 12) * prob;
    int bit;
    if (code_ < bound) {
        bit = 0;
        range_ = bound;
        prob = std::uint16_t(prob + ((4096 - prob) >> 5));
    } else {
        bit = 1;
        code_ -= bound;
        range_ -= bound;
        prob = std::uint16_t(prob - (prob >> 5));
    }
    while (range_ < (1u << 24)) {
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
    return bit;
}

IndexStreamCoder::IndexStreamCoder() { reset(); }

void IndexStreamCoder::reset() {
    // two banks: unary length code, payload bit tree; models keyed by
    // (context, bank position, previous bit)
    models_.assign(std::size_t(kContexts) * (2 * kBits) * 2, 2048);
}

std::uint16_t& IndexStreamCoder::model(int ctx, int bit, int path_bit) {
    return models_[(std::size_t(ctx) * (2 * kBits) + std::size_t(bit)) * 2 + std::size_t(path_bit)];
}

std::vector<std::uint8_t> IndexStreamCoder::encode(std::span<const std::int64_t> indices,
                                                   std::span<const double> dither_unit) {
    if (indices.size() != dither_unit.size())
        throw std::invalid_argument("index coder: length mismatch");
    reset();
    std::vector<std::uint8_t> out;
    RangeEncoder enc(out);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const int ctx = std::min(kContexts - 1, std::max(0, int(dither_unit[i] * kContexts)));
        const std::uint64_t z = zigzag(indices[i]);
        if (z >= (1ull << (kBits - 1))) throw std::invalid_argument("index coder: index too large");
        // Elias-gamma style: unary bit length, then the payload below the top bit
        int nbits = 0;
        while ((z >> nbits) != 0) ++nbits;
        for (int b = 0; b < nbits; ++b) enc.encode_bit(model(ctx, b, b > 0), 1);
        enc.encode_bit(model(ctx, nbits, nbits > 0), 0);
        int prev = 1;
        for (int b = nbits - 2; b >= 0; --b) {
            const int bit = int((z >> b) & 1);
            enc.encode_bit(model(ctx, kBits + b, prev), bit);
            prev = bit;
        }
    }
    enc.flush();
    return out;
}

std::vector<std::int64_t> IndexStreamCoder::decode(std::span<const std::uint8_t> bytes,
                                                   std::span<const double> dither_unit) {
    reset();
    RangeDecoder dec(bytes);
    std::vector<std::int64_t> out(dither_unit.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int ctx = std::min(kContexts - 1, std::max(0, int(dither_unit[i] * kContexts)));
        int nbits = 0;
        while (nbits < kBits - 1 && dec.decode_bit(model(ctx, nbits, nbits > 0)) == 1) ++nbits;
        std::uint64_t z = 0;
        if (nbits > 0) {
            z = 1ull << (nbits - 1);
            int prev = 1;
            for (int b = nbits - 2; b >= 0; --b) {
                const int bit = dec.decode_bit(model(ctx, kBits + b, prev));
                prev = bit;
                z |= std::uint64_t(bit) << b;
            }
        }
        out[i] = unzigzag(z);
    }
    return out;
}

} // namespace mdq
