#include "ndv/sketch_io.hpp"

#include <cstring>

namespace ndv {

namespace {

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

// Cursor with bounds checking; any read past the end is a decode error.
class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& data) : data_(data) {}

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_++]} << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{data_[pos_++]} << (8 * i);
        return v;
    }
    const std::uint8_t* raw(std::size_t n) {
        need(n);
        const std::uint8_t* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::size_t remaining() const { return data_.size() - pos_; }
    void expect_end() const {
        if (remaining() != 0) throw DecodeError("sketch frame has trailing bytes");
    }

private:
    void need(std::size_t n) const {
        if (remaining() < n) throw DecodeError("sketch frame truncated");
    }
    const std::vector<std::uint8_t>& data_;
    std::size_t pos_ = 0;
};

void check_header(Reader& r, std::uint8_t expected_kind) {
    const std::uint8_t kind = r.u8();
    if (kind != expected_kind) throw DecodeError("unexpected sketch kind tag");
    const std::uint8_t version = r.u8();
    if (version != SketchBytes::kVersion) throw DecodeError("unsupported sketch version");
}

constexpr std::size_t packed_register_bytes(std::size_t m) { return (m * 6 + 7) / 8; }

}  // namespace

SketchBytes to_bytes(const HllSketch& s) {
    SketchBytes out;
    const std::size_t m = s.register_count();
    out.data.reserve(11 + packed_register_bytes(m));
    put_u8(out.data, SketchBytes::kKindHll);
    put_u8(out.data, SketchBytes::kVersion);
    put_u8(out.data, static_cast<std::uint8_t>(s.index_bits()));
    put_u64(out.data, s.hash_seed());
    // 6-bit registers packed little-endian in bit order: register j occupies
    // bits [6j, 6j+6) of the payload bit stream.
    std::vector<std::uint8_t> packed(packed_register_bytes(m), 0);
    const auto& regs = s.registers();
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t bit = 6 * j;
        const std::size_t byte = bit / 8;
        const unsigned shift = bit % 8;
        const std::uint16_t v = static_cast<std::uint16_t>(regs[j]) << shift;
        packed[byte] |= static_cast<std::uint8_t>(v & 0xff);
        if (shift > 2) packed[byte + 1] |= static_cast<std::uint8_t>(v >> 8);
    }
    out.data.insert(out.data.end(), packed.begin(), packed.end());
    return out;
}

HllSketch hll_from_bytes(const SketchBytes& b) {
    Reader r(b.data);
    check_header(r, SketchBytes::kKindHll);
    const int bits = r.u8();
    if (bits < HllSketch::kMinBits || bits > HllSketch::kMaxBits) {
        throw DecodeError("HLL frame: register-index bits out of range");
    }
    const std::uint64_t seed = r.u64();
    const std::size_t m = std::size_t{1} << bits;
    const std::uint8_t* packed = r.raw(packed_register_bytes(m));
    r.expect_end();

    std::vector<std::uint8_t> regs(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t bit = 6 * j;
        const std::size_t byte = bit / 8;
        const unsigned shift = bit % 8;
        std::uint16_t v = packed[byte] >> shift;
        if (shift > 2) v |= static_cast<std::uint16_t>(packed[byte + 1]) << (8 - shift);
        regs[j] = static_cast<std::uint8_t>(v & 0x3f);
    }
    HllSketch s(bits, seed);
    s.load_registers(std::move(regs));
    return s;
}

SketchBytes to_bytes(const CountSketch& s) {
    SketchBytes out;
    out.data.reserve(18 + s.table().size() * 4);
    put_u8(out.data, SketchBytes::kKindCountSketch);
    put_u8(out.data, SketchBytes::kVersion);
    put_u32(out.data, s.depth());
    put_u32(out.data, s.width());
    put_u64(out.data, s.seed());
    for (std::int32_t c : s.table()) put_u32(out.data, static_cast<std::uint32_t>(c));
    return out;
}

CountSketch count_sketch_from_bytes(const SketchBytes& b) {
    Reader r(b.data);
    check_header(r, SketchBytes::kKindCountSketch);
    const std::uint32_t depth = r.u32();
    const std::uint32_t width = r.u32();
    const std::uint64_t seed = r.u64();
    if (depth == 0 || width == 0 || depth > 1024) {
        throw DecodeError("Count Sketch frame: bad shape");
    }
    const std::size_t cells = static_cast<std::size_t>(depth) * width;
    std::vector<std::int32_t> table(cells);
    for (std::size_t i = 0; i < cells; ++i) table[i] = static_cast<std::int32_t>(r.u32());
    r.expect_end();
    CountSketch s(depth, width, seed);
    s.load_table(std::move(table));
    return s;
}

SketchBytes to_bytes(const ExactL0& s) {
    SketchBytes out;
    out.data.reserve(10 + s.elements().size() * 8);
    put_u8(out.data, SketchBytes::kKindExactL0);
    put_u8(out.data, SketchBytes::kVersion);
    put_u64(out.data, s.elements().size());
    for (std::uint64_t id : s.elements()) put_u64(out.data, id);
    return out;
}

ExactL0 exact_l0_from_bytes(const SketchBytes& b) {
    Reader r(b.data);
    check_header(r, SketchBytes::kKindExactL0);
    const std::uint64_t count = r.u64();
    if (count > r.remaining() / 8) throw DecodeError("exact-set frame truncated");
    std::set<std::uint64_t> ids;
    for (std::uint64_t i = 0; i < count; ++i) ids.insert(r.u64());
    r.expect_end();
    ExactL0 s;
    s.load_elements(std::move(ids));
    return s;
}

}  // namespace ndv
