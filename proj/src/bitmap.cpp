#include "bimagelsh/bitmap.hpp"

#include <bit>
#include <string>

#include "bimagelsh/errors.hpp"

namespace bimagelsh {

namespace {

constexpr std::uint8_t kMagic[4] = {'B', 'I', 'M', 'G'};
constexpr std::uint8_t kVersion = 0x01;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

// Returns false on truncation or a varint wider than 32 bits.
bool decode_varint(const std::uint8_t*& pos, const std::uint8_t* end, std::uint32_t& value) {
    std::uint64_t result = 0;
    for (int shift = 0; shift < 35; shift += 7) {
        if (pos == end) return false;
        const std::uint8_t byte = *pos++;
        result |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
        if ((byte & 0x80) == 0) {
            if (result > UINT32_MAX) return false;
            value = static_cast<std::uint32_t>(result);
            return true;
        }
    }
    return false;
}

}  // namespace

void append_varint(std::vector<std::uint8_t>& out, std::uint32_t value) {
    while (value >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(value | 0x80));
        value >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(value));
}

CompressedBitmap::Cursor::Cursor(const CompressedBitmap& bitmap)
    : pos_(bitmap.payload_.data()),
      end_(bitmap.payload_.data() + bitmap.payload_.size()),
      remaining_(bitmap.count_) {
    if (remaining_ > 0) {
        current_ = read_varint();
    }
}

std::uint32_t CompressedBitmap::Cursor::read_varint() {
    std::uint32_t v = 0;
    decode_varint(pos_, end_, v);  // payloads are validated on construction
    return v;
}

void CompressedBitmap::Cursor::advance() {
    if (--remaining_ > 0) {
        current_ += read_varint() + 1;
    }
}

CompressedBitmap CompressedBitmap::empty(std::uint32_t length) {
    CompressedBitmap b;
    b.length_ = length;
    return b;
}

CompressedBitmap CompressedBitmap::from_positions(std::uint32_t length,
                                                  std::span<const std::uint32_t> positions) {
    PositionEncoder enc(length);
    for (std::uint32_t p : positions) {
        enc.push(p);
    }
    return std::move(enc).finish();
}

bool CompressedBitmap::test(std::uint32_t j) const {
    for (auto c = cursor(); !c.done() && c.value() <= j; c.advance()) {
        if (c.value() == j) return true;
    }
    return false;
}

std::vector<std::uint32_t> CompressedBitmap::positions() const {
    std::vector<std::uint32_t> out;
    out.reserve(count_);
    for (auto c = cursor(); !c.done(); c.advance()) {
        out.push_back(c.value());
    }
    return out;
}

PositionEncoder::PositionEncoder(std::uint32_t length) { out_.length_ = length; }

void PositionEncoder::push(std::uint32_t position) {
    if (position >= out_.length_) {
        throw BoundsError("bit " + std::to_string(position) + " outside bitmap of length " +
                          std::to_string(out_.length_));
    }
    if (has_prev_ && position <= prev_) {
        throw DomainError("bitmap positions must be strictly increasing");
    }
    append_varint(out_.payload_, has_prev_ ? position - prev_ - 1 : position);
    has_prev_ = true;
    prev_ = position;
    ++out_.count_;
}

CompressedBitmap PositionEncoder::finish() && { return std::move(out_); }

BitmapBuilder::BitmapBuilder(std::uint32_t length) : length_(length), words_((length + 63) / 64, 0) {}

void BitmapBuilder::set(std::uint32_t j) {
    if (j >= length_) {
        throw BoundsError("bit " + std::to_string(j) + " outside bitmap of length " + std::to_string(length_));
    }
    words_[j / 64] |= std::uint64_t{1} << (j % 64);
}

CompressedBitmap BitmapBuilder::build() const {
    PositionEncoder enc(length_);
    for (std::size_t w = 0; w < words_.size(); ++w) {
        for (std::uint64_t bits = words_[w]; bits != 0; bits &= bits - 1) {
            enc.push(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
        }
    }
    return std::move(enc).finish();
}

CompressedBitmap set_bit(const CompressedBitmap& bitmap, std::uint32_t j) {
    if (j >= bitmap.length()) {
        throw BoundsError("bit " + std::to_string(j) + " outside bitmap of length " +
                          std::to_string(bitmap.length()));
    }
    PositionEncoder enc(bitmap.length());
    bool inserted = false;
    for (auto c = bitmap.cursor(); !c.done(); c.advance()) {
        if (!inserted && j <= c.value()) {
            if (j < c.value()) enc.push(j);
            inserted = true;
        }
        enc.push(c.value());
    }
    if (!inserted) enc.push(j);
    return std::move(enc).finish();
}

namespace {

void check_lengths(const CompressedBitmap& a, const CompressedBitmap& b) {
    if (a.length() != b.length()) {
        throw DimensionError("bitmap lengths differ: " + std::to_string(a.length()) + " vs " +
                             std::to_string(b.length()));
    }
}

template <typename Emit>
void intersect(const CompressedBitmap& a, const CompressedBitmap& b, Emit emit) {
    auto ca = a.cursor();
    auto cb = b.cursor();
    while (!ca.done() && !cb.done()) {
        if (ca.value() < cb.value()) {
            ca.advance();
        } else if (cb.value() < ca.value()) {
            cb.advance();
        } else {
            emit(ca.value());
            ca.advance();
            cb.advance();
        }
    }
}

}  // namespace

CompressedBitmap bitmap_and(const CompressedBitmap& a, const CompressedBitmap& b) {
    check_lengths(a, b);
    PositionEncoder enc(a.length());
    intersect(a, b, [&](std::uint32_t p) { enc.push(p); });
    return std::move(enc).finish();
}

std::uint32_t and_popcount(const CompressedBitmap& a, const CompressedBitmap& b) {
    check_lengths(a, b);
    std::uint32_t n = 0;
    intersect(a, b, [&](std::uint32_t) { ++n; });
    return n;
}

std::vector<std::uint8_t> serialize_bitmap(const CompressedBitmap& bitmap) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.reserve(kBitmapHeaderSize + bitmap.payload().size());
    out.push_back(kVersion);
    put_u32(out, bitmap.length());
    put_u32(out, bitmap.popcount());
    out.insert(out.end(), bitmap.payload().begin(), bitmap.payload().end());
    return out;
}

CompressedBitmap deserialize_bitmap(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kBitmapHeaderSize) {
        throw FormatError("bitmap record truncated: " + std::to_string(bytes.size()) + " bytes");
    }
    if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
        throw FormatError("bad bitmap magic");
    }
    if (bytes[4] != kVersion) {
        throw FormatError("unsupported bitmap version " + std::to_string(bytes[4]));
    }
    const std::uint32_t length = get_u32(bytes.data() + 5);
    const std::uint32_t count = get_u32(bytes.data() + 9);
    if (count > length) {
        throw FormatError("bitmap count exceeds its length");
    }

    const std::uint8_t* pos = bytes.data() + kBitmapHeaderSize;
    const std::uint8_t* end = bytes.data() + bytes.size();
    std::uint64_t position = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t v = 0;
        if (!decode_varint(pos, end, v)) {
            throw FormatError("bitmap payload truncated or malformed");
        }
        position = i == 0 ? v : position + v + 1;
        if (position >= length) {
            throw FormatError("bitmap position " + std::to_string(position) + " out of range");
        }
    }
    if (pos != end) {
        throw FormatError("trailing bytes after bitmap payload");
    }

    CompressedBitmap b;
    b.length_ = length;
    b.count_ = count;
    b.payload_.assign(bytes.begin() + kBitmapHeaderSize, bytes.end());
    return b;
}

}  // namespace bimagelsh
