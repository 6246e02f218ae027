#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bimagelsh {

/// Fixed-length bitmap over image ids, stored as delta-gap LEB128 varints of
/// its sorted set positions. The first varint is the first position; every
/// later varint is (gap - 1) from the previous position.
///
/// Instances are immutable. Use BitmapBuilder to assemble one bit by bit.
class CompressedBitmap {
public:
    /// Forward cursor over the set positions, decoding the payload lazily.
    class Cursor {
    public:
        explicit Cursor(const CompressedBitmap& bitmap);
        bool done() const { return remaining_ == 0; }
        std::uint32_t value() const { return current_; }
        void advance();

    private:
        std::uint32_t read_varint();

        const std::uint8_t* pos_;
        const std::uint8_t* end_;
        std::uint32_t remaining_;
        std::uint32_t current_ = 0;
    };

    CompressedBitmap() = default;

    static CompressedBitmap empty(std::uint32_t length);
    /// `positions` must be strictly increasing and below `length`.
    static CompressedBitmap from_positions(std::uint32_t length, std::span<const std::uint32_t> positions);

    std::uint32_t length() const { return length_; }
    std::uint32_t popcount() const { return count_; }
    bool empty() const { return count_ == 0; }
    bool test(std::uint32_t j) const;
    std::vector<std::uint32_t> positions() const;
    Cursor cursor() const { return Cursor(*this); }

    const std::vector<std::uint8_t>& payload() const { return payload_; }

    bool operator==(const CompressedBitmap&) const = default;

private:
    friend class PositionEncoder;
    friend CompressedBitmap deserialize_bitmap(std::span<const std::uint8_t> bytes);

    std::uint32_t length_ = 0;
    std::uint32_t count_ = 0;
    std::vector<std::uint8_t> payload_;
};

/// Appends strictly increasing positions to a compressed payload.
class PositionEncoder {
public:
    explicit PositionEncoder(std::uint32_t length);
    void push(std::uint32_t position);
    CompressedBitmap finish() &&;

private:
    CompressedBitmap out_;
    bool has_prev_ = false;
    std::uint32_t prev_ = 0;
};

/// Mutable, single-owner bitmap used while indexing.
class BitmapBuilder {
public:
    explicit BitmapBuilder(std::uint32_t length);
    void set(std::uint32_t j);
    CompressedBitmap build() const;

private:
    std::uint32_t length_;
    std::vector<std::uint64_t> words_;
};

CompressedBitmap set_bit(const CompressedBitmap& bitmap, std::uint32_t j);
CompressedBitmap bitmap_and(const CompressedBitmap& a, const CompressedBitmap& b);
/// popcount(bitmap_and(a, b)) without materialising the result.
std::uint32_t and_popcount(const CompressedBitmap& a, const CompressedBitmap& b);
inline std::uint32_t popcount(const CompressedBitmap& b) { return b.popcount(); }

/// Header: "BIMG", version 0x01, length u32 LE, count u32 LE, then the payload.
inline constexpr std::size_t kBitmapHeaderSize = 13;
std::vector<std::uint8_t> serialize_bitmap(const CompressedBitmap& bitmap);
CompressedBitmap deserialize_bitmap(std::span<const std::uint8_t> bytes);

void append_varint(std::vector<std::uint8_t>& out, std::uint32_t value);

}  // namespace bimagelsh
