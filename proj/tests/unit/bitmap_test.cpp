#include "bimagelsh/bitmap.hpp"

#include <gtest/gtest.h>

#include <random>

#include "bimagelsh/errors.hpp"

using namespace bimagelsh;

namespace {

// Oracle: plain boolean arrays.
using Bools = std::vector<bool>;

Bools random_bools(std::uint32_t length, double density, std::mt19937_64& rng) {
    std::bernoulli_distribution bit(density);
    Bools out(length);
    for (std::uint32_t i = 0; i < length; ++i) out[i] = bit(rng);
    return out;
}

CompressedBitmap from_bools(const Bools& bools) {
    BitmapBuilder builder(static_cast<std::uint32_t>(bools.size()));
    for (std::uint32_t i = 0; i < bools.size(); ++i) {
        if (bools[i]) builder.set(i);
    }
    return builder.build();
}

Bools to_bools(const CompressedBitmap& b) {
    Bools out(b.length());
    for (auto p : b.positions()) out[p] = true;
    return out;
}

std::uint32_t count(const Bools& b) { return static_cast<std::uint32_t>(std::count(b.begin(), b.end(), true)); }

}  // namespace

TEST(Bitmap, SetBitCounts) {
    auto b = set_bit(CompressedBitmap::empty(10), 3);
    EXPECT_EQ(popcount(b), 1u);
    EXPECT_TRUE(b.test(3));
    EXPECT_FALSE(b.test(4));
    b = set_bit(b, 3);
    EXPECT_EQ(popcount(b), 1u);

    auto all = CompressedBitmap::empty(37);
    for (std::uint32_t j = 37; j-- > 0;) all = set_bit(all, j);
    EXPECT_EQ(popcount(all), 37u);
}

TEST(Bitmap, SetBitOutOfRange) {
    EXPECT_THROW(set_bit(CompressedBitmap::empty(10), 10), BoundsError);
    BitmapBuilder builder(4);
    EXPECT_THROW(builder.set(4), BoundsError);
}

TEST(Bitmap, AndExamples) {
    const std::uint32_t pa[] = {1, 5, 9};
    const std::uint32_t pb[] = {5, 9, 12};
    const auto a = CompressedBitmap::from_positions(16, pa);
    const auto b = CompressedBitmap::from_positions(16, pb);
    EXPECT_EQ(bitmap_and(a, b).positions(), (std::vector<std::uint32_t>{5, 9}));
    EXPECT_EQ(bitmap_and(a, b).length(), 16u);
    EXPECT_EQ(and_popcount(a, b), 2u);
    EXPECT_TRUE(bitmap_and(a, CompressedBitmap::empty(16)).empty());
    EXPECT_THROW(bitmap_and(a, CompressedBitmap::empty(17)), DimensionError);
}

TEST(Bitmap, PopcountExamples) {
    EXPECT_EQ(popcount(CompressedBitmap::empty(100)), 0u);
    const std::uint32_t ends[] = {0, 99};
    EXPECT_EQ(popcount(CompressedBitmap::from_positions(100, ends)), 2u);
}

TEST(Bitmap, AndMatchesBooleanOracle) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::uint32_t> len(1, 3000);
    std::uniform_real_distribution<double> dens(0.0, 0.6);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = len(rng);
        const Bools a = random_bools(n, dens(rng), rng);
        const Bools b = random_bools(n, dens(rng), rng);
        Bools want(n);
        for (std::uint32_t i = 0; i < n; ++i) want[i] = a[i] && b[i];
        const auto ca = from_bools(a);
        const auto cb = from_bools(b);
        const auto got = bitmap_and(ca, cb);
        ASSERT_EQ(to_bools(got), want);
        ASSERT_EQ(popcount(got), count(want));
        ASSERT_EQ(and_popcount(ca, cb), count(want));
        ASSERT_EQ(got, bitmap_and(cb, ca));
        ASSERT_LE(popcount(got), std::min(popcount(ca), popcount(cb)));
    }
}

TEST(Bitmap, AndIsAssociative) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint32_t n = 500;
        const auto a = from_bools(random_bools(n, 0.5, rng));
        const auto b = from_bools(random_bools(n, 0.5, rng));
        const auto c = from_bools(random_bools(n, 0.5, rng));
        ASSERT_EQ(bitmap_and(bitmap_and(a, b), c), bitmap_and(a, bitmap_and(b, c)));
    }
}

TEST(Bitmap, SerializeEmptyAndMinimal) {
    const auto empty = CompressedBitmap::empty(1000);
    const auto bytes = serialize_bitmap(empty);
    EXPECT_EQ(bytes.size(), kBitmapHeaderSize);
    EXPECT_EQ(deserialize_bitmap(bytes), empty);

    const std::uint32_t zero[] = {0};
    const auto one = CompressedBitmap::from_positions(1, zero);
    const auto one_bytes = serialize_bitmap(one);
    EXPECT_EQ(one_bytes, (std::vector<std::uint8_t>{'B', 'I', 'M', 'G', 0x01, 1, 0, 0, 0, 1, 0, 0, 0, 0}));
    EXPECT_EQ(deserialize_bitmap(one_bytes), one);
}

TEST(Bitmap, DeltaVarintLayout) {
    // Positions 3, 4, 300: varints 3, 0, 295 (= 0xa7 0x02).
    const std::uint32_t pos[] = {3, 4, 300};
    const auto b = CompressedBitmap::from_positions(1000, pos);
    EXPECT_EQ(b.payload(), (std::vector<std::uint8_t>{3, 0, 0xa7, 0x02}));
    const auto bytes = serialize_bitmap(b);
    EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin() + 5, bytes.begin() + 13),
              (std::vector<std::uint8_t>{0xe8, 0x03, 0, 0, 3, 0, 0, 0}));
}

TEST(Bitmap, RoundTripPropertyAndSparseBound) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::uint32_t> len(1, 100000);
    std::uniform_real_distribution<double> dens(0.0, 0.05);
    for (int trial = 0; trial < 500; ++trial) {
        const auto b = from_bools(random_bools(len(rng), dens(rng), rng));
        const auto bytes = serialize_bitmap(b);
        const auto back = deserialize_bitmap(bytes);
        ASSERT_EQ(back, b);
        ASSERT_EQ(serialize_bitmap(back), bytes);
        ASSERT_LE(bytes.size(), kBitmapHeaderSize + 5u * popcount(b));
    }
}

TEST(Bitmap, DeserializeRejectsMalformedInput) {
    const std::uint32_t pos[] = {2, 7};
    const auto good = serialize_bitmap(CompressedBitmap::from_positions(8, pos));

    auto truncated_header = good;
    truncated_header.resize(10);
    EXPECT_THROW(deserialize_bitmap(truncated_header), FormatError);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_THROW(deserialize_bitmap(bad_magic), FormatError);

    auto bad_version = good;
    bad_version[4] = 2;
    EXPECT_THROW(deserialize_bitmap(bad_version), FormatError);

    auto truncated_payload = good;
    truncated_payload.pop_back();
    EXPECT_THROW(deserialize_bitmap(truncated_payload), FormatError);

    auto trailing = good;
    trailing.push_back(0);
    EXPECT_THROW(deserialize_bitmap(trailing), FormatError);

    auto out_of_range = good;
    out_of_range.back() = 5;  // 2 + 5 + 1 = 8 >= length
    EXPECT_THROW(deserialize_bitmap(out_of_range), FormatError);

    auto unterminated = good;
    unterminated.back() = 0x80;
    EXPECT_THROW(deserialize_bitmap(unterminated), FormatError);
}

TEST(Bitmap, FromPositionsRequiresIncreasingOrder) {
    const std::uint32_t pos[] = {4, 4};
    EXPECT_THROW(CompressedBitmap::from_positions(8, pos), DomainError);
}
