#include "bimagelsh/model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bimagelsh/errors.hpp"
#include "test_util.hpp"

using namespace bimagelsh;
using bimagelsh::testing::random_dataset;

namespace {

// Oracle: extended precision sum of squares.
double long_double_distance(std::span<const float> a, std::span<const float> b) {
    long double sum = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
        sum += d * d;
    }
    return static_cast<double>(std::sqrt(sum));
}

// Oracle: independent quadratic scan over all images, full sort.
std::vector<ImageId> scan_ranking(const QueryImage& q, const Dataset& data, double radius) {
    std::vector<std::pair<double, ImageId>> dist;
    for (ImageId j = 0; j < data.image_count(); ++j) {
        std::size_t within = 0;
        std::size_t total = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            for (PointId p = 0; p < data.size(); ++p) {
                if (data.image_of(p) != j) continue;
                ++total;
                if (long_double_distance(q.descriptor(i), data.vector(p)) <= radius) ++within;
            }
        }
        dist.emplace_back(1.0 - static_cast<double>(within) / static_cast<double>(total), j);
    }
    std::sort(dist.begin(), dist.end());
    std::vector<ImageId> out;
    for (auto& [d, j] : dist) out.push_back(j);
    return out;
}

Dataset tiny(std::vector<std::vector<float>> points, std::vector<ImageId> owners) {
    std::vector<float> coords;
    for (auto& p : points) coords.insert(coords.end(), p.begin(), p.end());
    return Dataset(points.front().size(), std::move(coords), std::move(owners));
}

}  // namespace

TEST(Euclidean, ThreeFourFive) {
    std::vector<float> a{0, 0}, b{3, 4};
    EXPECT_DOUBLE_EQ(euclidean(a, b), 5.0);
    EXPECT_EQ(euclidean(a, a), 0.0);
    EXPECT_EQ(euclidean(b, b), 0.0);
}

TEST(Euclidean, LengthMismatchThrows) {
    std::vector<float> a{0, 0}, b{3, 4, 5};
    EXPECT_THROW(euclidean(a, b), DimensionError);
}

TEST(Euclidean, MatchesExtendedPrecisionOracle) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = bimagelsh::testing::random_vector(128, rng);
        auto b = bimagelsh::testing::random_vector(128, rng);
        const double got = euclidean(a, b);
        const double want = long_double_distance(a, b);
        EXPECT_NEAR(got, want, 1e-9 * want);
        EXPECT_EQ(got, euclidean(b, a));
    }
}

TEST(SimImages, SingleDescriptorAtRadiusZero) {
    const auto data = tiny({{1.0f, 2.0f}}, {0});
    EXPECT_EQ(sim_images(data.image(0), data.image(0), 0.0, data), 1.0);
    EXPECT_EQ(dist_images(data.image(0), data.image(0), 0.0, data), 0.0);
}

TEST(SimImages, TwoOfSixPairsWithinRadius) {
    // X1 = {(0,0), (10,0)}, X2 = {(0,1), (10,1), (50,50)}; pairs within 1.5: two.
    const auto data = tiny({{0, 0}, {10, 0}, {0, 1}, {10, 1}, {50, 50}}, {0, 0, 1, 1, 1});
    EXPECT_DOUBLE_EQ(sim_images(data.image(0), data.image(1), 1.5, data), 2.0 / 6.0);
    EXPECT_DOUBLE_EQ(dist_images(data.image(0), data.image(1), 1.5, data), 1.0 - 2.0 / 6.0);
}

TEST(SimImages, MatchesExhaustivePairEnumeration) {
    const auto data = random_dataset(2, 5, 8, 3);
    std::vector<double> pair_dist;
    for (PointId a : data.image(0).descriptor_ids) {
        for (PointId b : data.image(1).descriptor_ids) {
            pair_dist.push_back(long_double_distance(data.vector(a), data.vector(b)));
        }
    }
    auto sorted = pair_dist;
    std::sort(sorted.begin(), sorted.end());
    const double radius = sorted[sorted.size() / 2];
    const auto within = std::count_if(pair_dist.begin(), pair_dist.end(), [&](double d) { return d <= radius; });
    EXPECT_DOUBLE_EQ(sim_images(data.image(0), data.image(1), radius, data), static_cast<double>(within) / 25.0);
}

TEST(SimImages, EmptyAndNegativeRadiusRejected) {
    const auto data = tiny({{0, 0}}, {0});
    ImageRecord empty;
    EXPECT_THROW(sim_images(empty, data.image(0), 1.0, data), DomainError);
    EXPECT_THROW(sim_images(data.image(0), data.image(0), -1.0, data), DomainError);
}

TEST(SimImages, BoundedMonotoneAndComplementary) {
    const auto data = random_dataset(4, 6, 5, 17);
    for (ImageId a = 0; a < 4; ++a) {
        for (ImageId b = 0; b < 4; ++b) {
            double previous = 0.0;
            for (double r = 0.0; r < 8.0; r += 0.25) {
                const double s = sim_images(data.image(a), data.image(b), r, data);
                EXPECT_GE(s, 0.0);
                EXPECT_LE(s, 1.0);
                EXPECT_GE(s, previous);
                EXPECT_EQ(s + dist_images(data.image(a), data.image(b), r, data), 1.0);
                previous = s;
            }
        }
    }
}

TEST(SimImages, SelfSimilarityIsOneBeyondDiameter) {
    const auto data = random_dataset(1, 7, 4, 5);
    double diameter = 0.0;
    for (PointId a = 0; a < 7; ++a) {
        for (PointId b = 0; b < 7; ++b) diameter = std::max(diameter, euclidean(data.vector(a), data.vector(b)));
    }
    EXPECT_EQ(sim_images(data.image(0), data.image(0), diameter, data), 1.0);
}

TEST(ExactTopK, SelfIsNearest) {
    const auto data = random_dataset(10, 6, 8, 23, 3.0f);
    for (ImageId j = 0; j < 10; ++j) {
        const auto top = exact_top_k_images(QueryImage::from_image(data, j), 1, 0.0, data);
        ASSERT_EQ(top.size(), 1u);
        EXPECT_EQ(top[0].image_id, j);
    }
}

TEST(ExactTopK, KEqualsSIsPermutation) {
    const auto data = random_dataset(9, 3, 4, 29);
    const auto top = exact_top_k_images(QueryImage::from_image(data, 4), 9, 1.5, data);
    std::vector<ImageId> ids;
    for (auto& s : top) ids.push_back(s.image_id);
    std::sort(ids.begin(), ids.end());
    std::vector<ImageId> all(9);
    std::iota(all.begin(), all.end(), 0);
    EXPECT_EQ(ids, all);
    EXPECT_THROW(exact_top_k_images(QueryImage::from_image(data, 4), 10, 1.5, data), DomainError);
}

TEST(ExactTopK, MatchesIndependentQuadraticScan) {
    const auto data = random_dataset(20, 5, 6, 31);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<float> coords;
        for (int i = 0; i < 4; ++i) {
            auto v = bimagelsh::testing::random_vector(6, rng);
            coords.insert(coords.end(), v.begin(), v.end());
        }
        const QueryImage q(6, coords);
        const double radius = 2.5 + trial * 0.5;
        const auto top = exact_top_k_images(q, 20, radius, data);
        std::vector<ImageId> got;
        for (auto& s : top) got.push_back(s.image_id);
        EXPECT_EQ(got, scan_ranking(q, data, radius));
    }
}

TEST(ExactTopK, InvariantUnderStorageOrder) {
    const auto data = random_dataset(12, 4, 5, 37);
    std::vector<PointId> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(3);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<float> coords;
    std::vector<ImageId> owners;
    for (PointId p : order) {
        auto v = data.vector(p);
        coords.insert(coords.end(), v.begin(), v.end());
        owners.push_back(data.image_of(p));
    }
    const Dataset shuffled(5, coords, owners);
    const auto q = QueryImage::from_image(data, 3);
    const auto a = exact_top_k_images(q, 12, 2.0, data);
    const auto b = exact_top_k_images(q, 12, 2.0, shuffled);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].image_id, b[i].image_id);
        EXPECT_EQ(a[i].similarity, b[i].similarity);
    }
}

TEST(Dataset, RejectsInconsistentInput) {
    EXPECT_THROW(Dataset(2, {1, 2, 3}, {0, 0}), DimensionError);
    EXPECT_THROW(Dataset(2, {1, 2, 3, 4}, {0, 2}), DomainError);  // image 1 empty
    EXPECT_THROW(Dataset(2, {}, {}), DomainError);
    EXPECT_THROW(Dataset(2, {1, 2}, {0}, std::vector<Category>{1, 2}), DomainError);
}

TEST(Dataset, BuildsImageRecords) {
    const Dataset data(1, {0, 1, 2, 3}, {1, 0, 1, 1}, std::vector<Category>{5, 6});
    ASSERT_EQ(data.image_count(), 2u);
    EXPECT_EQ(data.image(0).descriptor_ids, (std::vector<PointId>{1}));
    EXPECT_EQ(data.image(1).descriptor_ids, (std::vector<PointId>{0, 2, 3}));
    EXPECT_EQ(data.category_of(1), 6u);
    EXPECT_TRUE(data.has_categories());
}

TEST(Params, ResolveDefaults) {
    const Params p = Params{}.resolve(10000);  // ceil(log2 10000) = 14 -> 112, capped
    EXPECT_EQ(p.m, 64u);
    EXPECT_EQ(p.l, 39u);
    EXPECT_EQ(p.v_images, 20u);
    const Params small = Params{}.resolve(100);  // ceil(log2 100) = 7 -> 56
    EXPECT_EQ(small.m, 56u);
    EXPECT_EQ(small.l, 34u);
    EXPECT_EQ(Params{}.resolve(1).m, 8u);
}

TEST(Params, InvariantsEnforced) {
    Params p;
    p.c = 1.0;
    EXPECT_THROW(p.resolve(100), DomainError);
    p = Params{};
    p.gamma = 1.5;
    EXPECT_THROW(p.resolve(100), DomainError);
    p = Params{};
    p.m = 4;
    p.l = 5;
    EXPECT_THROW(p.resolve(100), DomainError);
    p = Params{};
    p.k_prime = 10;
    EXPECT_THROW(p.resolve(100), DomainError);
    p = Params{};
    p.uthres = -0.1;
    EXPECT_THROW(p.resolve(100), DomainError);
}
