#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bimagelsh/engine.hpp"
#include "bimagelsh/index.hpp"
#include "bimagelsh/model.hpp"

namespace bimagelsh {

struct PointHit {
    PointId point_id;
    ImageId image_id;
    double distance;
};

/// Ranked neighbours of one query descriptor, nearest first.
struct DescriptorResult {
    std::uint32_t descriptor = 0;
    std::vector<PointHit> hits;
    std::uint32_t final_radius_exponent = 0;
};

/// Single-descriptor c-approximate top-k' search by collision counting and
/// virtual rehashing. Stops at the end of the first round in which k'
/// candidates lie within c*R or k' + v' candidates exist, or at the radius
/// cap. Returns the k' nearest candidates.
DescriptorResult point_top_k(std::span<const float> q, std::uint32_t k_prime, const Params& params,
                             const IndexReader& index, const Dataset& data, IoMeter& meter);

/// Borda count: each hit at 1-based rank r contributes k' - r to its image.
/// Images are ranked by total score descending, then id ascending; images
/// with a zero total are left out.
std::vector<RankedImage> borda_aggregate(std::span<const DescriptorResult> results, std::uint32_t k,
                                         std::uint32_t k_prime);

/// Runs every query descriptor independently, then aggregates.
QueryReport borda_query(const QueryImage& query, const Params& params, const IndexReader& index,
                        const Dataset& data);

}  // namespace bimagelsh
