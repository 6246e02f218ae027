#include "bimagelsh/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <unordered_map>

#include "bimagelsh/errors.hpp"

namespace bimagelsh {

DescriptorResult point_top_k(std::span<const float> q, std::uint32_t k_prime, const Params& requested,
                             const IndexReader& index, const Dataset& data, IoMeter& meter) {
    if (q.size() != data.dim()) {
        throw DimensionError("query descriptor has d = " + std::to_string(q.size()) + ", index has d = " +
                             std::to_string(data.dim()));
    }
    const Params params = query_params(index.manifest(), requested);
    const auto& family = index.family();
    const std::vector<double> projected = family.project_all(q);
    const std::uint64_t vector_bytes = data.dim() * sizeof(float);

    std::unordered_map<PointId, std::uint16_t> counts;
    std::vector<PointHit> candidates;

    DescriptorResult result;
    double previous_half = -1.0;
    for (std::uint32_t round = 0;; ++round) {
        const double radius = radius_schedule(params.c, round);
        const double half = family.half_window(radius);
        for (std::uint32_t i = 0; i < params.m; ++i) {
            for (const CellRange& range : family.growth_cells(projected[i], previous_half, half)) {
                for (const CellInfo& info : index.cells_in(i, range)) {
                    const BucketFile file = index.read_bucket(i, info.cell, meter);
                    for (const BucketEntry& e : file.entries) {
                        if (params.excluded_image && e.image_id == *params.excluded_image) continue;
                        if (!ProjectionFamily::in_growth(std::abs(e.projected - projected[i]), previous_half, half)) {
                            continue;
                        }
                        if (++counts[e.point_id] != params.l) continue;
                        meter.data_bytes_read += vector_bytes;
                        candidates.push_back({e.point_id, e.image_id, euclidean(q, data.vector(e.point_id))});
                    }
                }
            }
        }

        result.final_radius_exponent = round;
        const double reach = params.c * radius;
        const auto within = static_cast<std::uint64_t>(std::count_if(
            candidates.begin(), candidates.end(), [&](const PointHit& h) { return h.distance <= reach; }));
        if (within >= k_prime || candidates.size() >= static_cast<std::uint64_t>(k_prime) + params.v_prime_points ||
            round >= params.max_radius_exponent) {
            break;
        }
        previous_half = half;
    }

    auto nearer = [](const PointHit& a, const PointHit& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.point_id < b.point_id;
    };
    const std::size_t keep = std::min<std::size_t>(k_prime, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      nearer);
    candidates.resize(keep);
    result.hits = std::move(candidates);
    return result;
}

std::vector<RankedImage> borda_aggregate(std::span<const DescriptorResult> results, std::uint32_t k,
                                         std::uint32_t k_prime) {
    std::map<ImageId, double> scores;
    for (const auto& result : results) {
        for (std::size_t r = 0; r < result.hits.size(); ++r) {
            const double rank = static_cast<double>(r + 1);
            scores[result.hits[r].image_id] += std::max(0.0, static_cast<double>(k_prime) - rank);
        }
    }
    std::vector<RankedImage> ranked;
    for (const auto& [image, score] : scores) {
        if (score > 0.0) ranked.push_back({image, score, std::nullopt, std::nullopt});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedImage& a, const RankedImage& b) { return a.score > b.score; });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

QueryReport borda_query(const QueryImage& query, const Params& requested, const IndexReader& index,
                        const Dataset& data) {
    const auto started = std::chrono::steady_clock::now();
    check_dataset(index.manifest(), data);
    const Params params = query_params(index.manifest(), requested);

    QueryReport report;
    report.method = "borda";
    report.stop_reason = StopReason::Baseline;
    std::vector<DescriptorResult> results;
    results.reserve(query.size());
    for (std::uint32_t qd = 0; qd < query.size(); ++qd) {
        auto result = point_top_k(query.descriptor(qd), params.k_prime, params, index, data, report.io);
        result.descriptor = qd;
        report.final_radius_exponent = std::max(report.final_radius_exponent, result.final_radius_exponent);
        results.push_back(std::move(result));
    }
    report.final_radius = radius_schedule(params.c, report.final_radius_exponent);
    report.top_k = borda_aggregate(results, params.k, params.k_prime);
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace bimagelsh
