#include "bimagelsh/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "bimagelsh/errors.hpp"

namespace bimagelsh {

std::string to_string(ImageClass cls) {
    switch (cls) {
        case ImageClass::MaybeUseful: return "maybe-useful";
        case ImageClass::Useful: return "useful";
        case ImageClass::Useless: return "useless";
    }
    return "unknown";
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::S1: return "S1";
        case StopReason::S2: return "S2";
        case StopReason::RadiusCap: return "radius-cap";
        case StopReason::Baseline: return "baseline";
        case StopReason::Exact: return "exact";
    }
    return "unknown";
}

double collision_index(const ImageScoreState& state) {
    if (state.pair_total == 0) return 0.0;
    return static_cast<double>(state.collision_pairs) / static_cast<double>(state.pair_total);
}

double c_dist(const ImageScoreState& state) {
    if (state.pair_total == 0) return 1.0;
    return 1.0 - static_cast<double>(state.verified_pairs) / static_cast<double>(state.pair_total);
}

namespace {

bool passes_useful_rule(const ImageScoreState& s, const Params& params) {
    if (params.useful_rule == UsefulRule::LiteralCDist) {
        return c_dist(s) >= params.gamma;
    }
    return s.verified_pairs > 0 && verified_similarity(s) >= params.gamma;
}

}  // namespace

void classify(std::vector<ImageScoreState>& states, const Params& params) {
    std::vector<double> positive;
    for (const auto& s : states) {
        const double ci = collision_index(s);
        if (ci > 0.0) positive.push_back(ci);
    }
    const std::size_t rank = static_cast<std::size_t>(params.k) + params.v_images;
    double lower_bound = 0.0;
    if (rank >= 1 && positive.size() >= rank) {
        std::nth_element(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(rank - 1), positive.end(),
                         std::greater<>());
        lower_bound = positive[rank - 1];
    }

    for (auto& s : states) {
        if (s.cls != ImageClass::MaybeUseful) continue;
        const double ci = collision_index(s);
        if (ci <= 0.0) continue;
        if (ci < lower_bound) {
            s.cls = ImageClass::Useless;
        } else if (ci >= params.gamma && passes_useful_rule(s, params)) {
            s.cls = ImageClass::Useful;
        }
    }
}

std::uint32_t skip_threshold(double uthres, std::uint32_t image_count) {
    // The epsilon absorbs representation error in products such as 0.03 * 200.
    return static_cast<std::uint32_t>(std::ceil(uthres * image_count - 1e-9));
}

bool should_skip_file(const CompressedBitmap& file_bitmap, const CompressedBitmap& image_bitmap, double uthres,
                      std::uint32_t image_count) {
    const auto live = and_popcount(file_bitmap, image_bitmap);
    const auto threshold = skip_threshold(uthres, image_count);
    return threshold == 0 ? live == 0 : live < threshold;
}

bool stop_s1(const std::vector<ImageScoreState>& states, std::uint32_t k) {
    const auto useful = std::count_if(states.begin(), states.end(),
                                      [](const ImageScoreState& s) { return s.cls == ImageClass::Useful; });
    return static_cast<std::uint64_t>(useful) >= k;
}

bool stop_s2(const std::vector<DescriptorQueryState>& descriptors, std::uint32_t k_prime, std::uint32_t v_prime) {
    const std::uint64_t target = static_cast<std::uint64_t>(k_prime) + v_prime;
    return std::all_of(descriptors.begin(), descriptors.end(),
                       [&](const DescriptorQueryState& d) { return d.candidate_count >= target; });
}

Params query_params(const IndexManifest& manifest, const Params& requested) {
    if (requested.m != 0 && requested.m != manifest.params.m) {
        throw DomainError("requested m = " + std::to_string(requested.m) + " but the index was built with m = " +
                          std::to_string(manifest.params.m));
    }
    Params p = requested;
    p.m = manifest.params.m;
    p.w = manifest.params.w;
    p.c = manifest.params.c;
    p.seed = manifest.params.seed;
    return p.resolve(manifest.n);
}

ImageQueryEngine::ImageQueryEngine(const IndexReader& index, const Dataset& data) : index_(index), data_(data) {
    check_dataset(index.manifest(), data);
}

namespace {

struct PendingPair {
    std::uint32_t descriptor;
    PointId point;
};

}  // namespace

QueryReport ImageQueryEngine::query(const QueryImage& query, const Params& requested, QueryTrace* trace) const {
    const auto started = std::chrono::steady_clock::now();
    if (query.dim() != data_.dim()) {
        throw DimensionError("query has d = " + std::to_string(query.dim()) + ", index has d = " +
                             std::to_string(data_.dim()));
    }
    const Params params = query_params(index_.manifest(), requested);
    const auto& family = index_.family();
    const std::uint32_t image_count = index_.image_count();
    const std::uint32_t m = params.m;
    const std::size_t nq = query.size();
    const std::uint64_t vector_bytes = data_.dim() * sizeof(float);

    std::vector<ImageScoreState> images(image_count);
    for (ImageId j = 0; j < image_count; ++j) {
        images[j].image_id = j;
        images[j].pair_total = static_cast<std::uint64_t>(nq) * data_.image(j).descriptor_ids.size();
    }
    if (params.excluded_image) {
        if (*params.excluded_image >= image_count) {
            throw BoundsError("excluded image " + std::to_string(*params.excluded_image) + " does not exist");
        }
        images[*params.excluded_image].cls = ImageClass::Useless;
    }

    std::vector<DescriptorQueryState> descriptors(nq);
    for (std::uint32_t qd = 0; qd < nq; ++qd) {
        descriptors[qd].descriptor = qd;
        descriptors[qd].projected = family.project_all(query.descriptor(qd));
        descriptors[qd].frontier.assign(m, CellRange{0, -1});
    }

    auto live_bitmap = [&] {
        BitmapBuilder builder(image_count);
        for (const auto& s : images) {
            if (s.cls == ImageClass::MaybeUseful) builder.set(s.image_id);
        }
        return builder.build();
    };

    std::vector<std::vector<PendingPair>> pending(image_count);
    CompressedBitmap image_bitmap = live_bitmap();
    QueryReport report;
    report.method = "engine";
    IoMeter& meter = report.io;

    auto verify = [&](std::uint32_t qd, PointId point, double radius) {
        meter.data_bytes_read += vector_bytes;
        return euclidean(query.descriptor(qd), data_.vector(point)) <= params.c * radius;
    };

    double previous_half = -1.0;
    for (std::uint32_t round = 0;; ++round) {
        const double radius = radius_schedule(params.c, round);
        const double half = family.half_window(radius);
        if (trace) trace->image_bitmaps.push_back(image_bitmap);

        // Candidate pairs that failed verification at a smaller radius.
        for (ImageId j = 0; j < image_count; ++j) {
            if (images[j].cls != ImageClass::MaybeUseful) continue;
            auto& list = pending[j];
            std::erase_if(list, [&](const PendingPair& pair) {
                if (!verify(pair.descriptor, pair.point, radius)) return false;
                ++images[j].verified_pairs;
                return true;
            });
        }

        for (std::uint32_t i = 0; i < m; ++i) {
            for (auto& desc : descriptors) {
                const double q_proj = desc.projected[i];
                for (const CellRange& range : family.growth_cells(q_proj, previous_half, half)) {
                    for (const CellInfo& info : index_.cells_in(i, range)) {
                        const auto& file_bitmap = index_.bucket_bitmap(i, info.cell);
                        if (should_skip_file(file_bitmap, image_bitmap, params.uthres, image_count)) {
                            ++meter.bucket_files_skipped;
                            if (trace) {
                                trace->skips.push_back({round, i, info.cell, and_popcount(file_bitmap, image_bitmap),
                                                        skip_threshold(params.uthres, image_count)});
                            }
                            continue;
                        }
                        const BucketFile file = index_.read_bucket(i, info.cell, meter);
                        if (trace) trace->reads.push_back({round, i, info.cell, info.bytes});
                        for (const BucketEntry& e : file.entries) {
                            ImageScoreState& img = images[e.image_id];
                            if (img.cls != ImageClass::MaybeUseful) continue;
                            if (!ProjectionFamily::in_growth(std::abs(e.projected - q_proj), previous_half, half)) {
                                continue;
                            }
                            if (++desc.collision_counts[e.point_id] != params.l) continue;
                            ++desc.candidate_count;
                            ++img.collision_pairs;
                            if (verify(desc.descriptor, e.point_id, radius)) {
                                ++img.verified_pairs;
                            } else {
                                pending[e.image_id].push_back({desc.descriptor, e.point_id});
                            }
                        }
                    }
                }
                desc.frontier[i] = family.cell_range_projected(q_proj, radius);
            }
        }

        classify(images, params);
        for (auto& s : images) {
            if (s.cls == ImageClass::Useful && image_bitmap.test(s.image_id)) s.useful_round = round;
        }
        image_bitmap = live_bitmap();

        report.final_radius_exponent = round;
        report.final_radius = radius;
        if (stop_s1(images, params.k)) {
            report.stop_reason = StopReason::S1;
            break;
        }
        if (stop_s2(descriptors, params.k_prime, params.v_prime_points)) {
            report.stop_reason = StopReason::S2;
            break;
        }
        if (round >= params.max_radius_exponent) {
            report.stop_reason = StopReason::RadiusCap;
            break;
        }
        previous_half = half;
    }

    std::vector<const ImageScoreState*> ranked;
    for (const auto& s : images) {
        if (s.collision_pairs == 0) continue;
        if (params.excluded_image && s.image_id == *params.excluded_image) continue;
        ranked.push_back(&s);
    }
    // Useful images are ranked first, earliest round first: their counters
    // froze at a smaller radius, so their ci is not comparable with images
    // that kept accumulating collisions.
    auto better = [](const ImageScoreState* a, const ImageScoreState* b) {
        const bool ua = a->cls == ImageClass::Useful, ub = b->cls == ImageClass::Useful;
        if (ua != ub) return ua;
        if (ua && a->useful_round != b->useful_round) return a->useful_round < b->useful_round;
        const double ca = collision_index(*a), cb = collision_index(*b);
        if (ca != cb) return ca > cb;
        const double va = verified_similarity(*a), vb = verified_similarity(*b);
        if (va != vb) return va > vb;
        return a->image_id < b->image_id;
    };
    const std::size_t keep = std::min<std::size_t>(params.k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
    for (std::size_t r = 0; r < keep; ++r) {
        const double ci = collision_index(*ranked[r]);
        report.top_k.push_back({ranked[r]->image_id, ci, ci, c_dist(*ranked[r])});
    }

    if (trace) {
        trace->images = images;
        trace->candidate_counts.clear();
        for (const auto& d : descriptors) trace->candidate_counts.push_back(d.candidate_count);
    }
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return report;
}

QueryReport query_top_k(const QueryImage& query, const Params& params, const IndexReader& index,
                        const Dataset& data, QueryTrace* trace) {
    return ImageQueryEngine(index, data).query(query, params, trace);
}

}  // namespace bimagelsh
