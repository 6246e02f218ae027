#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bimagelsh/bitmap.hpp"
#include "bimagelsh/hashing.hpp"
#include "bimagelsh/index.hpp"
#include "bimagelsh/model.hpp"

namespace bimagelsh {

enum class ImageClass { MaybeUseful, Useful, Useless };

enum class StopReason { S1, S2, RadiusCap, Baseline, Exact };

std::string to_string(ImageClass cls);
std::string to_string(StopReason reason);

/// Running score of one database image against the current query.
struct ImageScoreState {
    ImageId image_id = 0;
    /// |desc(Q)| * |desc(X_j)|
    std::uint64_t pair_total = 0;
    /// Pairs (q, x) with cc(q, x) >= l.
    std::uint64_t collision_pairs = 0;
    /// Candidate pairs verified with ||q - x|| <= c*R.
    std::uint64_t verified_pairs = 0;
    ImageClass cls = ImageClass::MaybeUseful;
    /// Round in which the image became Useful; its counters freeze there.
    std::uint32_t useful_round = 0;
};

/// Collision Index: collision_pairs / pair_total.
double collision_index(const ImageScoreState& state);
/// 1 - verified_pairs / pair_total.
double c_dist(const ImageScoreState& state);
inline double verified_similarity(const ImageScoreState& state) { return 1.0 - c_dist(state); }

struct DescriptorQueryState {
    std::uint32_t descriptor = 0;
    std::vector<double> projected;  // one per projection
    std::unordered_map<PointId, std::uint16_t> collision_counts;
    std::uint64_t candidate_count = 0;
    std::vector<CellRange> frontier;  // last window per projection
};

struct RankedImage {
    ImageId image_id;
    double score;
    std::optional<double> ci;
    std::optional<double> c_dist;
};

struct QueryReport {
    std::string method;
    std::vector<RankedImage> top_k;
    StopReason stop_reason = StopReason::RadiusCap;
    std::uint32_t final_radius_exponent = 0;
    double final_radius = 0.0;
    IoMeter io;
    double wall_time_ms = 0.0;
};

/// End-of-round classification.
///
/// L is the ci of the (k + v_images)-th image by descending ci, or 0 when
/// fewer images have ci > 0. A Maybe-useful image with 0 < ci < L becomes
/// Useless; one with ci >= gamma (and ci > 0) that also passes the Useful
/// rule becomes Useful. Useful and Useless are terminal.
void classify(std::vector<ImageScoreState>& states, const Params& params);

/// The popcount a bucket file's AND with the image bitmap must reach to be
/// read: ceil(uthres * S).
std::uint32_t skip_threshold(double uthres, std::uint32_t image_count);

/// True iff popcount(file AND image) < ceil(uthres * S), or == 0 when the
/// threshold is zero.
bool should_skip_file(const CompressedBitmap& file_bitmap, const CompressedBitmap& image_bitmap, double uthres,
                      std::uint32_t image_count);

/// S1: at least k images classified Useful.
bool stop_s1(const std::vector<ImageScoreState>& states, std::uint32_t k);
/// S2: every descriptor has at least k' + v' candidate points.
bool stop_s2(const std::vector<DescriptorQueryState>& descriptors, std::uint32_t k_prime, std::uint32_t v_prime);

/// Copies the hash family parameters (m, w, c, seed) from the index manifest
/// and derives l and v_images when left at zero.
Params query_params(const IndexManifest& manifest, const Params& requested);

struct SkipRecord {
    std::uint32_t round;
    std::uint32_t projection;
    std::int64_t cell;
    std::uint32_t popcount;
    std::uint32_t threshold;
};

struct ReadRecord {
    std::uint32_t round;
    std::uint32_t projection;
    std::int64_t cell;
    std::uint64_t bytes;
};

/// Optional audit trail of one query.
struct QueryTrace {
    std::vector<ImageScoreState> images;           // final states
    std::vector<std::uint64_t> candidate_counts;   // per query descriptor
    std::vector<CompressedBitmap> image_bitmaps;   // live image bitmap at the start of each round
    std::vector<SkipRecord> skips;
    std::vector<ReadRecord> reads;
};

/// The bImageLSH image query processor over an on-disk index.
///
/// Query descriptors advance together: each round widens every descriptor's
/// window in every projection, reading only the bucket files whose bitmap
/// still shares enough Maybe-useful images with the live image bitmap.
class ImageQueryEngine {
public:
    ImageQueryEngine(const IndexReader& index, const Dataset& data);

    QueryReport query(const QueryImage& query, const Params& params, QueryTrace* trace = nullptr) const;

private:
    const IndexReader& index_;
    const Dataset& data_;
};

QueryReport query_top_k(const QueryImage& query, const Params& params, const IndexReader& index,
                        const Dataset& data, QueryTrace* trace = nullptr);

}  // namespace bimagelsh
