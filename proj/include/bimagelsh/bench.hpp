#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bimagelsh/engine.hpp"
#include "bimagelsh/index.hpp"
#include "bimagelsh/model.hpp"

namespace bimagelsh {

enum class Method { Engine, Borda, Exact };

std::string to_string(Method method);
/// Accepts "engine", "borda" or "exact"; throws DomainError otherwise.
Method parse_method(const std::string& name);

struct BenchConfig {
    std::vector<Method> methods{Method::Engine, Method::Borda, Method::Exact};
    std::uint32_t num_queries = 5;
    /// Seeds query sampling. Hash parameters come from the index.
    std::uint64_t seed = 42;
    Params params;
    /// Radius of the exact image similarity used by the exact method.
    double exact_radius = 8.0;
    /// Leave each query image out of its own results.
    bool holdout = false;
};

struct BenchRow {
    Method method;
    ImageId query_image;
    std::optional<double> acc;
    QueryReport report;
};

struct MethodSummary {
    Method method;
    std::size_t queries = 0;
    double mean_bucket_bytes = 0.0;
    double mean_bucket_files_read = 0.0;
    double mean_files_skipped = 0.0;
    double mean_data_bytes = 0.0;
    std::optional<double> mean_acc;
};

struct BenchReport {
    std::vector<ImageId> queries;
    std::vector<BenchRow> rows;
    std::vector<MethodSummary> summaries;
    /// Borda mean bucket bytes minus engine mean bucket bytes.
    std::optional<double> io_savings_bytes;
    std::uint64_t bucket_bytes = 0;
    std::uint64_t bitmap_bytes = 0;
    double overhead_ratio = 0.0;

    const MethodSummary* summary(Method method) const;
};

/// Seeded sample of distinct image ids, in sampling order.
std::vector<ImageId> sample_queries(std::uint32_t image_count, std::uint32_t count, std::uint64_t seed);

/// Exact top-k by image similarity at `radius`, as a report with zero IO.
/// Honours params.excluded_image.
QueryReport exact_query(const QueryImage& query, const Dataset& data, const Params& params, double radius);

/// `index` may be null when only the exact method is requested.
BenchReport run_bench(const IndexReader* index, const Dataset& data, const BenchConfig& config);

nlohmann::json bench_to_json(const BenchReport& report, const BenchConfig& config, bool include_timing = false);
/// RFC 4180 CSV: one "query" row per (method, query) and one "mean" row per method.
std::string bench_to_csv(const BenchReport& report, bool include_timing = false);

}  // namespace bimagelsh
