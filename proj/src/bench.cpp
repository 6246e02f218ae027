#include "bimagelsh/bench.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "bimagelsh/baseline.hpp"
#include "bimagelsh/data.hpp"
#include "bimagelsh/errors.hpp"
#include "bimagelsh/report.hpp"

namespace bimagelsh {

using nlohmann::json;

std::string to_string(Method method) {
    switch (method) {
        case Method::Engine: return "engine";
        case Method::Borda: return "borda";
        case Method::Exact: return "exact";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "engine") return Method::Engine;
    if (name == "borda") return Method::Borda;
    if (name == "exact") return Method::Exact;
    throw DomainError("unknown method '" + name + "' (expected engine, borda or exact)");
}

const MethodSummary* BenchReport::summary(Method method) const {
    for (const auto& s : summaries) {
        if (s.method == method) return &s;
    }
    return nullptr;
}

std::vector<ImageId> sample_queries(std::uint32_t image_count, std::uint32_t count, std::uint64_t seed) {
    if (count > image_count) {
        throw DomainError("cannot sample " + std::to_string(count) + " queries from " + std::to_string(image_count) +
                          " images");
    }
    std::vector<ImageId> ids(image_count);
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates.
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::uint32_t> pick(i, image_count - 1);
        std::swap(ids[i], ids[pick(rng)]);
    }
    ids.resize(count);
    return ids;
}

QueryReport exact_query(const QueryImage& query, const Dataset& data, const Params& params, double radius) {
    const auto excluded = params.excluded_image;
    const auto started = std::chrono::steady_clock::now();
    std::size_t k = std::min<std::size_t>(params.k, data.image_count());
    if (excluded) k = std::min(k + 1, data.image_count());
    QueryReport report;
    report.method = "exact";
    report.stop_reason = StopReason::Exact;
    report.final_radius = radius;
    for (const auto& scored : exact_top_k_images(query, k, radius, data)) {
        if (excluded && scored.image_id == *excluded) continue;
        if (report.top_k.size() == params.k) break;
        report.top_k.push_back({scored.image_id, scored.similarity, std::nullopt, std::nullopt});
    }
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return report;
}

BenchReport run_bench(const IndexReader* index, const Dataset& data, const BenchConfig& config) {
    const bool needs_index = std::any_of(config.methods.begin(), config.methods.end(),
                                         [](Method m) { return m != Method::Exact; });
    if (needs_index && index == nullptr) {
        throw DomainError("engine and borda methods need an index");
    }
    if (index) {
        check_dataset(index->manifest(), data);
    }
    if (!data.has_categories()) {
        std::cerr << "warning: dataset has no categories; accuracy is omitted\n";
    }

    BenchReport out;
    out.queries = sample_queries(static_cast<std::uint32_t>(data.image_count()), config.num_queries, config.seed);
    if (index) {
        out.bucket_bytes = index->manifest().bucket_bytes();
        out.bitmap_bytes = index->manifest().bitmap_bytes();
        out.overhead_ratio = index->manifest().overhead_ratio();
    }

    for (Method method : config.methods) {
        MethodSummary summary;
        summary.method = method;
        double acc_sum = 0.0;
        for (ImageId query_image : out.queries) {
            const QueryImage query = QueryImage::from_image(data, query_image);
            Params params = config.params;
            if (config.holdout) params.excluded_image = query_image;

            BenchRow row{method, query_image, std::nullopt, {}};
            switch (method) {
                case Method::Engine: row.report = query_top_k(query, params, *index, data); break;
                case Method::Borda: row.report = borda_query(query, params, *index, data); break;
                case Method::Exact:
                    row.report = exact_query(query, data, params, config.exact_radius);
                    break;
            }
            if (data.has_categories()) {
                std::vector<ImageId> returned;
                for (const auto& r : row.report.top_k) returned.push_back(r.image_id);
                row.acc = accuracy(returned, *data.category_of(query_image), data, config.params.k);
                acc_sum += *row.acc;
            }
            summary.mean_bucket_bytes += static_cast<double>(row.report.io.bucket_bytes_read);
            summary.mean_bucket_files_read += static_cast<double>(row.report.io.bucket_files_read);
            summary.mean_files_skipped += static_cast<double>(row.report.io.bucket_files_skipped);
            summary.mean_data_bytes += static_cast<double>(row.report.io.data_bytes_read);
            ++summary.queries;
            out.rows.push_back(std::move(row));
        }
        if (summary.queries > 0) {
            const auto q = static_cast<double>(summary.queries);
            summary.mean_bucket_bytes /= q;
            summary.mean_bucket_files_read /= q;
            summary.mean_files_skipped /= q;
            summary.mean_data_bytes /= q;
            if (data.has_categories()) summary.mean_acc = acc_sum / q;
        }
        out.summaries.push_back(summary);
    }

    const auto* engine = out.summary(Method::Engine);
    const auto* borda = out.summary(Method::Borda);
    if (engine && borda) {
        out.io_savings_bytes = borda->mean_bucket_bytes - engine->mean_bucket_bytes;
    }
    return out;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json bench_to_json(const BenchReport& report, const BenchConfig& config, bool include_timing) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        json r = query_report_to_json(row.report, include_timing);
        r["queryImage"] = row.query_image;
        r["acc"] = optional_number(row.acc);
        rows.push_back(std::move(r));
    }
    json summaries = json::array();
    for (const auto& s : report.summaries) {
        summaries.push_back(json{{"method", to_string(s.method)},
                                 {"queries", s.queries},
                                 {"meanBucketBytesRead", s.mean_bucket_bytes},
                                 {"meanBucketMB", s.mean_bucket_bytes / 1e6},
                                 {"meanBucketFilesRead", s.mean_bucket_files_read},
                                 {"meanBucketFilesSkipped", s.mean_files_skipped},
                                 {"meanDataBytesRead", s.mean_data_bytes},
                                 {"meanAcc", optional_number(s.mean_acc)}});
    }
    json methods = json::array();
    for (Method m : config.methods) methods.push_back(to_string(m));
    return json{{"config",
                 {{"methods", std::move(methods)},
                  {"numQueries", config.num_queries},
                  {"seed", config.seed},
                  {"exactRadius", config.exact_radius},
                  {"holdout", config.holdout},
                  {"params", params_to_json(config.params)}}},
                {"queries", report.queries},
                {"rows", std::move(rows)},
                {"summaries", std::move(summaries)},
                {"ioSavingsBytes", optional_number(report.io_savings_bytes)},
                {"ioSavingsMB", report.io_savings_bytes ? json(*report.io_savings_bytes / 1e6) : json(nullptr)},
                {"index",
                 {{"bucketBytes", report.bucket_bytes},
                  {"bitmapBytes", report.bitmap_bytes},
                  {"overheadRatio", report.overhead_ratio}}}};
}

std::string bench_to_csv(const BenchReport& report, bool include_timing) {
    std::ostringstream out;
    out << "row_type,method,query_image,acc,bucket_bytes_read,bucket_files_read,bucket_files_skipped,"
           "data_bytes_read,stop_reason,final_radius_exponent,returned";
    if (include_timing) out << ",wall_time_ms";
    out << "\r\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& row : report.rows) {
        const auto& r = row.report;
        std::string returned;
        for (const auto& img : r.top_k) {
            if (!returned.empty()) returned += ' ';
            returned += std::to_string(img.image_id);
        }
        out << "query," << to_string(row.method) << ',' << row.query_image << ',' << opt(row.acc) << ','
            << r.io.bucket_bytes_read << ',' << r.io.bucket_files_read << ',' << r.io.bucket_files_skipped << ','
            << r.io.data_bytes_read << ',' << to_string(r.stop_reason) << ',' << r.final_radius_exponent << ','
            << returned;
        if (include_timing) out << ',' << format_double(r.wall_time_ms);
        out << "\r\n";
    }
    for (const auto& s : report.summaries) {
        out << "mean," << to_string(s.method) << ",," << opt(s.mean_acc) << ',' << format_double(s.mean_bucket_bytes)
            << ',' << format_double(s.mean_bucket_files_read) << ',' << format_double(s.mean_files_skipped) << ','
            << format_double(s.mean_data_bytes) << ",,,";
        if (include_timing) out << ',';
        out << "\r\n";
    }
    return out.str();
}

}  // namespace bimagelsh
