#include "bimagelsh/report.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "bimagelsh/bench.hpp"
#include "bimagelsh/data.hpp"
#include "bimagelsh/errors.hpp"
#include "test_util.hpp"

using namespace bimagelsh;
using bimagelsh::testing::TempDir;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto end = text.find("\r\n", start);
        EXPECT_NE(end, std::string::npos);
        std::vector<std::string> cells;
        std::stringstream line(text.substr(start, end - start));
        std::string cell;
        while (std::getline(line, cell, ',')) cells.push_back(cell);
        if (end > start && text[end - 1] == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
        start = end + 2;
    }
    return rows;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(2.0), "2");
    EXPECT_EQ(format_double(1.0 / 3.0), "0.3333333333333333");
    EXPECT_EQ(std::stod(format_double(0.000475)), 0.000475);
}

TEST(ParamsJson, RoundTrip) {
    Params p;
    p.m = 12;
    p.l = 7;
    p.gamma = 0.125;
    p.useful_rule = UsefulRule::LiteralCDist;
    p.seed = 99;
    const Params back = params_from_json(params_to_json(p));
    EXPECT_EQ(params_to_json(back), params_to_json(p));
    EXPECT_EQ(back.useful_rule, UsefulRule::LiteralCDist);
    EXPECT_EQ(back.seed, 99u);
}

TEST(ManifestJson, RoundTripAndErrors) {
    TempDir dir("manifest");
    const auto data = bimagelsh::testing::random_dataset(6, 5, 4, 1);
    const auto manifest = build_index(data, Params{}, dir.path());
    const auto text = manifest_to_json(manifest).dump(2);
    const auto back = manifest_from_json_text(text);
    EXPECT_EQ(manifest_to_json(back).dump(2), text);
    EXPECT_EQ(back.bucket_bytes(), manifest.bucket_bytes());

    EXPECT_THROW(manifest_from_json_text("{"), FormatError);
    EXPECT_THROW(manifest_from_json_text("{}"), FormatError);
    auto wrong = manifest_to_json(manifest);
    wrong["format"] = "something-else";
    EXPECT_THROW(manifest_from_json_text(wrong.dump()), FormatError);
}

TEST(QueryReportJson, TimingOnlyOnRequest) {
    QueryReport r;
    r.method = "engine";
    r.top_k = {{3, 0.5, 0.5, 0.25}, {1, 0.25, 0.25, 0.5}};
    r.stop_reason = StopReason::S1;
    r.final_radius_exponent = 2;
    r.final_radius = 4.0;
    r.io.bucket_bytes_read = 1000;
    r.wall_time_ms = 12.5;
    const auto plain = query_report_to_json(r);
    EXPECT_FALSE(plain.contains("wallTimeMs"));
    EXPECT_EQ(plain["stopReason"], "S1");
    EXPECT_EQ(plain["topK"][0]["rank"], 1);
    EXPECT_EQ(plain["topK"][0]["imageId"], 3);
    EXPECT_EQ(plain["topK"][1]["cDist"], 0.5);
    EXPECT_EQ(plain["io"]["bucketBytesRead"], 1000);
    EXPECT_EQ(query_report_to_json(r, true)["wallTimeMs"], 12.5);

    QueryReport b;
    b.method = "borda";
    b.top_k = {{3, 99.0, std::nullopt, std::nullopt}};
    const auto bj = query_report_to_json(b);
    EXPECT_FALSE(bj["topK"][0].contains("ci"));
}

TEST(Bench, CsvAndJsonAgree) {
    TempDir dir("bench");
    SyntheticSpec spec;
    spec.images = 20;
    spec.per_image = 8;
    spec.dim = 6;
    spec.categories = 4;
    const auto data = generate_synthetic(spec);
    build_index(data, Params{}, dir.path());
    const IndexReader index(dir.path());
    BenchConfig config;
    config.num_queries = 3;
    config.params.k = 4;
    config.params.k_prime = 10;
    const auto report = run_bench(&index, data, config);
    ASSERT_EQ(report.rows.size(), 9u);
    ASSERT_EQ(report.queries.size(), 3u);

    const auto j = bench_to_json(report, config);
    const auto csv = parse_csv(bench_to_csv(report));
    ASSERT_EQ(csv.size(), 1u + 9u + 3u);
    EXPECT_EQ(csv[0].size(), 11u);
    for (std::size_t r = 0; r < 9; ++r) {
        const auto& row = csv[r + 1];
        const auto& jr = j["rows"][r];
        ASSERT_EQ(row.size(), 11u);
        EXPECT_EQ(row[0], "query");
        EXPECT_EQ(row[1], jr["method"]);
        EXPECT_EQ(std::stoul(row[2]), jr["queryImage"].get<ImageId>());
        EXPECT_EQ(std::stod(row[3]), jr["acc"].get<double>());
        EXPECT_EQ(std::stoull(row[4]), jr["io"]["bucketBytesRead"].get<std::uint64_t>());
        EXPECT_EQ(std::stoull(row[7]), jr["io"]["dataBytesRead"].get<std::uint64_t>());
        EXPECT_EQ(row[8], jr["stopReason"]);
    }
    for (std::size_t s = 0; s < 3; ++s) {
        const auto& row = csv[10 + s];
        EXPECT_EQ(row[0], "mean");
        EXPECT_EQ(std::stod(row[4]), j["summaries"][s]["meanBucketBytesRead"].get<double>());
        EXPECT_EQ(std::stod(row[3]), j["summaries"][s]["meanAcc"].get<double>());
    }
    const auto* exact = report.summary(Method::Exact);
    ASSERT_NE(exact, nullptr);
    EXPECT_EQ(exact->mean_bucket_bytes, 0.0);
    EXPECT_EQ(exact->mean_data_bytes, 0.0);
    EXPECT_EQ(j["index"]["overheadRatio"].get<double>(), index.manifest().overhead_ratio());

    // Deterministic without timings.
    EXPECT_EQ(bench_to_csv(run_bench(&index, data, config)), bench_to_csv(report));
}

TEST(Bench, SampleQueriesDistinctAndSeeded) {
    const auto a = sample_queries(50, 20, 3);
    EXPECT_EQ(a, sample_queries(50, 20, 3));
    EXPECT_EQ(std::set<ImageId>(a.begin(), a.end()).size(), 20u);
    for (ImageId id : a) EXPECT_LT(id, 50u);
    EXPECT_NE(a, sample_queries(50, 20, 4));
    EXPECT_THROW(sample_queries(5, 6, 1), DomainError);
    EXPECT_THROW(parse_method("qalsh"), DomainError);
    EXPECT_EQ(parse_method("borda"), Method::Borda);
}
