// bimagelsh: build disk-backed image indexes, run image queries and benchmark
// the bitmap-pruned engine against Borda aggregation and the exact scan.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bimagelsh/baseline.hpp"
#include "bimagelsh/bench.hpp"
#include "bimagelsh/data.hpp"
#include "bimagelsh/engine.hpp"
#include "bimagelsh/errors.hpp"
#include "bimagelsh/index.hpp"
#include "bimagelsh/report.hpp"

namespace fs = std::filesystem;
using namespace bimagelsh;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitFormat = 2;

struct ParamFlags {
    Params params;
    std::uint32_t max_radius_exponent = 20;
    bool literal_cdist = false;

    void add_query_flags(CLI::App& app) {
        app.add_option("--k", params.k, "Number of images to return")->capture_default_str();
        app.add_option("--k-prime", params.k_prime, "Per-descriptor candidate target k'")->capture_default_str();
        app.add_option("--gamma", params.gamma, "Gamma-close threshold (fraction)")->capture_default_str();
        app.add_option("--uthres", params.uthres, "Minimum fraction of Maybe-useful images for a file read")
            ->capture_default_str();
        app.add_option("--v-images", params.v_images, "Allowed false-positive images (0 = k)");
        app.add_option("--v-prime", params.v_prime_points, "Allowed false-positive points per descriptor")
            ->capture_default_str();
        app.add_option("--l", params.l, "Collision threshold (0 = ceil(0.6 m))");
        app.add_option("--max-radius-exponent", params.max_radius_exponent, "Cap on virtual rehashing rounds")
            ->capture_default_str();
        app.add_flag("--literal-cdist", literal_cdist, "Useful images need cDist >= gamma instead of 1 - cDist >= gamma");
    }

    void add_hash_flags(CLI::App& app) {
        app.add_option("--m", params.m, "Number of projections (0 = 8*ceil(log2 n), at most 64)");
        app.add_option("--w", params.w, "Bucket width")->capture_default_str();
        app.add_option("--c", params.c, "Approximation ratio")->capture_default_str();
    }

    Params resolved() const {
        Params p = params;
        if (literal_cdist) p.useful_rule = UsefulRule::LiteralCDist;
        return p;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) {
        throw IoError("cannot write " + path.string());
    }
}

QueryImage load_query(const Dataset& data, std::optional<ImageId> image, const std::string& query_file) {
    if (image) {
        if (*image >= data.image_count()) {
            throw BoundsError("query image " + std::to_string(*image) + " does not exist");
        }
        return QueryImage::from_image(data, *image);
    }
    auto [dim, coords] = read_fvecs(query_file);
    return QueryImage(dim, std::move(coords));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bitmap-pruned LSH search over bags of descriptors"};
    app.require_subcommand(1);

    // generate
    SyntheticSpec synth;
    std::string gen_data, gen_map;
    auto* generate = app.add_subcommand("generate", "Write a synthetic clustered image dataset");
    generate->add_option("--images", synth.images, "Number of images")->capture_default_str();
    generate->add_option("--per-image", synth.per_image, "Descriptors per image")->capture_default_str();
    generate->add_option("--dim", synth.dim, "Dimensionality")->capture_default_str();
    generate->add_option("--categories", synth.categories, "Number of categories")->capture_default_str();
    generate->add_option("--spread", synth.spread, "Descriptor spread around the image centre")->capture_default_str();
    generate->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
    generate->add_option("--data", gen_data, "Output .fvecs path")->required();
    generate->add_option("--image-map", gen_map, "Output image map path")->required();

    // build
    ParamFlags build_flags;
    std::string build_data, build_map, build_index_dir;
    auto* build = app.add_subcommand("build", "Build an on-disk index");
    build->add_option("--data", build_data, ".fvecs or .bvecs descriptor file")->required();
    build->add_option("--image-map", build_map, "Image map (imageId[,category] per line)")->required();
    build->add_option("--index", build_index_dir, "Output index directory")->required();
    build->add_option("--seed", build_flags.params.seed, "Projection seed")->capture_default_str();
    build_flags.add_hash_flags(*build);
    build->add_option("--l", build_flags.params.l, "Default collision threshold (0 = ceil(0.6 m))");

    // query
    ParamFlags query_flags;
    std::string q_index, q_data, q_map, q_method = "engine", q_file;
    std::optional<ImageId> q_image;
    double q_radius = 8.0;
    bool q_holdout = false;
    bool q_timings = false;
    auto* query = app.add_subcommand("query", "Run one image query and print a JSON report");
    query->add_option("--index", q_index, "Index directory (not needed for --method exact)");
    query->add_option("--data", q_data, "Descriptor file the index was built from")->required();
    query->add_option("--image-map", q_map, "Image map")->required();
    query->add_option("--method", q_method, "engine, borda or exact")->capture_default_str();
    auto* image_opt = query->add_option("--query-image", q_image, "Use this dataset image as the query");
    auto* file_opt = query->add_option("--query-file", q_file, ".fvecs file holding the query descriptors");
    image_opt->excludes(file_opt);
    query->add_option("--radius", q_radius, "Radius of the exact image similarity")->capture_default_str();
    query->add_flag("--holdout", q_holdout, "Leave the query image out of the results");
    query->add_flag("--timings", q_timings, "Include wall-clock time");
    query_flags.add_query_flags(*query);
    query_flags.add_hash_flags(*query);
    query->add_option("--seed", query_flags.params.seed, "Ignored for indexed methods (the index seed is used)");

    // bench
    ParamFlags bench_flags;
    BenchConfig bench_config;
    std::string b_index, b_data, b_map, b_out;
    std::vector<std::string> b_methods{"engine", "borda", "exact"};
    bool b_timings = false;
    auto* bench = app.add_subcommand("bench", "Compare engine, borda and exact over sampled queries");
    bench->add_option("--index", b_index, "Index directory (not needed for exact-only runs)");
    bench->add_option("--data", b_data, "Descriptor file the index was built from")->required();
    bench->add_option("--image-map", b_map, "Image map with categories")->required();
    bench->add_option("--methods,--method", b_methods, "Methods to run")->delimiter(',')->capture_default_str();
    bench->add_option("--num-queries", bench_config.num_queries, "Number of sampled query images")
        ->capture_default_str();
    bench->add_option("--seed", bench_config.seed, "Query sampling seed")->capture_default_str();
    bench->add_option("--radius", bench_config.exact_radius, "Radius of the exact image similarity")
        ->capture_default_str();
    bench->add_flag("--holdout", bench_config.holdout, "Leave each query image out of its results");
    bench->add_flag("--timings", b_timings, "Include wall-clock times");
    bench->add_option("--out", b_out, "Output prefix: writes <out>.json and <out>.csv")->required();
    bench_flags.add_query_flags(*bench);
    bench_flags.add_hash_flags(*bench);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            const auto data = generate_synthetic(synth);
            export_dataset(data, gen_data, gen_map);
            std::cout << "wrote n=" << data.size() << " S=" << data.image_count() << " d=" << data.dim() << "\n";
        } else if (build->parsed()) {
            const auto data = load_dataset(build_data, build_map);
            const auto manifest = build_index(data, build_flags.resolved(), build_index_dir);
            std::cout << "n=" << manifest.n << " S=" << manifest.images << " d=" << manifest.dim
                      << " m=" << manifest.params.m << " l=" << manifest.params.l
                      << " files=" << manifest.bucket_file_count() << " bucket_bytes=" << manifest.bucket_bytes()
                      << " bitmap_bytes=" << manifest.bitmap_bytes()
                      << " overhead_ratio=" << format_double(manifest.overhead_ratio()) << "\n";
        } else if (query->parsed()) {
            const Method method = parse_method(q_method);
            if (!q_image && q_file.empty()) {
                throw DomainError("give --query-image or --query-file");
            }
            const auto data = load_dataset(q_data, q_map);
            const QueryImage q = load_query(data, q_image, q_file);
            Params params = query_flags.resolved();
            if (q_holdout && q_image) params.excluded_image = *q_image;
            QueryReport report;
            if (method == Method::Exact) {
                report = exact_query(q, data, params, q_radius);
            } else {
                if (q_index.empty()) {
                    throw DomainError("--index is required for method " + q_method);
                }
                const IndexReader index(q_index);
                report = method == Method::Engine ? query_top_k(q, params, index, data)
                                                  : borda_query(q, params, index, data);
            }
            std::cout << query_report_to_json(report, q_timings).dump(2) << "\n";
        } else if (bench->parsed()) {
            bench_config.methods.clear();
            for (const auto& name : b_methods) bench_config.methods.push_back(parse_method(name));
            bench_config.params = bench_flags.resolved();
            const auto data = load_dataset(b_data, b_map);
            std::optional<IndexReader> index;
            if (!b_index.empty()) index.emplace(b_index);
            const auto report = run_bench(index ? &*index : nullptr, data, bench_config);
            write_text(b_out + ".json", bench_to_json(report, bench_config, b_timings).dump(2) + "\n");
            write_text(b_out + ".csv", bench_to_csv(report, b_timings));
            for (const auto& s : report.summaries) {
                std::cout << to_string(s.method) << ": mean IndexIO " << format_double(s.mean_bucket_bytes / 1e6)
                          << " MB";
                if (s.mean_acc) std::cout << ", mean acc " << format_double(*s.mean_acc);
                std::cout << "\n";
            }
            if (report.io_savings_bytes) {
                std::cout << "IO savings: " << format_double(*report.io_savings_bytes / 1e6) << " MB per query\n";
            }
        }
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}
