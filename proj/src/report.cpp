#include "bimagelsh/report.hpp"

#include <charconv>

#include "bimagelsh/errors.hpp"

namespace bimagelsh {

using nlohmann::json;

json params_to_json(const Params& p) {
    return json{{"m", p.m},
                {"w", p.w},
                {"c", p.c},
                {"l", p.l},
                {"gamma", p.gamma},
                {"uthres", p.uthres},
                {"k", p.k},
                {"k_prime", p.k_prime},
                {"v_images", p.v_images},
                {"v_prime_points", p.v_prime_points},
                {"max_radius_exponent", p.max_radius_exponent},
                {"seed", p.seed},
                {"useful_rule", p.useful_rule == UsefulRule::LiteralCDist ? "literal-cdist" : "verified-similarity"}};
}

Params params_from_json(const json& j) {
    Params p;
    p.m = j.at("m").get<std::uint32_t>();
    p.w = j.at("w").get<double>();
    p.c = j.at("c").get<double>();
    p.l = j.at("l").get<std::uint32_t>();
    p.gamma = j.at("gamma").get<double>();
    p.uthres = j.at("uthres").get<double>();
    p.k = j.at("k").get<std::uint32_t>();
    p.k_prime = j.at("k_prime").get<std::uint32_t>();
    p.v_images = j.at("v_images").get<std::uint32_t>();
    p.v_prime_points = j.at("v_prime_points").get<std::uint32_t>();
    p.max_radius_exponent = j.at("max_radius_exponent").get<std::uint32_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    const auto rule = j.at("useful_rule").get<std::string>();
    if (rule == "literal-cdist") {
        p.useful_rule = UsefulRule::LiteralCDist;
    } else if (rule == "verified-similarity") {
        p.useful_rule = UsefulRule::VerifiedSimilarity;
    } else {
        throw FormatError("unknown useful_rule '" + rule + "'");
    }
    return p;
}

json manifest_to_json(const IndexManifest& m) {
    json projections = json::array();
    for (std::size_t i = 0; i < m.cells.size(); ++i) {
        json cells = json::array();
        for (const auto& c : m.cells[i]) {
            cells.push_back(json::array({c.cell, c.entries, c.bytes}));
        }
        projections.push_back(json{{"index", i}, {"catalog_bytes", m.catalog_bytes[i]}, {"cells", std::move(cells)}});
    }
    return json{{"format", "bimagelsh-index"},
                {"version", 1},
                {"n", m.n},
                {"S", m.images},
                {"d", m.dim},
                {"params", params_to_json(m.params)},
                {"projections", std::move(projections)},
                {"totals",
                 {{"bucket_files", m.bucket_file_count()},
                  {"bucket_bytes", m.bucket_bytes()},
                  {"bitmap_bytes", m.bitmap_bytes()},
                  {"overhead_ratio", m.overhead_ratio()}}}};
}

IndexManifest manifest_from_json_text(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (j.at("format") != "bimagelsh-index" || j.at("version") != 1) {
            throw FormatError("not a bimagelsh index manifest");
        }
        IndexManifest m;
        m.n = j.at("n").get<std::uint64_t>();
        m.images = j.at("S").get<std::uint64_t>();
        m.dim = j.at("d").get<std::uint64_t>();
        m.params = params_from_json(j.at("params"));
        for (const auto& proj : j.at("projections")) {
            std::vector<CellInfo> cells;
            for (const auto& c : proj.at("cells")) {
                cells.push_back({c.at(0).get<std::int64_t>(), c.at(1).get<std::uint32_t>(), c.at(2).get<std::uint64_t>()});
            }
            m.cells.push_back(std::move(cells));
            m.catalog_bytes.push_back(proj.at("catalog_bytes").get<std::uint64_t>());
        }
        return m;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
}

json query_report_to_json(const QueryReport& r, bool include_timing) {
    json top = json::array();
    for (std::size_t rank = 0; rank < r.top_k.size(); ++rank) {
        const auto& img = r.top_k[rank];
        json entry{{"rank", rank + 1}, {"imageId", img.image_id}, {"score", img.score}};
        if (img.ci) entry["ci"] = *img.ci;
        if (img.c_dist) entry["cDist"] = *img.c_dist;
        top.push_back(std::move(entry));
    }
    json out{{"method", r.method},
             {"topK", std::move(top)},
             {"stopReason", to_string(r.stop_reason)},
             {"finalRadiusExponent", r.final_radius_exponent},
             {"finalRadius", r.final_radius},
             {"io",
              {{"bucketBytesRead", r.io.bucket_bytes_read},
               {"bucketFilesRead", r.io.bucket_files_read},
               {"bucketFilesSkipped", r.io.bucket_files_skipped},
               {"dataBytesRead", r.io.data_bytes_read}}}};
    if (include_timing) out["wallTimeMs"] = r.wall_time_ms;
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

}  // namespace bimagelsh
