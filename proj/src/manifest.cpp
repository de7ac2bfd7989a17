#include "casc/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "casc/errors.hpp"

namespace casc {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

} // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    std::uint64_t h = kFnvOffset;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= kFnvPrime;
        }
        if (!in) break;
    }
    if (in.bad()) throw io_error("read failed: " + path);
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

ordered_json manifest_skeleton(const std::string& subcommand, std::uint64_t seed, int threads) {
    ordered_json m;
    m["tool"] = kToolName;
    m["version"] = kToolVersion;
    m["subcommand"] = subcommand;
    m["seed"] = seed;
    m["threads"] = threads;
    m["config"] = ordered_json::object();
    m["inputs"] = ordered_json::array();
    m["outputs"] = ordered_json::array();
    return m;
}

void manifest_add_file(ordered_json& manifest, const char* list, const std::string& path) {
    ordered_json entry;
    entry["path"] = path;
    entry["bytes"] = static_cast<std::uint64_t>(std::filesystem::file_size(path));
    entry["fnv1a64"] = hex64(fnv1a64_file(path));
    manifest[list].push_back(std::move(entry));
}

void write_manifest_file(const std::string& path, const ordered_json& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << manifest.dump(2) << '\n';
    out.flush();
    if (!out) throw io_error("write failed: " + path);
}

} // namespace casc
