#include "mfg/report.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "mfg/config.hpp"

namespace mfg {

namespace {

inline uint32_t rotl(uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

}  // namespace

std::string sha1_hex(const std::string& bytes) {
    uint32_t h0 = 0x67452301u, h1 = 0xEFCDAB89u, h2 = 0x98BADCFEu, h3 = 0x10325476u,
             h4 = 0xC3D2E1F0u;
    const uint64_t ml = static_cast<uint64_t>(bytes.size()) * 8;
    std::string msg = bytes;
    msg.push_back(static_cast<char>(0x80));
    while (msg.size() % 64 != 56) msg.push_back('\0');
    for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((ml >> (8 * i)) & 0xFF));

    std::array<uint32_t, 80> w{};
    for (size_t chunk = 0; chunk < msg.size(); chunk += 64) {
        for (int i = 0; i < 16; ++i) {
            w[static_cast<size_t>(i)] = 0;
            for (int b = 0; b < 4; ++b)
                w[static_cast<size_t>(i)] =
                    (w[static_cast<size_t>(i)] << 8) |
                    static_cast<uint8_t>(msg[chunk + static_cast<size_t>(4 * i + b)]);
        }
        for (int i = 16; i < 80; ++i)
            w[static_cast<size_t>(i)] = rotl(w[static_cast<size_t>(i - 3)] ^ w[static_cast<size_t>(i - 8)] ^
                                                 w[static_cast<size_t>(i - 14)] ^ w[static_cast<size_t>(i - 16)],
                                             1);
        uint32_t a = h0, b = h1, c = h2, d = h3, e = h4;
        for (int i = 0; i < 80; ++i) {
            uint32_t f, k;
            if (i < 20) { f = (b & c) | (~b & d); k = 0x5A827999u; }
            else if (i < 40) { f = b ^ c ^ d; k = 0x6ED9EBA1u; }
            else if (i < 60) { f = (b & c) | (b & d) | (c & d); k = 0x8F1BBCDCu; }
            else { f = b ^ c ^ d; k = 0xCA62C1D6u; }
            const uint32_t tmp = rotl(a, 5) + f + e + k + w[static_cast<size_t>(i)];
            e = d; d = c; c = rotl(b, 30); b = a; a = tmp;
        }
        h0 += a; h1 += b; h2 += c; h3 += d; h4 += e;
    }
    char out[41];
    std::snprintf(out, sizeof out, "%08x%08x%08x%08x%08x", h0, h1, h2, h3, h4);
    return out;
}

std::string git_blob_hash(const std::string& bytes) {
    std::string header = "blob " + std::to_string(bytes.size());
    header.push_back('\0');
    return sha1_hex(header + bytes);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("report: cannot open " + path);
    out << content;
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw std::runtime_error("report: cannot create directory " + path);
}

void write_report_json(const std::string& out_dir, const json& report) {
    ensure_directory(out_dir);
    write_text_file(out_dir + "/report.json", report.dump(2) + "\n");
}

void write_meta_json(const std::string& out_dir, const std::string& command) {
    ensure_directory(out_dir);
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    json meta;
    meta["command"] = command;
    meta["generated_at"] = stamp;
    meta["version"] = "0.1.0";
    write_text_file(out_dir + "/meta.json", meta.dump(2) + "\n");
}

json report_skeleton(const std::string& experiment,
                     const std::map<std::string, std::string>& resolved_config) {
    json r;
    r["experiment"] = experiment;
    r["config"] = json::object();
    for (const auto& [key, value] : resolved_config) r["config"][key] = value;
    r["config_hash"] = git_blob_hash(canonical_config_text(resolved_config));
    return r;
}

}  // namespace mfg
