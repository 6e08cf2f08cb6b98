#pragma once

#include <map>
#include <string>

#include <json.hpp>

namespace mfg {

using json = nlohmann::ordered_json;

// SHA-1 of the bytes, and the git blob form sha1("blob <len>\0" + bytes)
// used as the content hash of resolved configurations.
std::string sha1_hex(const std::string& bytes);
std::string git_blob_hash(const std::string& bytes);

// Report emission contract: report.json and the CSVs are byte-stable
// functions of (config, seeds); anything time-dependent goes to
// meta.json only.
void write_text_file(const std::string& path, const std::string& content);
void write_report_json(const std::string& out_dir, const json& report);
void write_meta_json(const std::string& out_dir, const std::string& command);

// Embeds the resolved config and its content hash into a report skeleton.
json report_skeleton(const std::string& experiment,
                     const std::map<std::string, std::string>& resolved_config);

void ensure_directory(const std::string& path);

}  // namespace mfg
