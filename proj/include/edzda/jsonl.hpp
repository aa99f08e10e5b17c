// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edzda/util.hpp"

namespace edzda {

using Json = nlohmann::ordered_json;

std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Atomic whole-file write: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

Json read_json_file(const std::filesystem::path& path);

void write_json_file(const std::filesystem::path& path, const Json& value);

}  // namespace edzda
