// Copyright 2026 The NRTW Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace nrtw::util {

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string base64_encode(std::string_view bytes);
/// Throws kFormat on malformed input.
std::string base64_decode(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never observe a
/// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Appends little-endian IEEE-754 binary32 values.
void append_f32_le(std::string& out, std::span<const float> values);
/// Decodes `count` little-endian binary32 values starting at `offset`.
void read_f32_le(std::string_view bytes, std::size_t offset, std::span<float> out);

}  // namespace nrtw::util
