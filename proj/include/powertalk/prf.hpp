/*
 * Copyright 2026 the powertalk authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace powertalk::proto {

using Bytes = std::vector<std::uint8_t>;

/// HMAC-SHA256 of `data` under `key` (32-byte output).
Bytes hmac_sha256(std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> data);

/// Counter-mode expansion of the keyed hash:
/// block_i = HMAC(key, label || 0x00 || context || i), concatenated and
/// truncated to out_len bytes.
Bytes prf_expand(std::span<const std::uint8_t> key, std::string_view label,
                 std::span<const std::uint8_t> context, std::size_t out_len);

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(std::string_view hex);  // throws powertalk::ConfigError

}  // namespace powertalk::proto
