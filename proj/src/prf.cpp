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
#include "powertalk/prf.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cstring>
#include <stdexcept>

#include "powertalk/errors.hpp"

namespace powertalk::proto {

Bytes hmac_sha256(std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> data) {
  Bytes out(32);
  unsigned int out_len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(),
           data.size(), out.data(), &out_len) == nullptr ||
      out_len != 32) {
    throw Error("HMAC-SHA256 computation failed");
  }
  return out;
}

Bytes prf_expand(std::span<const std::uint8_t> key, std::string_view label,
                 std::span<const std::uint8_t> context, std::size_t out_len) {
  Bytes out;
  out.reserve(out_len);
  std::uint8_t counter = 0;
  while (out.size() < out_len) {
    Bytes block_input;
    block_input.insert(block_input.end(), label.begin(), label.end());
    block_input.push_back(0x00);
    block_input.insert(block_input.end(), context.begin(), context.end());
    block_input.push_back(counter++);
    const Bytes block = hmac_sha256(key, block_input);
    const std::size_t take = std::min(block.size(), out_len - out.size());
    out.insert(out.end(), block.begin(), block.begin() + take);
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0x0f]);
  }
  return s;
}

namespace {
int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw ConfigError("hex", "odd number of hex digits");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const int hi = hex_digit(hex[2 * k]);
    const int lo = hex_digit(hex[2 * k + 1]);
    if (hi < 0 || lo < 0) {
      throw ConfigError("hex", "invalid hex digit");
    }
    out[k] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

}  // namespace powertalk::proto
