/*
 * Copyright 2026 The Fuseval Authors
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

#include "fuseval/zip.h"

#include <zlib.h>

#include <cstdint>

#include "fuseval/error.h"

namespace fuseval {
namespace {

constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01
constexpr std::uint16_t kDeflate = 8;

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get(std::string_view in, std::size_t pos, int bytes) {
  if (pos + bytes > in.size()) throw Error(ErrorCode::kIo, "truncated zip archive");
  std::uint32_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(in[pos + i]);
  }
  return v;
}

std::string deflate_raw(std::string_view data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(ErrorCode::kIo, "deflate initialisation failed");
  }
  std::string out(deflateBound(&zs, data.size()), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::kIo, "deflate failed");
  out.resize(zs.total_out);
  return out;
}

std::string inflate_raw(std::string_view data, std::size_t size) {
  if (size == 0) return {};
  std::string out(size, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
    throw Error(ErrorCode::kIo, "inflate initialisation failed");
  }
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != size) {
    throw Error(ErrorCode::kIo, "corrupt deflate stream");
  }
  return out;
}

}  // namespace

std::string write_zip(const std::map<std::string, std::string>& files) {
  std::string out;
  std::string central;
  for (const auto& [name, content] : files) {
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()),
              static_cast<uInt>(content.size())));
    const std::string packed = deflate_raw(content);
    const std::uint32_t offset = static_cast<std::uint32_t>(out.size());

    put32(out, 0x04034b50);
    put16(out, 20);
    put16(out, 0);
    put16(out, kDeflate);
    put16(out, kDosTime);
    put16(out, kDosDate);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(packed.size()));
    put32(out, static_cast<std::uint32_t>(content.size()));
    put16(out, static_cast<std::uint16_t>(name.size()));
    put16(out, 0);
    out += name;
    out += packed;

    put32(central, 0x02014b50);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0);
    put16(central, kDeflate);
    put16(central, kDosTime);
    put16(central, kDosDate);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(packed.size()));
    put32(central, static_cast<std::uint32_t>(content.size()));
    put16(central, static_cast<std::uint16_t>(name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central += name;
  }
  const std::uint32_t central_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(files.size()));
  put16(out, static_cast<std::uint16_t>(files.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, central_offset);
  put16(out, 0);
  return out;
}

std::map<std::string, std::string> read_zip(std::string_view archive) {
  std::map<std::string, std::string> files;
  std::size_t pos = 0;
  while (pos + 4 <= archive.size() && get(archive, pos, 4) == 0x04034b50) {
    if (pos + 30 > archive.size()) throw Error(ErrorCode::kIo, "truncated zip header");
    const std::uint32_t method = get(archive, pos + 8, 2);
    const std::uint32_t crc = get(archive, pos + 14, 4);
    const std::uint32_t packed_size = get(archive, pos + 18, 4);
    const std::uint32_t size = get(archive, pos + 22, 4);
    const std::uint32_t name_len = get(archive, pos + 26, 2);
    const std::uint32_t extra_len = get(archive, pos + 28, 2);
    const std::size_t data = pos + 30 + name_len + extra_len;
    if (data + packed_size > archive.size()) throw Error(ErrorCode::kIo, "truncated zip entry");
    std::string name(archive.substr(pos + 30, name_len));
    std::string_view packed = archive.substr(data, packed_size);
    std::string content;
    if (method == 0) {
      content = std::string(packed);
    } else if (method == kDeflate) {
      content = inflate_raw(packed, size);
    } else {
      throw Error(ErrorCode::kIo, "unsupported zip compression method");
    }
    const std::uint32_t actual = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()),
              static_cast<uInt>(content.size())));
    if (actual != crc) throw Error(ErrorCode::kIo, "crc mismatch for " + name);
    files.emplace(std::move(name), std::move(content));
    pos = data + packed_size;
  }
  // Local entries must be followed by the central directory or its end record.
  const bool tail = pos + 4 <= archive.size() && (get(archive, pos, 4) == 0x02014b50 ||
                                                  get(archive, pos, 4) == 0x06054b50);
  if (!tail) throw Error(ErrorCode::kIo, "not a zip archive");
  return files;
}

}  // namespace fuseval
