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

// Minimal deterministic zip archives (deflate, no extra fields).

#pragma once

#include <map>
#include <string>
#include <string_view>

namespace fuseval {

// Entries are written in name order with a fixed 1980-01-01 timestamp, so
// equal inputs give equal bytes.
std::string write_zip(const std::map<std::string, std::string>& files);

// Reads archives produced by write_zip (stored or deflated entries).
// Throws kIo on malformed input.
std::map<std::string, std::string> read_zip(std::string_view archive);

}  // namespace fuseval
