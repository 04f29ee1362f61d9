// Copyright 2026 The judgebias Authors.
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

#include <string>
#include <vector>

namespace judgebias {

std::string read_file(const std::string& path);

/// Write via a temp file in the same directory, then rename into place.
void atomic_write_file(const std::string& path, const std::string& contents);

/// Split one CSV record into fields. Supports RFC 4180 quoting ("" escapes a
/// quote inside a quoted field). The record must not span lines.
std::vector<std::string> split_csv_record(const std::string& line, char delim);

/// Quote a field if it contains the delimiter, a quote, or a newline.
std::string csv_quote(const std::string& field, char delim);

std::string lowercase(std::string s);
std::string trim(const std::string& s);

}  // namespace judgebias
