// Copyright 2026 The Modelgate Authors.
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

#ifndef MODELGATE_TIME_H_
#define MODELGATE_TIME_H_

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace modelgate {

// UTC instant with millisecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// Source of "now". The harness installs a virtual clock so runs are
// reproducible; servers use SystemClock().
using Clock = std::function<Timestamp()>;

Clock SystemClock();

// RFC 3339 in UTC: "2018-06-16T00:00:00Z", or "...:00.250Z" when the
// millisecond part is non-zero.
std::string FormatTimestamp(Timestamp t);

// Accepts RFC 3339 with optional fractional seconds and either "Z" or a
// numeric offset. Throws Error(kParseError).
Timestamp ParseTimestamp(std::string_view text);

// "2018-06-16".
std::string FormatDate(Timestamp t);

}  // namespace modelgate

#endif  // MODELGATE_TIME_H_
