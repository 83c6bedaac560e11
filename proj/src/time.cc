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

#include "modelgate/time.h"

#include <charconv>
#include <cstdio>

#include "modelgate/error.h"

namespace modelgate {

namespace {

using std::chrono::days;
using std::chrono::hours;
using std::chrono::milliseconds;
using std::chrono::minutes;
using std::chrono::seconds;

[[noreturn]] void Fail(std::string_view text) {
  throw Error(ErrorCode::kParseError,
              "invalid RFC 3339 timestamp '" + std::string(text) + "'");
}

int ReadDigits(std::string_view text, size_t pos, size_t count) {
  if (pos + count > text.size()) Fail(text);
  int value = 0;
  for (size_t i = pos; i < pos + count; ++i) {
    char c = text[i];
    if (c < '0' || c > '9') Fail(text);
    value = value * 10 + (c - '0');
  }
  return value;
}

void Expect(std::string_view text, size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) Fail(text);
}

}  // namespace

Clock SystemClock() {
  return [] {
    return std::chrono::time_point_cast<milliseconds>(
        std::chrono::system_clock::now());
  };
}

std::string FormatTimestamp(Timestamp t) {
  auto day = std::chrono::floor<days>(t);
  std::chrono::year_month_day ymd{day};
  std::chrono::hh_mm_ss<milliseconds> tod{t - day};
  char buf[40];
  int n = std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d",
                        static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()),
                        static_cast<unsigned>(ymd.day()),
                        static_cast<int>(tod.hours().count()),
                        static_cast<int>(tod.minutes().count()),
                        static_cast<int>(tod.seconds().count()));
  std::string out(buf, n);
  if (auto ms = tod.subseconds().count(); ms != 0) {
    std::snprintf(buf, sizeof(buf), ".%03d", static_cast<int>(ms));
    out += buf;
  }
  out += 'Z';
  return out;
}

std::string FormatDate(Timestamp t) {
  std::chrono::year_month_day ymd{std::chrono::floor<days>(t)};
  char buf[16];
  int n = std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u",
                        static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()),
                        static_cast<unsigned>(ymd.day()));
  return std::string(buf, n);
}

Timestamp ParseTimestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS[.fff...](Z|+HH:MM|-HH:MM)
  int year = ReadDigits(text, 0, 4);
  Expect(text, 4, '-');
  int month = ReadDigits(text, 5, 2);
  Expect(text, 7, '-');
  int day = ReadDigits(text, 8, 2);
  if (text.size() <= 10 || (text[10] != 'T' && text[10] != 't')) Fail(text);
  int hour = ReadDigits(text, 11, 2);
  Expect(text, 13, ':');
  int minute = ReadDigits(text, 14, 2);
  Expect(text, 16, ':');
  int second = ReadDigits(text, 17, 2);
  size_t pos = 19;
  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    size_t start = pos;
    int scale = 100;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      millis += (text[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) Fail(text);
  }
  if (pos >= text.size()) Fail(text);
  minutes offset{0};
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    int sign = text[pos] == '+' ? 1 : -1;
    int oh = ReadDigits(text, pos + 1, 2);
    Expect(text, pos + 3, ':');
    int om = ReadDigits(text, pos + 4, 2);
    offset = minutes(sign * (oh * 60 + om));
    pos += 6;
  } else {
    Fail(text);
  }
  if (pos != text.size()) Fail(text);

  std::chrono::year_month_day ymd{std::chrono::year{year},
                                  std::chrono::month{static_cast<unsigned>(month)},
                                  std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) Fail(text);
  Timestamp t = std::chrono::sys_days{ymd} + hours(hour) + minutes(minute) +
                seconds(second) + milliseconds(millis);
  return t - offset;
}

}  // namespace modelgate
