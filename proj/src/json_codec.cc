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

#include "json_codec.h"

namespace modelgate::json {

namespace {

[[noreturn]] void SchemaFail(const std::string& message) {
  throw Error(ErrorCode::kSchemaError, message);
}

}  // namespace

Json Parse(std::string_view bytes) {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

std::string Dump(const Json& j) {
  try {
    return j.dump();
  } catch (const nlohmann::json::type_error& e) {
    throw Error(ErrorCode::kInvariantViolation, e.what());
  }
}

void ExpectObject(const Json& j, const char* what) {
  if (!j.is_object()) SchemaFail(std::string(what) + " must be a JSON object");
}

const Json& Require(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    SchemaFail(std::string("missing required field '") + key + "'");
  }
  return *it;
}

std::string RequireString(const Json& obj, const char* key) {
  const Json& v = Require(obj, key);
  if (!v.is_string()) SchemaFail(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double RequireNumber(const Json& obj, const char* key) {
  const Json& v = Require(obj, key);
  if (!v.is_number()) SchemaFail(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

int64_t RequireInt(const Json& obj, const char* key) {
  const Json& v = Require(obj, key);
  if (!v.is_number_integer()) {
    SchemaFail(std::string("field '") + key + "' must be an integer");
  }
  return v.get<int64_t>();
}

bool RequireBool(const Json& obj, const char* key) {
  const Json& v = Require(obj, key);
  if (!v.is_boolean()) SchemaFail(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::optional<std::string> OptionalString(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) SchemaFail(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

double NumberOr(const Json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number()) SchemaFail(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

int64_t IntOr(const Json& obj, const char* key, int64_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number_integer()) {
    SchemaFail(std::string("field '") + key + "' must be an integer");
  }
  return it->get<int64_t>();
}

bool BoolOr(const Json& obj, const char* key, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) SchemaFail(std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

Json OrNa(const std::optional<std::string>& value) {
  return value ? Json(*value) : Json("n/a");
}

Json OrNa(const std::optional<double>& value) {
  return value ? Json(*value) : Json("n/a");
}

}  // namespace modelgate::json
