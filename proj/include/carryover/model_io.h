// Copyright 2026 The Carryover Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON documents for models. A model document has the top-level keys
// `schema_version`, `version`, `ewtg`, `dstg`, `gstg` and, for adapted
// models, `adaptation`. Field names follow the C++ struct members.

#ifndef CARRYOVER_MODEL_IO_H_
#define CARRYOVER_MODEL_IO_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "carryover/model.h"

namespace carryover {

inline constexpr int kSchemaVersion = 1;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// A GuiNode document lacks a property or carries an unknown one.
class PropertyClosureError : public ParseError {
 public:
  using ParseError::ParseError;
};

nlohmann::json ToJson(const AppModel& model);
nlohmann::json ToJson(const Ewtg& ewtg);
nlohmann::json ToJson(const GuiNode& node);
nlohmann::json ToJson(const GuiTree& tree);
nlohmann::json ToJson(const Action& action);
nlohmann::json ToJson(const Valuations& valuations);
nlohmann::json ToJson(const LayoutFingerprint& fingerprint);

// These throw ParseError naming the JSON pointer of the offending value.
AppModel ModelFromJson(const nlohmann::json& doc);
Ewtg EwtgFromJson(const nlohmann::json& doc);
GuiNode GuiNodeFromJson(const nlohmann::json& doc);
GuiTree GuiTreeFromJson(const nlohmann::json& doc);
Action ActionFromJson(const nlohmann::json& doc);

// Validates first; throws ValidationError listing every dangling reference.
std::string SerializeModel(const AppModel& model);
AppModel DeserializeModel(std::string_view text);

// Reads a whole file; throws std::runtime_error on I/O failure.
std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view content);
nlohmann::json ParseJsonText(std::string_view text);

AppModel LoadModel(const std::filesystem::path& path);
void SaveModel(const AppModel& model, const std::filesystem::path& path);

}  // namespace carryover

#endif  // CARRYOVER_MODEL_IO_H_
