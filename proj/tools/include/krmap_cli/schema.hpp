#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace krmap::cli {

// Validator for the JSON Schema subset used by the published schemas: type,
// enum, const, properties, required, additionalProperties, items, minItems,
// maxItems, minimum, maximum, exclusiveMinimum, exclusiveMaximum, minLength,
// anyOf and local $ref into $defs. Other keywords are ignored.
class SchemaValidator {
 public:
  explicit SchemaValidator(nlohmann::json schema);

  // Error messages with JSON-pointer locations; empty when valid.
  std::vector<std::string> validate(const nlohmann::json& doc) const;

 private:
  void check(const nlohmann::json& schema, const nlohmann::json& doc, const std::string& where,
             std::vector<std::string>& errors) const;
  const nlohmann::json& resolve(const std::string& ref) const;

  nlohmann::json root_;
};

// Published schemas compiled into the binary.
const nlohmann::json& run_config_schema();
const nlohmann::json& manifest_schema();
const nlohmann::json& diagnostics_schema();

}  // namespace krmap::cli
