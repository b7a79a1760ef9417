#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace vicorpus {

/// Validator for the JSON-Schema subset the bundled schemas use: type,
/// properties, required, additionalProperties, items, prefixItems,
/// min/maxItems, minimum, maximum, exclusiveMinimum, minLength, maxLength,
/// pattern, enum, const, anyOf, oneOf and local `#/$defs/...` refs.
class JsonSchema {
 public:
  explicit JsonSchema(nlohmann::json schema);

  /// One message per violation, each prefixed with a JSON pointer.
  std::vector<std::string> validate(const nlohmann::json& instance) const;
  bool valid(const nlohmann::json& instance) const { return validate(instance).empty(); }

 private:
  void check(const nlohmann::json& schema, const nlohmann::json& value, const std::string& where,
             std::vector<std::string>& errors, int depth) const;
  const nlohmann::json& resolve(const nlohmann::json& schema) const;

  nlohmann::json root_;
};

}  // namespace vicorpus
