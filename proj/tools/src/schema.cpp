#include "krmap_cli/schema.hpp"

#include <cmath>
#include <stdexcept>

#include "krmap_cli/embedded_schemas.hpp"

namespace krmap::cli {

using nlohmann::json;

SchemaValidator::SchemaValidator(json schema) : root_(std::move(schema)) {}

std::vector<std::string> SchemaValidator::validate(const json& doc) const {
  std::vector<std::string> errors;
  check(root_, doc, "", errors);
  return errors;
}

const json& SchemaValidator::resolve(const std::string& ref) const {
  if (ref.rfind("#/", 0) != 0) throw std::invalid_argument("only local schema references are supported: " + ref);
  return root_.at(json::json_pointer(ref.substr(1)));
}

namespace {

bool has_type(const json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "boolean") return doc.is_boolean();
  if (type == "null") return doc.is_null();
  if (type == "number") return doc.is_number();
  if (type == "integer") {
    if (doc.is_number_integer()) return true;
    if (doc.is_number_float()) {
      const double v = doc.get<double>();
      return std::isfinite(v) && v == std::floor(v);
    }
    return false;
  }
  return false;
}

std::string at(const std::string& where) { return where.empty() ? "/" : where; }

}  // namespace

void SchemaValidator::check(const json& schema, const json& doc, const std::string& where,
                            std::vector<std::string>& errors) const {
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) errors.push_back(at(where) + ": no value allowed here");
    return;
  }
  if (auto it = schema.find("$ref"); it != schema.end()) check(resolve(it->get<std::string>()), doc, where, errors);

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_array()) {
      for (const auto& t : *it) ok = ok || has_type(doc, t.get<std::string>());
    } else {
      ok = has_type(doc, it->get<std::string>());
    }
    if (!ok) {
      errors.push_back(at(where) + ": expected type " + it->dump());
      return;
    }
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    bool found = false;
    for (const auto& v : *it) found = found || v == doc;
    if (!found) errors.push_back(at(where) + ": value " + doc.dump() + " is not one of " + it->dump());
  }
  if (auto it = schema.find("const"); it != schema.end() && *it != doc) {
    errors.push_back(at(where) + ": value must equal " + it->dump());
  }
  if (auto it = schema.find("anyOf"); it != schema.end()) {
    bool any = false;
    for (const auto& s : *it) {
      std::vector<std::string> sub;
      check(s, doc, where, sub);
      any = any || sub.empty();
    }
    if (!any) errors.push_back(at(where) + ": value matches none of the allowed alternatives");
  }
  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && v < it->get<double>()) {
      errors.push_back(at(where) + ": " + doc.dump() + " is below the minimum " + it->dump());
    }
    if (auto it = schema.find("maximum"); it != schema.end() && v > it->get<double>()) {
      errors.push_back(at(where) + ": " + doc.dump() + " exceeds the maximum " + it->dump());
    }
    if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && v <= it->get<double>()) {
      errors.push_back(at(where) + ": " + doc.dump() + " must be greater than " + it->dump());
    }
    if (auto it = schema.find("exclusiveMaximum"); it != schema.end() && v >= it->get<double>()) {
      errors.push_back(at(where) + ": " + doc.dump() + " must be less than " + it->dump());
    }
  }
  if (doc.is_string()) {
    if (auto it = schema.find("minLength"); it != schema.end() && doc.get<std::string>().size() < it->get<std::size_t>()) {
      errors.push_back(at(where) + ": string is too short");
    }
  }
  if (doc.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && doc.size() < it->get<std::size_t>()) {
      errors.push_back(at(where) + ": needs at least " + it->dump() + " items");
    }
    if (auto it = schema.find("maxItems"); it != schema.end() && doc.size() > it->get<std::size_t>()) {
      errors.push_back(at(where) + ": allows at most " + it->dump() + " items");
    }
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < doc.size(); ++i) check(*it, doc[i], where + "/" + std::to_string(i), errors);
    }
  }
  if (doc.is_object()) {
    const auto props = schema.find("properties");
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& r : *it) {
        if (!doc.contains(r.get<std::string>())) {
          errors.push_back(at(where) + ": missing required key \"" + r.get<std::string>() + "\"");
        }
      }
    }
    const auto extra = schema.find("additionalProperties");
    for (const auto& [key, value] : doc.items()) {
      const std::string path = where + "/" + key;
      if (props != schema.end() && props->contains(key)) {
        check(props->at(key), value, path, errors);
      } else if (extra != schema.end()) {
        if (extra->is_boolean() && !extra->get<bool>()) {
          errors.push_back(at(where) + ": unknown key \"" + key + "\"");
        } else if (extra->is_object()) {
          check(*extra, value, path, errors);
        }
      }
    }
  }
}

const json& run_config_schema() {
  static const json s = json::parse(embedded::kRunConfigSchema);
  return s;
}

const json& manifest_schema() {
  static const json s = json::parse(embedded::kManifestSchema);
  return s;
}

const json& diagnostics_schema() {
  static const json s = json::parse(embedded::kDiagnosticsSchema);
  return s;
}

}  // namespace krmap::cli
