#include "vicorpus/json_schema.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>

#include "vicorpus/error.hpp"
#include "vicorpus/utf8.hpp"

using nlohmann::json;

namespace vicorpus {

namespace {

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (v.is_number_float()) {
      const double d = v.get<double>();
      return std::isfinite(d) && std::floor(d) == d;
    }
    return false;
  }
  throw Error("unknown schema type " + type);
}

std::string escape_pointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out.push_back(c);
  }
  return out;
}

const std::regex& cached_regex(const std::string& pattern) {
  thread_local std::map<std::string, std::regex> cache;
  auto it = cache.find(pattern);
  if (it == cache.end()) it = cache.emplace(pattern, std::regex(pattern, std::regex::ECMAScript)).first;
  return it->second;
}

}  // namespace

JsonSchema::JsonSchema(json schema) : root_(std::move(schema)) {
  if (!root_.is_object()) throw Error("schema must be an object");
}

const json& JsonSchema::resolve(const json& schema) const {
  if (!schema.is_object() || !schema.contains("$ref")) return schema;
  const std::string ref = schema["$ref"].get<std::string>();
  if (ref.rfind("#/", 0) != 0) throw Error("only local schema refs are supported: " + ref);
  return root_.at(json::json_pointer(ref.substr(1)));
}

std::vector<std::string> JsonSchema::validate(const json& instance) const {
  std::vector<std::string> errors;
  check(root_, instance, "", errors, 0);
  return errors;
}

void JsonSchema::check(const json& schema_in, const json& v, const std::string& where, std::vector<std::string>& errors,
                       int depth) const {
  if (depth > 64) throw Error("schema recursion too deep");
  if (schema_in.is_object() && schema_in.contains("$ref")) check(resolve(schema_in), v, where, errors, depth + 1);
  const json& s = schema_in;
  if (s.is_boolean()) {
    if (!s.get<bool>()) errors.push_back(where + ": not allowed");
    return;
  }
  auto fail = [&](const std::string& msg) { errors.push_back((where.empty() ? "/" : where) + ": " + msg); };

  if (auto t = s.find("type"); t != s.end()) {
    bool ok = false;
    if (t->is_string()) {
      ok = has_type(v, t->get<std::string>());
    } else {
      for (const auto& alt : *t) ok = ok || has_type(v, alt.get<std::string>());
    }
    if (!ok) {
      fail("expected type " + t->dump() + ", got " + std::string(v.type_name()));
      return;
    }
  }
  if (auto c = s.find("const"); c != s.end() && *c != v) fail("expected constant " + c->dump());
  if (auto e = s.find("enum"); e != s.end()) {
    if (std::find(e->begin(), e->end(), v) == e->end()) fail("value " + v.dump() + " not in " + e->dump());
  }

  if (v.is_number()) {
    const double d = v.get<double>();
    if (auto m = s.find("minimum"); m != s.end() && d < m->get<double>()) fail("below minimum " + m->dump());
    if (auto m = s.find("maximum"); m != s.end() && d > m->get<double>()) fail("above maximum " + m->dump());
    if (auto m = s.find("exclusiveMinimum"); m != s.end() && d <= m->get<double>()) {
      fail("not above exclusiveMinimum " + m->dump());
    }
  }

  if (v.is_string()) {
    const auto& str = v.get_ref<const std::string&>();
    const auto len = utf8::decode(str).size();
    if (auto m = s.find("minLength"); m != s.end() && len < m->get<std::size_t>()) fail("string shorter than " + m->dump());
    if (auto m = s.find("maxLength"); m != s.end() && len > m->get<std::size_t>()) fail("string longer than " + m->dump());
    if (auto p = s.find("pattern"); p != s.end() && !std::regex_search(str, cached_regex(p->get<std::string>()))) {
      fail("string does not match " + p->dump());
    }
  }

  if (v.is_array()) {
    if (auto m = s.find("minItems"); m != s.end() && v.size() < m->get<std::size_t>()) fail("fewer than " + m->dump() + " items");
    if (auto m = s.find("maxItems"); m != s.end() && v.size() > m->get<std::size_t>()) fail("more than " + m->dump() + " items");
    std::size_t first_free = 0;
    if (auto p = s.find("prefixItems"); p != s.end()) {
      for (std::size_t i = 0; i < p->size() && i < v.size(); ++i) check((*p)[i], v[i], where + "/" + std::to_string(i), errors, depth + 1);
      first_free = p->size();
    }
    if (auto items = s.find("items"); items != s.end()) {
      for (std::size_t i = first_free; i < v.size(); ++i) check(*items, v[i], where + "/" + std::to_string(i), errors, depth + 1);
    }
  }

  if (v.is_object()) {
    if (auto req = s.find("required"); req != s.end()) {
      for (const auto& k : *req) {
        if (!v.contains(k.get<std::string>())) fail("missing required property " + k.dump());
      }
    }
    const auto props = s.find("properties");
    for (const auto& [k, child] : v.items()) {
      const std::string path = where + "/" + escape_pointer(k);
      if (props != s.end() && props->contains(k)) {
        check((*props)[k], child, path, errors, depth + 1);
      } else if (auto extra = s.find("additionalProperties"); extra != s.end()) {
        if (extra->is_boolean()) {
          if (!extra->get<bool>()) fail("unexpected property \"" + k + "\"");
        } else {
          check(*extra, child, path, errors, depth + 1);
        }
      }
    }
  }

  if (auto any = s.find("anyOf"); any != s.end()) {
    bool ok = false;
    for (const auto& alt : *any) {
      std::vector<std::string> sub;
      check(alt, v, where, sub, depth + 1);
      if (sub.empty()) {
        ok = true;
        break;
      }
    }
    if (!ok) fail("matches none of anyOf");
  }
  if (auto one = s.find("oneOf"); one != s.end()) {
    int matches = 0;
    for (const auto& alt : *one) {
      std::vector<std::string> sub;
      check(alt, v, where, sub, depth + 1);
      if (sub.empty()) ++matches;
    }
    if (matches != 1) fail("matches " + std::to_string(matches) + " of oneOf, expected exactly 1");
  }
}

}  // namespace vicorpus
