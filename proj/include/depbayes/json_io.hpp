#pragma once

#include <map>
#include <string>
#include <variant>

#include <json.hpp>

#include "depbayes/support.hpp"

namespace depbayes {

using AnyObject = std::variant<FinObject, GaussObject>;
using AnyMap = std::variant<StochMap, GaussMap>;

/// A loaded model file: named objects, morphisms and states. Finite and
/// gaussian entries may coexist; commands reject cross-instance composition.
struct Model {
  std::map<std::string, AnyObject> objects;
  std::map<std::string, AnyMap> morphisms;
  std::map<std::string, AnyMap> states;
};

// Validates everything at load time; errors name the offending entry.
Model load_model(const nlohmann::json& j);
Model load_model_file(const std::string& path);

// Object references: a name from the model, inline ["a", "b"] for a finite
// object, or inline {"dim": n} for a gaussian one.
AnyObject resolve_object(const Model& model, const nlohmann::json& ref);

// Emitted fragments reload as valid model entries.
nlohmann::json object_to_json(const AnyObject& obj);
nlohmann::json morphism_to_json(const AnyMap& f);
nlohmann::json state_to_json(const AnyMap& pi);

const AnyMap& lookup_state(const Model& model, const std::string& name);
const AnyMap& lookup_morphism(const Model& model, const std::string& name);

}  // namespace depbayes
