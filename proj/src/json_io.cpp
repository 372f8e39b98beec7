#include "depbayes/json_io.hpp"

#include <fstream>

namespace depbayes {

namespace {

using nlohmann::json;

Eigen::MatrixXd parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) {
    throw ValidationError(where + ": expected a nested array");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) {
      throw ValidationError(where + ": row " + std::to_string(i) +
                            " is not an array");
    }
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError(where + ": row " + std::to_string(i) +
                            " has a different length");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& cell = row[static_cast<std::size_t>(k)];
      if (!cell.is_number()) {
        throw ValidationError(where + ": entry (" + std::to_string(i) + ", " +
                              std::to_string(k) + ") is not a number");
      }
      m(i, k) = cell.get<double>();
    }
  }
  if (cols < 0) m.resize(0, 0);
  return m;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& where) {
  if (!j.is_array()) {
    throw ValidationError(where + ": expected an array of numbers");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const json& cell = j[static_cast<std::size_t>(i)];
    if (!cell.is_number()) {
      throw ValidationError(where + ": entry " + std::to_string(i) +
                            " is not a number");
    }
    v(i) = cell.get<double>();
  }
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

AnyObject parse_inline_object(const json& ref, const std::string& where) {
  if (ref.is_array()) {
    std::vector<std::string> labels;
    for (const json& l : ref) {
      if (!l.is_string()) {
        throw ValidationError(where + ": labels must be strings");
      }
      labels.push_back(l.get<std::string>());
    }
    try {
      return make_fin_object(std::move(labels));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (ref.is_object() && ref.contains("dim")) {
    if (!ref["dim"].is_number_integer() || ref["dim"].get<int>() < 0) {
      throw ValidationError(where + ": \"dim\" must be a non-negative integer");
    }
    return make_gauss_object(ref["dim"].get<int>());
  }
  throw ValidationError(where +
                        ": expected a name, a label list, or {\"dim\": n}");
}

AnyObject resolve_object_impl(const std::map<std::string, AnyObject>& objects,
                              const json& ref, const std::string& where) {
  if (ref.is_string()) {
    const auto it = objects.find(ref.get<std::string>());
    if (it == objects.end()) {
      throw ValidationError(where + ": unknown object '" +
                            ref.get<std::string>() + "'");
    }
    return it->second;
  }
  return parse_inline_object(ref, where);
}

AnyMap parse_morphism(const std::map<std::string, AnyObject>& objects,
                      const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("dom") || !j.contains("cod")) {
    throw ValidationError(where + ": expected {dom, cod, ...}");
  }
  const AnyObject dom = resolve_object_impl(objects, j["dom"], where + ".dom");
  const AnyObject cod = resolve_object_impl(objects, j["cod"], where + ".cod");
  if (j.contains("rows")) {
    const auto* d = std::get_if<FinObject>(&dom);
    const auto* c = std::get_if<FinObject>(&cod);
    if (!d || !c) {
      throw ValidationError(where + ": \"rows\" requires finite dom and cod");
    }
    try {
      StochMap f(*d, *c, parse_matrix(j["rows"], where + ".rows"));
      validate_stochastic(f);
      return f;
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (j.contains("A") && j.contains("b") && j.contains("Sigma")) {
    const auto* d = std::get_if<GaussObject>(&dom);
    const auto* c = std::get_if<GaussObject>(&cod);
    if (!d || !c) {
      throw ValidationError(where + ": \"A\"/\"b\"/\"Sigma\" require gaussian"
                            " dom and cod");
    }
    try {
      GaussMap f(*d, *c, parse_matrix(j["A"], where + ".A"),
                 parse_vector(j["b"], where + ".b"),
                 parse_matrix(j["Sigma"], where + ".Sigma"));
      validate_gauss(f);
      return f;
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  throw ValidationError(where + ": expected \"rows\" or \"A\"/\"b\"/\"Sigma\"");
}

AnyMap parse_state(const std::map<std::string, AnyObject>& objects, const json& j,
                   const std::string& where) {
  if (!j.is_object() || !j.contains("object")) {
    throw ValidationError(where + ": expected {object, probs} or"
                          " {object, mean, cov}");
  }
  const AnyObject target =
      resolve_object_impl(objects, j["object"], where + ".object");
  if (j.contains("probs")) {
    const auto* x = std::get_if<FinObject>(&target);
    if (!x) throw ValidationError(where + ": \"probs\" requires a finite object");
    try {
      StochMap pi =
          fin_state(*x, parse_vector(j["probs"], where + ".probs").transpose());
      validate_stochastic(pi);
      return pi;
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (j.contains("mean") && j.contains("cov")) {
    const auto* x = std::get_if<GaussObject>(&target);
    if (!x) {
      throw ValidationError(where + ": \"mean\"/\"cov\" require a gaussian"
                            " object");
    }
    try {
      GaussMap pi = gauss_state(*x, parse_vector(j["mean"], where + ".mean"),
                                parse_matrix(j["cov"], where + ".cov"));
      validate_gauss(pi);
      return pi;
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  throw ValidationError(where + ": expected \"probs\" or \"mean\"/\"cov\"");
}

}  // namespace

Model load_model(const json& j) {
  if (!j.is_object()) throw ValidationError("model: top level must be an object");
  Model model;
  if (j.contains("objects")) {
    if (!j["objects"].is_object()) {
      throw ValidationError("model.objects: expected a name -> object mapping");
    }
    for (const auto& [name, ref] : j["objects"].items()) {
      model.objects.emplace(name,
                            parse_inline_object(ref, "objects." + name));
    }
  }
  if (j.contains("morphisms")) {
    if (!j["morphisms"].is_object()) {
      throw ValidationError("model.morphisms: expected a name -> morphism mapping");
    }
    for (const auto& [name, def] : j["morphisms"].items()) {
      model.morphisms.emplace(
          name, parse_morphism(model.objects, def, "morphisms." + name));
    }
  }
  if (j.contains("states")) {
    if (!j["states"].is_object()) {
      throw ValidationError("model.states: expected a name -> state mapping");
    }
    for (const auto& [name, def] : j["states"].items()) {
      model.states.emplace(name,
                           parse_state(model.objects, def, "states." + name));
    }
  }
  return model;
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("model file '" + path + "': " + e.what());
  }
  return load_model(j);
}

AnyObject resolve_object(const Model& model, const json& ref) {
  return resolve_object_impl(model.objects, ref, "object reference");
}

json object_to_json(const AnyObject& obj) {
  if (const auto* x = std::get_if<FinObject>(&obj)) {
    json labels = json::array();
    for (const auto& l : x->labels) labels.push_back(l);
    return labels;
  }
  return json{{"dim", std::get<GaussObject>(obj).dim}};
}

json morphism_to_json(const AnyMap& f) {
  if (const auto* s = std::get_if<StochMap>(&f)) {
    return json{{"dom", object_to_json(s->dom())},
                {"cod", object_to_json(s->cod())},
                {"rows", matrix_to_json(s->entries())}};
  }
  const GaussMap& g = std::get<GaussMap>(f);
  return json{{"dom", object_to_json(g.dom())},
              {"cod", object_to_json(g.cod())},
              {"A", matrix_to_json(g.A())},
              {"b", vector_to_json(g.b())},
              {"Sigma", matrix_to_json(g.Sigma())}};
}

json state_to_json(const AnyMap& pi) {
  if (const auto* s = std::get_if<StochMap>(&pi)) {
    return json{{"object", object_to_json(s->cod())},
                {"probs", vector_to_json(s->entries().row(0).transpose())}};
  }
  const GaussMap& g = std::get<GaussMap>(pi);
  return json{{"object", object_to_json(g.cod())},
              {"mean", vector_to_json(g.b())},
              {"cov", matrix_to_json(g.Sigma())}};
}

const AnyMap& lookup_state(const Model& model, const std::string& name) {
  const auto it = model.states.find(name);
  if (it == model.states.end()) {
    throw ValidationError("unknown state '" + name + "'");
  }
  return it->second;
}

const AnyMap& lookup_morphism(const Model& model, const std::string& name) {
  const auto it = model.morphisms.find(name);
  if (it == model.morphisms.end()) {
    throw ValidationError("unknown morphism '" + name + "'");
  }
  return it->second;
}

}  // namespace depbayes
