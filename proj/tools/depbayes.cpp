#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "depbayes/json_io.hpp"
#include "depbayes/laws.hpp"
#include "depbayes/lens.hpp"

namespace {

using nlohmann::json;
using namespace depbayes;

struct Options {
  std::string model_path;
  double tol = 1e-9;
  bool tol_given = false;
  std::string output = "json";
};

void emit(const json& j, const Options& opt) {
  if (opt.output == "pretty") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << j.dump() << "\n";
  }
}

GaussInvertOptions gauss_opts(const Options& opt) {
  // --tol overrides the gaussian rank cutoff only when given explicitly
  return GaussInvertOptions{opt.tol_given ? opt.tol : 1e-10, true};
}

const char* instance_name(const AnyMap& m) {
  return std::holds_alternative<StochMap>(m) ? "finite" : "gaussian";
}

void require_same_instance(const AnyMap& a, const AnyMap& b) {
  if (a.index() != b.index()) {
    throw InstanceMismatch(std::string("cannot combine a ") + instance_name(a) +
                           " entry with a " + instance_name(b) + " one");
  }
}

json cmd_push(const Model& model, const std::string& state_name,
              const std::string& morphism_name) {
  const AnyMap& pi = lookup_state(model, state_name);
  const AnyMap& f = lookup_morphism(model, morphism_name);
  require_same_instance(pi, f);
  if (const auto* p = std::get_if<StochMap>(&pi)) {
    return state_to_json(compose(*p, std::get<StochMap>(f)));
  }
  return state_to_json(compose(std::get<GaussMap>(pi), std::get<GaussMap>(f)));
}

template <class M>
json supported_invert_json(const M& f, const M& pi, const Options& opt) {
  const auto ctx = InversionContext<M>::make(f, pi);
  M g = [&] {
    if constexpr (std::is_same_v<M, StochMap>) {
      return to_supported(bayes_invert(f, pi, opt.tol_given ? opt.tol : 1e-12),
                          ctx);
    } else {
      return to_supported(bayes_invert(f, pi, gauss_opts(opt)), ctx);
    }
  }();
  return json{
      {"morphism", morphism_to_json(AnyMap(g))},
      {"dom_support",
       {{"carrier", object_to_json(AnyObject(ctx.sup_cod.carrier))},
        {"section", morphism_to_json(AnyMap(ctx.sup_cod.section))}}},
      {"cod_support",
       {{"carrier", object_to_json(AnyObject(ctx.sup_dom.carrier))},
        {"section", morphism_to_json(AnyMap(ctx.sup_dom.section))}}},
  };
}

json cmd_invert(const Model& model, const std::string& state_name,
                const std::string& morphism_name, bool supported,
                const Options& opt) {
  const AnyMap& pi = lookup_state(model, state_name);
  const AnyMap& f = lookup_morphism(model, morphism_name);
  require_same_instance(pi, f);
  if (const auto* p = std::get_if<StochMap>(&pi)) {
    const StochMap& fm = std::get<StochMap>(f);
    if (supported) return supported_invert_json(fm, *p, opt);
    return morphism_to_json(
        AnyMap(bayes_invert(fm, *p, opt.tol_given ? opt.tol : 1e-12)));
  }
  const GaussMap& fm = std::get<GaussMap>(f);
  const GaussMap& p = std::get<GaussMap>(pi);
  if (supported) return supported_invert_json(fm, p, opt);
  return morphism_to_json(AnyMap(bayes_invert(fm, p, gauss_opts(opt))));
}

json cmd_support(const Model& model, const std::string& state_name,
                 const Options& opt) {
  const AnyMap& pi = lookup_state(model, state_name);
  const auto pack = [](const auto& sup) {
    return json{{"carrier", object_to_json(AnyObject(sup.carrier))},
                {"section", morphism_to_json(AnyMap(sup.section))},
                {"retraction", morphism_to_json(AnyMap(sup.retraction))}};
  };
  if (const auto* p = std::get_if<StochMap>(&pi)) {
    return pack(supportOf(*p, opt.tol_given ? opt.tol : 1e-12));
  }
  return pack(supportOf(std::get<GaussMap>(pi), opt.tol_given ? opt.tol : 1e-10));
}

json load_obs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open observation file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("observation file: ") + e.what());
  }
  if (!j.is_array()) {
    throw ValidationError("observation file must hold a JSON array");
  }
  return j;
}

json cmd_filter(const Model& model, const std::string& dynamics_name,
                const std::string& observe_name, const std::string& init_name,
                const std::string& obs_path, const Options& opt) {
  const AnyMap& dynamics = lookup_morphism(model, dynamics_name);
  const AnyMap& observe = lookup_morphism(model, observe_name);
  const AnyMap& init = lookup_state(model, init_name);
  require_same_instance(init, dynamics);
  require_same_instance(init, observe);
  const json obs = load_obs_file(obs_path);

  json beliefs = json::array();
  double total_ll = 0.0;
  if (const auto* p0 = std::get_if<StochMap>(&init)) {
    const StochMap& dyn = std::get<StochMap>(dynamics);
    const StochMap& obs_map = std::get<StochMap>(observe);
    StochMap belief = *p0;
    for (std::size_t step = 0; step < obs.size(); ++step) {
      if (!obs[step].is_string()) {
        throw ValidationError("observation " + std::to_string(step) +
                              " is not a label");
      }
      const std::string label = obs[step].get<std::string>();
      const Eigen::Index idx = obs_map.cod().index_of(label);
      if (idx < 0) {
        throw ValidationError("observation " + std::to_string(step) +
                              ": unknown label '" + label + "'");
      }
      try {
        auto [next, ll] = filter_step(belief, dyn, obs_map, idx,
                                      opt.tol_given ? opt.tol : 1e-12);
        belief = std::move(next);
        total_ll += ll;
      } catch (const UnsupportedObservation& e) {
        throw UnsupportedObservation("step " + std::to_string(step) + ": " +
                                     e.what());
      }
      beliefs.push_back(state_to_json(AnyMap(belief)));
    }
  } else {
    const GaussMap& dyn = std::get<GaussMap>(dynamics);
    const GaussMap& obs_map = std::get<GaussMap>(observe);
    GaussMap belief = std::get<GaussMap>(init);
    for (std::size_t step = 0; step < obs.size(); ++step) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(obs[step].size()));
      if (!obs[step].is_array()) {
        throw ValidationError("observation " + std::to_string(step) +
                              " is not a vector");
      }
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = obs[step][static_cast<std::size_t>(i)].get<double>();
      }
      auto [next, ll] = filter_step(belief, dyn, obs_map, v,
                                    opt.tol_given ? opt.tol : 1e-10);
      belief = std::move(next);
      total_ll += ll;
      beliefs.push_back(state_to_json(AnyMap(belief)));
    }
  }
  return json{{"beliefs", beliefs}, {"log_likelihood", total_ll}};
}

int cmd_laws(std::uint64_t seed, int cases, int max_dim,
             const std::string& instance, const std::string& law,
             const Options& opt) {
  laws::CaseGen gen;
  gen.seed = seed;
  gen.cases = cases;
  gen.max_dim = max_dim;
  if (instance == "finite") {
    gen.instances = laws::Instance::Finite;
  } else if (instance == "gaussian") {
    gen.instances = laws::Instance::Gaussian;
  } else if (instance == "both") {
    gen.instances = laws::Instance::Both;
  } else {
    throw ValidationError("--instance must be finite, gaussian, or both");
  }
  std::vector<laws::LawReport> reports;
  if (law.empty()) {
    reports = laws::run_all(gen);
  } else {
    reports = laws::run_law(law, gen);
  }
  json out = json::array();
  for (const auto& r : reports) out.push_back(laws::report_to_json(r));
  emit(out, opt);
  return laws::all_passed(reports) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dependent Bayesian lenses over finite and gaussian channels"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--model", opt.model_path, "path to a JSON model file");
  auto* tol_opt = app.add_option("--tol", opt.tol, "numeric tolerance");
  app.add_option("--output", opt.output, "json or pretty")
      ->check(CLI::IsMember({"json", "pretty"}));

  std::string state_name, morphism_name;
  auto* push = app.add_subcommand("push", "push a state through a morphism");
  push->add_option("state", state_name, "state name")->required();
  push->add_option("morphism", morphism_name, "morphism name")->required();

  bool supported = false;
  auto* invert = app.add_subcommand("invert", "Bayesian inverse at a prior");
  invert->add_option("state", state_name, "prior state name")->required();
  invert->add_option("morphism", morphism_name, "morphism name")->required();
  invert->add_flag("--supported", supported,
                   "return the inverse with support, with carriers");

  auto* support = app.add_subcommand("support", "support of a state");
  support->add_option("state", state_name, "state name")->required();

  std::uint64_t seed = 1;
  int cases = 100;
  int max_dim = 6;
  std::string instance = "both";
  std::string law;
  auto* laws_cmd = app.add_subcommand("laws", "run the randomized law suite");
  laws_cmd->add_option("--seed", seed, "base seed");
  laws_cmd->add_option("--cases", cases, "cases per law and instance");
  laws_cmd->add_option("--max-dim", max_dim, "largest object dimension");
  laws_cmd->add_option("--instance", instance, "finite, gaussian, or both");
  laws_cmd->add_option("--law", law, "run a single law from the catalogue");

  std::string dynamics_name, observe_name, init_name, obs_path;
  auto* filter = app.add_subcommand("filter", "sequential Bayesian filtering");
  filter->add_option("--dynamics", dynamics_name, "dynamics morphism name")
      ->required();
  filter->add_option("--observe", observe_name, "observation morphism name")
      ->required();
  filter->add_option("--init", init_name, "initial belief state name")
      ->required();
  filter->add_option("--obs-file", obs_path, "JSON array of observations")
      ->required();

  CLI11_PARSE(app, argc, argv);
  opt.tol_given = tol_opt->count() > 0;

  try {
    if (laws_cmd->parsed()) {
      return cmd_laws(seed, cases, max_dim, instance, law, opt);
    }
    if (opt.model_path.empty()) {
      throw ValidationError("--model is required for this command");
    }
    const Model model = load_model_file(opt.model_path);
    if (push->parsed()) {
      emit(cmd_push(model, state_name, morphism_name), opt);
    } else if (invert->parsed()) {
      emit(cmd_invert(model, state_name, morphism_name, supported, opt), opt);
    } else if (support->parsed()) {
      emit(cmd_support(model, state_name, opt), opt);
    } else if (filter->parsed()) {
      emit(cmd_filter(model, dynamics_name, observe_name, init_name, obs_path,
                      opt),
           opt);
    }
    return 0;
  } catch (const UnsupportedObservation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const EmptySupport& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const DomainMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InstanceMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const SignatureMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NotAProduct& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IndexOutOfRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
