#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace depbayes::laws {

enum class Instance { Finite, Gaussian, Both };
enum class Mutation { None, SkipGaussSymmetrize };

/// Seeded case generator configuration. Identical configurations reproduce
/// identical case streams bit-exactly, independent of thread count.
struct CaseGen {
  std::uint64_t seed = 1;
  int max_dim = 6;
  double sparsity = 0.3;
  Instance instances = Instance::Both;
  int cases = 100;
  int priors_per_case = 50;  // for family-level laws
};

struct Failure {
  int case_index;
  double residual;
};

struct ShrunkCase {
  int max_dim;
  std::uint64_t seed;
  double residual;
};

struct LawReport {
  std::string law;
  std::string instance;  // "finite" or "gaussian"
  int cases_run = 0;
  double tolerance = 0.0;
  double max_residual = 0.0;
  std::vector<Failure> failures;
  std::optional<ShrunkCase> shrunk;

  bool passed() const { return failures.empty(); }
};

const std::vector<std::string>& law_catalogue();

// One report per applicable instance. Cases run concurrently; reports are
// merged by case index so parallelism never changes output.
// Throws UnknownLaw for names outside the catalogue.
std::vector<LawReport> run_law(const std::string& name, const CaseGen& gen,
                               std::optional<double> tol_override = {},
                               Mutation mutation = Mutation::None);

std::vector<LawReport> run_all(const CaseGen& gen,
                               Mutation mutation = Mutation::None);

bool all_passed(const std::vector<LawReport>& reports);

nlohmann::json report_to_json(const LawReport& report);

}  // namespace depbayes::laws
