#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bai/model.hpp"
#include "bai/sim.hpp"
#include "bai/strategies.hpp"

namespace bai {

/// Typed contents of a config document. Every field is optional at parse time
/// because each subcommand needs a different subset; the accessors below
/// enforce what a subcommand requires.
struct ConfigDocument {
  std::optional<std::size_t> arms;
  std::optional<std::vector<double>> means;
  std::optional<std::vector<double>> variances;
  std::optional<VarianceSupport> variance_support;
  std::optional<MeanRule> mean_rule;
  std::optional<GapBounds> gap_bounds;
  std::vector<StrategySpec> strategies;
  std::vector<std::uint64_t> budgets;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;

  friend bool operator==(const ConfigDocument&, const ConfigDocument&) = default;

  /// A full experiment; `seed` replaces the document seed when given.
  /// Throws ValidationError if a required key is missing.
  [[nodiscard]] ExperimentConfig experiment(std::optional<std::uint64_t> seed) const;
};

/// Parses and validates a JSON config. Throws ParseError (malformed JSON,
/// unknown key, wrong type; the message names the line or key) or
/// ValidationError (model invariant violated).
[[nodiscard]] ConfigDocument parse_config(std::string_view text);

/// Canonical JSON form; parse_config(config_to_json(c)) == c.
[[nodiscard]] std::string config_to_json(const ConfigDocument& config);

/// Writes `contents` to a sibling temporary file and renames it over `path`.
/// Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitValidation = 3,
  kExitNonConvergence = 4,
  kExitIo = 5,
  kExitInternal = 6,
};

/// Name of the environment variable holding the fallback seed.
inline constexpr const char* kSeedEnvVar = "BAI_SEED";

/// Runs the tool. args[0] is the program name. Results go to `out` unless a
/// file is requested; failures print one JSON line to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bai
