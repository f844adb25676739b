#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace invdiff::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitEarlyHalt = 2;

/// FNV-1a 64-bit digest of a byte string; every output file embeds the digest
/// of its config so results can be traced back to the exact input.
uint64_t fnv1a_digest(const std::string& bytes);

/// Outcome of one randomized invariance suite: an overall verdict plus the
/// per-check report lines.
struct SuiteRun {
    bool pass = false;
    std::vector<std::string> lines;
};

/// Run one invariance suite ("discrete", "equivariance", "first_approx" or
/// "schemes") over `elements` random group elements drawn from a fresh RNG.
/// Shared by cmd_invariance and the acceptance harness.
SuiteRun run_suite(const std::string& name, int elements, uint64_t seed);

/// Run one scheme and write `step,x,y,y_ref,abs_err,newton_iters,h` rows.
/// Returns 0 on a full run, 2 on an early halt (partial rows still written).
int cmd_solve(const std::string& config_path,
              const std::optional<std::string>& out_override,
              const std::optional<uint64_t>& seed_override);

/// Run an invariant scheme and a baseline on the same initial data and write
/// `x,err_invariant,err_standard,ratio` rows plus a summary line on stdout.
int cmd_compare(const std::string& config_path,
                const std::optional<std::string>& out_override,
                const std::optional<uint64_t>& seed_override);

/// Fit the eps-expansion of a scheme residual and write a JSON report with
/// the fitted coefficients and the closed-form comparison.
int cmd_diffapprox(const std::string& config_path,
                   const std::optional<std::string>& out_override,
                   const std::optional<uint64_t>& seed_override);

/// Run the randomized invariance suites and emit a text report; nonzero exit
/// on any failed check.
int cmd_invariance(const std::string& config_path,
                   const std::optional<std::string>& out_override,
                   const std::optional<uint64_t>& seed_override);

/// Parse argv (solve|compare|diffapprox|invariance --config ... [--out ...]
/// [--seed ...]) and dispatch. Exit codes: 0 success, 1 config error, 2
/// early halt / failed invariance check.
int run_cli(int argc, const char* const* argv);

}  // namespace invdiff::cli
