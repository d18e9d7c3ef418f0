#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "epm/model.hpp"

namespace epm {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitValidation = 2, kExitNumerical = 3, kExitVerification = 4 };

/// Applies one `key=value` override. Keys: delta, gamma, gamma12 (two-mode
/// aliases), detunings.j, coherent.j.k, squeezing.j.k, decoherence.j.k with
/// 1-based indices; the Hermitian or symmetric partner entry follows along.
void apply_override(QuadraticSystem& sys, const std::string& key, Complex value);
void apply_override(QuadraticSystem& sys, const std::string& assignment);

/// Runs the ep-moments command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epm
