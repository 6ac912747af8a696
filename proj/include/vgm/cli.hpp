#pragma once

#include <iosfwd>
#include <string>
#include <vector>

// Command-line surface. `run` takes the argv tail (no program name) so the
// commands are scriptable from tests as well as from the vgm binary.
//
// Exit codes: 0 success (mine: converged), 2 mine stopped at max_iters,
// 3 validation/parse/schema error, 4 I/O error.

namespace vgm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMaxIters = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitIo = 4;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vgm::cli
