#pragma once

#include <string>
#include <vector>

namespace qspec::cli {

/// Entry point shared by the binary and the tests. Exit codes: 0 on
/// success, 1 on validation/usage errors, 2 when a fit did not converge
/// (results are still written with converged=false).
int run(const std::vector<std::string>& args);

int run(int argc, char** argv);

} // namespace qspec::cli
