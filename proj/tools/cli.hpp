#pragma once

#include <ostream>

namespace modalign::cli {

/// Exit codes: 0 success, 1 invalid input or usage, 2 runtime failure.
/// Failures also print {"error": <code>, "message": ...} on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace modalign::cli
