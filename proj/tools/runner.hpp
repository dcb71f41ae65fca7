#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "tos/splitting.hpp"

namespace tos::runner {

using nlohmann::json;

// exit statuses: 0 converged, 1 config error, 2 max_iter reached, 3 divergence
enum Status : int { kOk = 0, kConfigError = 1, kMaxIter = 2, kDiverged = 3 };

struct CliOverrides {
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iter;
    std::optional<double> tol;
};

// Validates without iterating: returns every violation as "field: message".
std::vector<std::string> validate_config(const json& config);

// Executes one run and writes the trace CSV and summary. Diagnostic text for
// failures goes to err.
int run_config(const json& config, const CliOverrides& overrides, std::ostream& err);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace tos::runner
