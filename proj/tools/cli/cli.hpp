// Experiment runner behind the sobolev_lab executable.
#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobolev_cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;

/// Bad user input: unknown config key, out-of-range parameter, unwritable directory.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// args[0] is the subcommand, e.g. {"landscape", "--dim", "2"}.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

/// Evaluates every acceptance criterion whose inputs exist in out_dir and
/// writes out_dir/report.json. Returns the same document.
nlohmann::json summarize(const std::filesystem::path& out_dir);

}  // namespace sobolev_cli
