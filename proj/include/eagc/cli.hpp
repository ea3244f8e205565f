#pragma once

// Command-line front end. Subcommands: gen-data, train-ref, train, lemma1,
// metrics. Exit codes: 0 success, 1 usage or config error, 2 data error,
// 3 numerical abort.

#include <iosfwd>
#include <string>
#include <vector>

namespace eagc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace eagc::cli
