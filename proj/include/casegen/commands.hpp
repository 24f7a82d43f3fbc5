#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace casegen::cli {

// Exit codes: configuration problems, runtime failures and run-directory
// corruption are distinguishable.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitCorruption = 4;

struct CommonOptions {
    std::optional<std::string> output;       // file (evaluate) or run parent dir (run/ablate)
    std::optional<int> parallelism;          // overrides config
    std::optional<std::uint64_t> seed;       // overrides config
    std::string format = "md";               // md | json
    bool verbose = false;
};

int cmd_evaluate(const std::string& candidates_path, const std::string& references_path,
                 const CommonOptions& options, std::ostream& out, std::ostream& err);

int cmd_run(const std::string& config_path, const std::optional<std::string>& story_id,
            const CommonOptions& options, std::ostream& out, std::ostream& err);

int cmd_ablate(const std::string& config_path, const CommonOptions& options, std::ostream& out,
               std::ostream& err);

int cmd_report(const std::string& run_dir, const CommonOptions& options, std::ostream& out,
               std::ostream& err);

int cmd_params(std::size_t m, std::size_t n, std::size_t r, int bits, std::ostream& out,
               std::ostream& err);

}  // namespace casegen::cli
