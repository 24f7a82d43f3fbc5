#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "casegen/commands.hpp"

namespace {

void add_format_option(CLI::App* cmd, casegen::cli::CommonOptions& options) {
    cmd->add_option("--format", options.format, "Output format")
        ->check(CLI::IsMember({"json", "md"}))
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Test-case generation pipeline and evaluation harness"};
    app.require_subcommand(1);

    casegen::cli::CommonOptions options;
    app.add_flag("--verbose", options.verbose, "Verbose diagnostics");

    std::string candidates_path;
    std::string references_path;
    std::string output_path;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Score candidate lines against reference lines and aggregate");
    evaluate->add_option("candidates", candidates_path, "Candidate text, one item per line")
        ->required();
    evaluate->add_option("references", references_path, "Reference text, one item per line")
        ->required();
    add_format_option(evaluate, options);
    evaluate->add_option("--output", output_path, "Write the report to a file instead of stdout");

    std::string config_path;
    std::string story_id;
    std::string run_output_dir;
    int parallelism = 0;
    std::uint64_t seed = 0;
    CLI::App* run = app.add_subcommand("run", "Run configured variants over a dataset");
    run->add_option("--config", config_path, "Run configuration JSON")->required();
    run->add_option("--story", story_id, "Run a single story by id");
    run->add_option("--output", run_output_dir, "Parent directory for the run directory");
    run->add_option("--parallelism", parallelism, "Worker count override")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "Seed override");

    CLI::App* ablate =
        app.add_subcommand("ablate", "Run all configured variants and render the comparison");
    ablate->add_option("--config", config_path, "Run configuration JSON")->required();
    ablate->add_option("--output", run_output_dir, "Parent directory for the run directory");
    ablate->add_option("--parallelism", parallelism, "Worker count override")
        ->check(CLI::PositiveNumber);
    ablate->add_option("--seed", seed, "Seed override");

    std::string run_dir;
    CLI::App* report = app.add_subcommand("report", "Re-render a persisted run directory");
    report->add_option("run_dir", run_dir, "Run directory")->required();
    add_format_option(report, options);

    std::size_t dim_m = 0;
    std::size_t dim_n = 0;
    std::size_t rank = 0;
    int bits = 4;
    CLI::App* params =
        app.add_subcommand("params", "Print low-rank adapter parameter accounting");
    params->add_option("m", dim_m, "Weight matrix rows")->required();
    params->add_option("n", dim_n, "Weight matrix cols")->required();
    params->add_option("r", rank, "Adapter rank")->required();
    params->add_option("--bits", bits, "Quantization bits")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return casegen::cli::kExitConfig;
    }

    if (evaluate->parsed()) {
        if (!output_path.empty()) options.output = output_path;
        return casegen::cli::cmd_evaluate(candidates_path, references_path, options, std::cout,
                                          std::cerr);
    }
    if (run->parsed() || ablate->parsed()) {
        if (!run_output_dir.empty()) options.output = run_output_dir;
        if (parallelism > 0) options.parallelism = parallelism;
        CLI::App* sub = run->parsed() ? run : ablate;
        if (sub->count("--seed") > 0) options.seed = seed;
        if (run->parsed()) {
            const std::optional<std::string> story =
                story_id.empty() ? std::nullopt : std::optional<std::string>(story_id);
            return casegen::cli::cmd_run(config_path, story, options, std::cout, std::cerr);
        }
        return casegen::cli::cmd_ablate(config_path, options, std::cout, std::cerr);
    }
    if (report->parsed()) {
        return casegen::cli::cmd_report(run_dir, options, std::cout, std::cerr);
    }
    if (params->parsed()) {
        return casegen::cli::cmd_params(dim_m, dim_n, rank, bits, std::cout, std::cerr);
    }
    return casegen::cli::kExitConfig;
}
