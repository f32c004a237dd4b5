#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace cli = ttsurrogate::cli;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
};

cli::RunConfig resolve(const Overrides& o) {
    cli::RunConfig c = cli::load_config(o.config);
    if (o.seed) c.train.seed = *o.seed;
    if (o.threads) c.threads = std::max<std::size_t>(1, *o.threads);
    if (!o.out.empty()) c.output_dir = o.out;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor-train surrogates for basket option pricing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ttsurrogate::library_version));

    Overrides train_o, bench_o;
    std::string model_path, queries_path, eval_out = "out";
    std::size_t eval_threads = 1;

    auto* train = app.add_subcommand("train", "Train a surrogate from a run config and save it");
    train->add_option("--config", train_o.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    train->add_option("--out", train_o.out, "Output directory (default: config output_dir)");
    train->add_option("--seed", train_o.seed, "Override train.seed");
    train->add_option("--threads", train_o.threads, "Pricer worker threads");

    auto* eval = app.add_subcommand("eval", "Price a CSV of query points with a saved model");
    eval->add_option("--model", model_path, "Model path (stem, .tt or .json)")->required();
    eval->add_option("--queries", queries_path, "CSV with one column per feature")->required();
    eval->add_option("--out", eval_out, "Output directory for prices.csv");
    eval->add_option("--threads", eval_threads, "Evaluation threads");

    auto* bench = app.add_subcommand("bench", "Run the budget ladder and write results.csv");
    bench->add_option("--config", bench_o.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", bench_o.out, "Output directory (default: config output_dir)");
    bench->add_option("--seed", bench_o.seed, "Override train.seed");
    bench->add_option("--threads", bench_o.threads, "Worker threads");

    auto* inspect = app.add_subcommand("inspect", "Print ranks and manifest of a saved model");
    inspect->add_option("--model", model_path, "Model path (stem, .tt or .json)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_config;
    }

    try {
        if (*train) {
            const auto c = resolve(train_o);
            cli::cmd_train(c, c.output_dir, std::cout);
        } else if (*eval) {
            cli::cmd_eval(model_path, queries_path, eval_out, std::max<std::size_t>(1, eval_threads), std::cout);
        } else if (*bench) {
            const auto c = resolve(bench_o);
            cli::cmd_bench(c, c.output_dir, std::cout);
        } else if (*inspect) {
            cli::cmd_inspect(model_path, std::cout);
        }
    } catch (const cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const ttsurrogate::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
    return 0;
}
