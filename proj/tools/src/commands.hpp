#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "run_config.hpp"

namespace ttsurrogate::cli {

inline constexpr const char* results_header =
    "method,train_set_size,train_seconds,data_gen_seconds,infer_seconds_per_query,mae";

struct ResultRow {
    std::string method;
    std::uint64_t budget = 0;
    std::uint64_t train_set_size = 0;
    double train_seconds = 0.0;
    double data_gen_seconds = 0.0;
    double infer_seconds_per_query = 0.0;
    /// NaN when the row failed.
    double mae = 0.0;
    bool failed = false;
    std::string message;
    nlohmann::json details = nlohmann::json::object();
};

struct BenchOutcome {
    std::vector<ResultRow> rows;
    std::string config_hash;
    /// Budgets where the STN error went up relative to the previous budget.
    std::size_t stn_inversions = 0;
    double mean_reference_price = 0.0;
};

/// Trains and saves `<out_dir>/model.{tt,json}`. Returns the model stem.
std::filesystem::path cmd_train(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Prices every query row and writes `<out_dir>/prices.csv`; returns the row count.
std::size_t cmd_eval(const std::filesystem::path& model, const std::filesystem::path& queries,
                     const std::filesystem::path& out_dir, std::size_t threads, std::ostream& log);

/// Runs the budget ladder and writes `results.csv` and `summary.json` into out_dir.
BenchOutcome cmd_bench(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

void cmd_inspect(const std::filesystem::path& model, std::ostream& log);

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);

}  // namespace ttsurrogate::cli
