#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "query_csv.hpp"
#include "ttsurrogate/gpr.hpp"
#include "ttsurrogate/parallel.hpp"

namespace ttsurrogate::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::span<const double> row_span(const RowMatrix& x, Eigen::Index i) {
    return {x.row(i).data(), static_cast<std::size_t>(x.cols())};
}

std::span<const double> flat(const RowMatrix& x) { return {x.data(), static_cast<std::size_t>(x.size())}; }

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << text;
}

ResultRow new_row(std::string method, std::uint64_t budget) {
    ResultRow row;
    row.method = std::move(method);
    row.budget = budget;
    return row;
}

// Reference prices for the shared test set plus the time they took.
struct Reference {
    TestSet test;
    double seconds = 0.0;
};

Reference build_reference(const RunConfig& c) {
    Reference ref;
    ref.test.x = make_test_points(c.grid, c.bench.test_size, c.bench.test_seed);
    const auto n = static_cast<std::size_t>(ref.test.x.rows());
    ref.test.reference.assign(n, 0.0);
    ref.test.std_error.assign(n, 0.0);
    const auto t0 = Clock::now();
    parallel_for(n, c.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto x = row_span(ref.test.x, static_cast<Eigen::Index>(i));
            switch (c.experiment) {
                case ExperimentKind::european_geo:
                    ref.test.reference[i] = price_european_geo_basket_put(to_market_point(x), c.model);
                    break;
                case ExperimentKind::american_arith: {
                    LsmcConfig cfg = c.bench.reference_lsmc;
                    const std::size_t key[] = {i};
                    cfg.seed = point_seed(c.bench.test_seed ^ 0x7e57ULL, key);
                    const McEstimate est = price_american_arith_basket_put_lsmc(to_market_point(x), c.model, cfg);
                    ref.test.reference[i] = est.price;
                    ref.test.std_error[i] = est.std_error;
                    break;
                }
                case ExperimentKind::custom:
                    ref.test.reference[i] = c.custom(c.grid, x);
                    break;
            }
        }
    });
    ref.seconds = seconds_since(t0);
    return ref;
}

ResultRow run_stn(const RunConfig& c, std::uint64_t budget, const TestSet& test) {
    ResultRow row = new_row("stn", budget);
    const auto shape = c.grid.shape();
    TrainOptions opts = c.train;
    opts.rank = max_rank_for_budget(shape, budget, opts.sweeps);
    GridPricer pricer(c.grid, c.price_fn(), c.train.seed, c.threads);
    TrainResult trained = train_surrogate(pricer, c.grid, opts);

    const auto t0 = Clock::now();
    const std::vector<double> pred = trained.model.evaluate_batch(flat(test.x), c.threads);
    const double infer = seconds_since(t0);

    row.train_set_size = trained.report.evals_used;
    row.train_seconds = trained.train_seconds;
    row.data_gen_seconds = trained.data_gen_seconds;
    row.infer_seconds_per_query = infer / static_cast<double>(pred.size());
    row.mae = mean_absolute_error(pred, test.reference);
    row.details = {{"rank", opts.rank},
                   {"ranks", trained.model.surface().ranks()},
                   {"validation_evals", trained.report.validation_evals},
                   {"validation_error", trained.report.validation_error},
                   {"valid", trained.report.valid}};
    if (!trained.report.valid) row.message = trained.report.message;
    return row;
}

ResultRow run_gpr(const RunConfig& c, std::uint64_t budget, const TestSet& test) {
    ResultRow row = new_row("gpr", budget);
    const std::size_t n = std::min<std::uint64_t>(budget, c.bench.gpr.max_samples);
    const auto start = Clock::now();

    const RowMatrix x = make_test_points(c.grid, n, c.train.seed ^ 0x6a09e667f3bcc909ULL ^ budget);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    const auto fn = c.price_fn();
    const auto t_data = Clock::now();
    parallel_for(n, c.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t key[] = {i, n};
            y(static_cast<Eigen::Index>(i)) = fn(row_span(x, static_cast<Eigen::Index>(i)), point_seed(c.train.seed, key));
        }
    });
    row.data_gen_seconds = seconds_since(t_data);

    RowMatrix u(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto v = c.grid.normalize(row_span(x, i));
        std::copy(v.begin(), v.end(), u.row(i).data());
    }
    const StandardizedGpr model = fit_standardized_gpr(u, y, c.bench.gpr.length_scales);
    row.train_seconds = seconds_since(start);

    RowMatrix q(test.x.rows(), test.x.cols());
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        const auto v = c.grid.normalize(row_span(test.x, i));
        std::copy(v.begin(), v.end(), q.row(i).data());
    }
    const auto t0 = Clock::now();
    const std::vector<double> pred = model.predict_batch(q, c.threads);
    row.infer_seconds_per_query = seconds_since(t0) / static_cast<double>(pred.size());

    row.train_set_size = n;
    row.mae = mean_absolute_error(pred, test.reference);
    row.details = {{"length_scale", model.search.best},
                   {"length_scale_at_upper_edge", model.search.at_upper_edge},
                   {"length_scale_candidates", model.search.candidates},
                   {"nlml", model.search.nlml},
                   {"target_mean", model.y_mean},
                   {"target_scale", model.y_scale},
                   {"jitter", model.model.jitter}};
    return row;
}

template <typename Fn>
ResultRow guarded(const std::string& method, std::uint64_t budget, std::ostream& log, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        ResultRow row = new_row(method, budget);
        row.failed = true;
        row.mae = std::numeric_limits<double>::quiet_NaN();
        row.message = e.what();
        log << "  " << method << " at budget " << budget << " failed: " << e.what() << '\n';
        return row;
    }
}

nlohmann::json row_json(const ResultRow& r) {
    nlohmann::json j = {{"method", r.method},
                        {"budget", r.budget},
                        {"train_set_size", r.train_set_size},
                        {"train_seconds", r.train_seconds},
                        {"data_gen_seconds", r.data_gen_seconds},
                        {"infer_seconds_per_query", r.infer_seconds_per_query},
                        {"failed", r.failed},
                        {"details", r.details}};
    j["mae"] = std::isfinite(r.mae) ? nlohmann::json(r.mae) : nlohmann::json(nullptr);
    if (!r.message.empty()) j["message"] = r.message;
    return j;
}

}  // namespace

std::filesystem::path cmd_train(const RunConfig& c, const std::filesystem::path& out_dir, std::ostream& log) {
    std::filesystem::create_directories(out_dir);
    GridPricer pricer(c.grid, c.price_fn(), c.train.seed, c.threads);
    log << "training " << to_string(c.experiment) << " surrogate on " << c.grid.total_cores() << " cores ("
        << c.grid.num_points() << " grid points), rank " << c.train.rank << ", " << c.train.sweeps << " sweeps\n";
    TrainResult result = train_surrogate(pricer, c.grid, c.train);
    auto& m = result.model.manifest();
    m["config_hash"] = c.hash();
    m["config"] = c.to_json();
    const std::filesystem::path stem = out_dir / "model";
    result.model.save(stem);

    const CrossReport& r = result.report;
    log << "  sweeps run:        " << r.sweeps_run << '\n'
        << "  evals used:        " << r.evals_used << " (+" << r.validation_evals << " validation)\n"
        << "  validation error:  " << r.validation_error << '\n'
        << "  max rank:          " << result.model.surface().max_rank() << '\n'
        << "  train seconds:     " << result.train_seconds << " (data generation " << result.data_gen_seconds
        << ")\n";
    if (!r.valid) log << "  warning: " << r.message << '\n';
    log << "  wrote " << stem.string() << ".tt and " << stem.string() << ".json\n";
    return stem;
}

std::size_t cmd_eval(const std::filesystem::path& model_path, const std::filesystem::path& queries,
                     const std::filesystem::path& out_dir, std::size_t threads, std::ostream& log) {
    const SurrogateModel model = SurrogateModel::load(model_path);
    const RowMatrix x = read_query_csv(queries, model.grid());
    std::vector<double> prices;
    const auto t0 = Clock::now();
    if (x.rows() > 0) {
        try {
            prices = model.evaluate_batch(flat(x), threads);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("query outside the model grid: ") + e.what());
        }
    }
    const double secs = seconds_since(t0);

    std::filesystem::create_directories(out_dir);
    const auto out_path = out_dir / "prices.csv";
    std::ofstream os(out_path);
    if (!os) throw ConfigError("cannot write " + out_path.string());
    write_price_csv(os, model.grid(), x, prices);

    const auto n = static_cast<std::size_t>(x.rows());
    log << "evaluated " << n << " queries in " << secs << " s";
    if (n > 0) log << " (" << secs / static_cast<double>(n) * 1e6 << " us per query)";
    log << "\nwrote " << out_path.string() << '\n';
    return n;
}

BenchOutcome cmd_bench(const RunConfig& c, const std::filesystem::path& out_dir, std::ostream& log) {
    std::filesystem::create_directories(out_dir);
    BenchOutcome outcome;
    outcome.config_hash = c.hash();
    log << "bench " << to_string(c.experiment) << ", config " << outcome.config_hash << ", "
        << c.bench.test_size << " test points\n";

    const Reference ref = build_reference(c);
    outcome.mean_reference_price = std::accumulate(ref.test.reference.begin(), ref.test.reference.end(), 0.0) /
                                   static_cast<double>(ref.test.reference.size());
    if (c.bench.direct) {
        ResultRow direct = new_row("direct", 0);
        direct.infer_seconds_per_query = ref.seconds / static_cast<double>(ref.test.reference.size());
        direct.mae = 0.0;
        outcome.rows.push_back(direct);
    }

    double prev_stn = std::numeric_limits<double>::quiet_NaN();
    for (std::uint64_t budget : c.bench.budgets) {
        ResultRow stn = guarded("stn", budget, log, [&] { return run_stn(c, budget, ref.test); });
        if (!stn.failed) {
            if (std::isfinite(prev_stn) && stn.mae > prev_stn) {
                ++outcome.stn_inversions;
                stn.details["mae_inversion"] = true;
            }
            prev_stn = stn.mae;
        }
        outcome.rows.push_back(std::move(stn));
        if (c.bench.gpr.enabled) {
            outcome.rows.push_back(guarded("gpr", budget, log, [&] { return run_gpr(c, budget, ref.test); }));
        }
    }

    std::ostringstream csv;
    write_results_csv(csv, outcome.rows);
    write_file(out_dir / "results.csv", csv.str());

    nlohmann::json summary = {{"config_hash", outcome.config_hash},
                              {"config", c.to_json()},
                              {"mean_reference_price", outcome.mean_reference_price},
                              {"stn_mae_inversions", outcome.stn_inversions},
                              {"rows", nlohmann::json::array()}};
    for (const auto& r : outcome.rows) summary["rows"].push_back(row_json(r));
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");

    log << std::left << std::setw(8) << "method" << std::setw(10) << "budget" << std::setw(10) << "samples"
        << std::setw(14) << "train_s" << std::setw(14) << "data_gen_s" << std::setw(14) << "infer_s/q" << "mae\n";
    for (const auto& r : outcome.rows) {
        log << std::left << std::setw(8) << r.method << std::setw(10) << r.budget << std::setw(10)
            << r.train_set_size << std::setw(14) << r.train_seconds << std::setw(14) << r.data_gen_seconds
            << std::setw(14) << r.infer_seconds_per_query << (r.failed ? std::string("FAILED") : std::to_string(r.mae))
            << '\n';
    }
    log << "wrote " << (out_dir / "results.csv").string() << " and summary.json\n";
    return outcome;
}

void cmd_inspect(const std::filesystem::path& model_path, std::ostream& log) {
    const SurrogateModel model = SurrogateModel::load(model_path);
    const TensorTrain& tt = model.surface();
    log << "cores:     " << tt.num_cores() << '\n' << "ranks:    ";
    for (std::size_t r : tt.ranks()) log << ' ' << r;
    log << "\nmax rank:  " << tt.max_rank() << '\n'
        << "mode:      " << model.mode().to_string() << '\n'
        << "features: ";
    for (const auto& ax : model.grid().axes()) {
        log << ' ' << ax.name << '[' << ax.min << ", " << ax.max << "; " << ax.points() << ']';
    }
    nlohmann::json manifest = model.manifest();
    manifest.erase("config");
    log << "\nmanifest:\n" << manifest.dump(2) << '\n';
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << results_header << '\n';
    os.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : rows) {
        os << r.method << ',' << r.train_set_size << ',' << r.train_seconds << ',' << r.data_gen_seconds << ','
           << r.infer_seconds_per_query << ',';
        if (std::isfinite(r.mae)) {
            os << r.mae;
        } else {
            os << "nan";
        }
        os << '\n';
    }
}

}  // namespace ttsurrogate::cli
