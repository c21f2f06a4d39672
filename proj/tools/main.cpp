// Command-line front end: band fitting, tuning, simulation experiments, and
// plot-data export. All artifacts are CSV with a '#'-prefixed header block.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cops/conformal.hpp"
#include "cops/cops_band.hpp"
#include "cops/coverage.hpp"
#include "cops/csv_io.hpp"
#include "cops/linear_baseline.hpp"
#include "cops/synthetic.hpp"
#include "cops/tuning.hpp"

namespace {

using namespace cops;

struct CommonOpts {
    double alpha = 0.1;
    std::uint64_t seed = 42;
    std::string out;
    std::size_t x_grid_points = 256;
    std::size_t y_grid_points = 512;
    std::string threshold = "alpha";
    std::string kernel = "gaussian";
};

struct DataOpts {
    std::string data_path;
    std::string x_columns;  // comma separated
    std::string y_column;
    std::string transform = "none";
    std::string model;
    std::size_t n = 1000;
};

struct FitOpts {
    double hx = 0.0;  // 0 = Silverman
    double hy = 0.0;
    double bins = 0.0;   // equal-width: bins over the range; equal-count: bin count
    double width = 0.0;  // explicit equal-width side length
    std::string scheme = "equal-width";
    std::size_t n_min = 20;
    std::string conformity = "local-marginal";
    bool fast = false;  // per-bin sandwich approximation instead of the full rank
};

void add_common(CLI::App* cmd, CommonOpts& opts, const std::string& default_out) {
    opts.out = default_out;
    cmd->add_option("--alpha", opts.alpha, "miscoverage level in (0,1)");
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_option("--out", opts.out, "output file (or prefix for simulate)");
    cmd->add_option("--x-grid-points", opts.x_grid_points, "x grid resolution");
    cmd->add_option("--y-grid-points", opts.y_grid_points, "y grid resolution");
    cmd->add_option("--threshold", opts.threshold, "rank cutoff: alpha or alpha-tilde");
    cmd->add_option("--kernel", opts.kernel,
                    "kernel family: gaussian|epanechnikov|uniform|biweight");
}

void add_data_source(CLI::App* cmd, DataOpts& opts) {
    cmd->add_option("--data", opts.data_path, "CSV file with a header row");
    cmd->add_option("--x", opts.x_columns, "x column name(s), comma separated");
    cmd->add_option("--y", opts.y_column, "y column name");
    cmd->add_option("--transform", opts.transform, "y transform: none|reciprocal");
    cmd->add_option("--model", opts.model, "synthetic model: indep_gaussian|lw_mixture");
    cmd->add_option("--n", opts.n, "sample size for synthetic draws");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad " + what + " entry: '" + item + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument(what + " list is empty");
    return out;
}

void check_alpha_flag(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
}

struct LoadedData {
    Dataset data;
    std::size_t dropped = 0;
    bool synthetic = false;
};

LoadedData load_data(const DataOpts& opts, const CommonOpts& common) {
    LoadedData loaded;
    if (!opts.data_path.empty()) {
        if (opts.x_columns.empty() || opts.y_column.empty())
            throw std::invalid_argument("--data requires --x and --y column names");
        auto result = load_csv(opts.data_path, split_list(opts.x_columns), opts.y_column);
        loaded.data = std::move(result.data);
        loaded.dropped = result.dropped_rows;
        if (loaded.dropped > 0)
            std::cerr << "dropped " << loaded.dropped
                      << " rows with missing values in selected columns\n";
        if (opts.transform == "reciprocal") {
            for (double& y : loaded.data.y) {
                if (y == 0.0)
                    throw std::invalid_argument("reciprocal transform: zero y value");
                y = 1.0 / y;
            }
            loaded.data.y_name = "1/" + loaded.data.y_name;
        } else if (opts.transform != "none") {
            throw std::invalid_argument("unknown transform: " + opts.transform);
        }
        return loaded;
    }
    if (opts.model.empty())
        throw std::invalid_argument("provide either --data/--x/--y or --model/--n");
    SyntheticModel model{model_from_name(opts.model)};
    loaded.data = model.sample(opts.n, common.seed);
    loaded.synthetic = true;
    return loaded;
}

KernelSpec kernel_for(const CommonOpts& common, double bandwidth,
                      std::span<const double> values) {
    const double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(values);
    return {kernel_family_from_name(common.kernel), h};
}

GridSpec y_grid_for(const Dataset& data, const KernelSpec& ky, std::size_t m) {
    auto [lo, hi] = y_range(data);
    return {lo - 4.0 * ky.bandwidth, hi + 4.0 * ky.bandwidth, m};
}

GridSpec x_grid_for(const Dataset& data, std::size_t m) {
    auto [lo, hi] = x_range(data, 0);
    return {lo, hi, m};
}

Partition partition_for(const Dataset& data, const FitOpts& fit,
                        std::vector<std::string>* warnings) {
    const PartitionScheme scheme = partition_scheme_from_name(fit.scheme);
    double parameter;
    if (scheme == PartitionScheme::equal_width) {
        if (fit.width > 0.0) {
            parameter = fit.width;
        } else if (fit.bins > 0.0) {
            auto [lo, hi] = x_range(data, 0);
            parameter = (hi - lo) / fit.bins;
        } else {
            throw std::invalid_argument("equal-width partition needs --bins or --width");
        }
    } else {
        if (!(fit.bins > 0.0))
            throw std::invalid_argument("equal-count partition needs --bins");
        parameter = fit.bins;
    }
    return build_partition(data, scheme, parameter, warnings);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// Expands `--config FILE` into ordinary flags before parsing. Explicit flags
// win: a config key is injected only when its flag is absent from the command
// line. Keys use the flag names without the leading dashes.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args;
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string tok = argv[i];
        if (tok == "--config" && i + 1 < argc) {
            config_path = argv[++i];
        } else if (tok.rfind("--config=", 0) == 0) {
            config_path = tok.substr(9);
        } else {
            args.push_back(tok);
        }
    }
    if (config_path.empty()) return args;
    std::vector<std::string> explicit_keys;
    for (const auto& tok : args)
        if (tok.rfind("--", 0) == 0)
            explicit_keys.push_back(tok.substr(2, tok.find('=') - 2));
    for (const auto& [key, value] : read_config(config_path)) {
        if (std::find(explicit_keys.begin(), explicit_keys.end(), key) !=
            explicit_keys.end())
            continue;
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

void print_summary(const std::string& method, double alpha, const PredictionBand& band,
                   const std::string& out) {
    std::printf("%s alpha=%g mean_measure=%.6g out=%s\n", method.c_str(), alpha,
                band.mean_measure(), out.c_str());
}

std::string partition_descriptor(const Partition& part) {
    std::ostringstream ss;
    ss << partition_scheme_name(part.scheme) << " parameter=" << part.parameter
       << " bins=" << part.bin_count();
    return ss.str();
}

int run_fit_slicer(const CommonOpts& common, const DataOpts& data_opts, const FitOpts& fit) {
    check_alpha_flag(common.alpha);
    LoadedData loaded = load_data(data_opts, common);
    if (loaded.data.d != 1)
        throw std::invalid_argument("fit-slicer expects a single x column");
    const KernelSpec kx = kernel_for(common, fit.hx, loaded.data.x);
    const KernelSpec ky = kernel_for(common, fit.hy, loaded.data.y);
    std::vector<std::string> warnings;
    const GridSpec xg = x_grid_for(loaded.data, common.x_grid_points);
    const GridSpec yg = y_grid_for(loaded.data, ky, common.y_grid_points);
    const std::vector<KernelSpec> kxs{kx};
    PredictionBand band = slicer_band(loaded.data, kxs, ky, common.alpha, xg, yg, &warnings);
    print_warnings(warnings);

    BandFileHeader header;
    header.method = band_method_name(band.method);
    header.alpha = common.alpha;
    header.kernel = common.kernel;
    header.bandwidths = "hx=" + std::to_string(kx.bandwidth) +
                        ";hy=" + std::to_string(ky.bandwidth);
    header.partition = "none";
    header.seed = common.seed;
    header.fingerprint = dataset_fingerprint(loaded.data);
    write_band_csv(common.out, header, band);
    print_summary("slicer", common.alpha, band, common.out);
    return 0;
}

int run_fit_cops(const CommonOpts& common, const DataOpts& data_opts, const FitOpts& fit) {
    check_alpha_flag(common.alpha);
    LoadedData loaded = load_data(data_opts, common);
    if (loaded.data.d != 1)
        throw std::invalid_argument("fit-cops expects a single x column");
    const KernelSpec kx = kernel_for(common, fit.hx, loaded.data.x);
    const KernelSpec ky = kernel_for(common, fit.hy, loaded.data.y);
    std::vector<std::string> warnings;
    const Partition part = partition_for(loaded.data, fit, &warnings);
    const GridSpec xg = x_grid_for(loaded.data, common.x_grid_points);
    const GridSpec yg = y_grid_for(loaded.data, ky, common.y_grid_points);

    CopsOptions options;
    options.threshold = rank_threshold_from_name(common.threshold);
    options.n_min = fit.n_min;

    CopsBand result;
    if (fit.fast) {
        result = local_slicer_band(loaded.data, part, ky, common.alpha, xg, yg, options,
                                   &warnings);
    } else {
        const std::vector<KernelSpec> kxs{kx};
        result = cops_band_variant(loaded.data, part, kxs, ky, common.alpha, xg, yg,
                                   conformity_variant_from_name(fit.conformity), options,
                                   &warnings);
    }
    print_warnings(warnings);

    BandFileHeader header;
    header.method = band_method_name(result.band.method);
    header.alpha = common.alpha;
    header.kernel = common.kernel;
    header.bandwidths = "hx=" + std::to_string(kx.bandwidth) +
                        ";hy=" + std::to_string(ky.bandwidth);
    header.partition = partition_descriptor(part);
    header.seed = common.seed;
    header.fingerprint = dataset_fingerprint(loaded.data);
    write_band_csv(common.out, header, result.band);
    print_summary(fit.fast ? "cops-fast" : "cops", common.alpha, result.band, common.out);
    return 0;
}

int run_linear(const CommonOpts& common, const DataOpts& data_opts) {
    check_alpha_flag(common.alpha);
    LoadedData loaded = load_data(data_opts, common);
    const GridSpec xg = x_grid_for(loaded.data, common.x_grid_points);
    PredictionBand band = linear_baseline(loaded.data, common.alpha, xg);

    BandFileHeader header;
    header.method = band_method_name(band.method);
    header.alpha = common.alpha;
    header.kernel = "none";
    header.bandwidths = "none";
    header.partition = "none";
    header.seed = common.seed;
    header.fingerprint = dataset_fingerprint(loaded.data);
    write_band_csv(common.out, header, band);
    print_summary("linear", common.alpha, band, common.out);
    return 0;
}

int run_tune(const CommonOpts& common, const DataOpts& data_opts, const std::string& widths,
             const std::string& bandwidths, const std::string& band_out, std::size_t n_min) {
    check_alpha_flag(common.alpha);
    LoadedData loaded = load_data(data_opts, common);
    TuningGrid grid;
    if (widths.empty() && bandwidths.empty()) {
        grid = default_tuning_grid(loaded.data);
    } else {
        if (widths.empty() || bandwidths.empty())
            throw std::invalid_argument("provide both --widths and --bandwidths, or neither");
        grid.widths = parse_double_list(widths, "widths");
        grid.bandwidths = parse_double_list(bandwidths, "bandwidths");
    }
    std::vector<std::string> warnings;
    CopsOptions options;
    options.threshold = rank_threshold_from_name(common.threshold);
    options.n_min = n_min;
    const GridSpec xg = x_grid_for(loaded.data, common.x_grid_points);
    KernelSpec pilot{kernel_family_from_name(common.kernel),
                     silverman_bandwidth(loaded.data.y)};
    const GridSpec yg = y_grid_for(loaded.data, pilot, common.y_grid_points);
    TuneOutcome outcome = tune_cops(loaded.data, grid, common.alpha, xg, yg, common.seed,
                                    pilot.family, options, &warnings);
    print_warnings(warnings);

    std::map<std::string, std::string> header{
        {"alpha", std::to_string(common.alpha)},
        {"kernel", common.kernel},
        {"fingerprint", dataset_fingerprint(loaded.data)},
    };
    write_tuning_csv(common.out, header, outcome.result);

    BandFileHeader band_header;
    band_header.method = band_method_name(outcome.band.band.method);
    band_header.alpha = common.alpha;
    band_header.kernel = common.kernel;
    band_header.bandwidths = "per-bin (see tuning report)";
    band_header.partition = partition_descriptor(outcome.partition);
    band_header.seed = common.seed;
    band_header.fingerprint = dataset_fingerprint(loaded.data);
    write_band_csv(band_out, band_header, outcome.band.band);
    print_summary("tuned-cops", common.alpha, outcome.band.band, band_out);
    std::printf("chosen_w=%.6g report=%s\n", outcome.result.chosen_w, common.out.c_str());
    return 0;
}

int run_simulate(const CommonOpts& common, const DataOpts& data_opts, const FitOpts& fit,
                 std::size_t reps) {
    check_alpha_flag(common.alpha);
    if (data_opts.model.empty()) throw std::invalid_argument("simulate requires --model");
    SyntheticModel model{model_from_name(data_opts.model)};
    const Dataset data = model.sample(data_opts.n, common.seed);

    const KernelSpec kx = kernel_for(common, fit.hx, data.x);
    const KernelSpec ky = kernel_for(common, fit.hy, data.y);
    std::vector<std::string> warnings;
    const Partition part = partition_for(data, fit, &warnings);

    const auto [sx_lo, sx_hi] = model.x_support();
    const auto [sy_lo, sy_hi] = model.y_envelope();
    const GridSpec xg{sx_lo, sx_hi, common.x_grid_points};
    const GridSpec yg{sy_lo, sy_hi, common.y_grid_points};

    CopsOptions options;
    options.threshold = rank_threshold_from_name(common.threshold);
    options.n_min = fit.n_min;

    const std::vector<KernelSpec> kxs{kx};
    PredictionBand slicer = slicer_band(data, kxs, ky, common.alpha, xg, yg, &warnings);
    CopsBand cops_fit = cops_band_variant(data, part, kxs, ky, common.alpha, xg, yg,
                                          conformity_variant_from_name(fit.conformity),
                                          options, &warnings);
    print_warnings(warnings);

    const std::string fp = dataset_fingerprint(data);
    BandFileHeader header;
    header.alpha = common.alpha;
    header.kernel = common.kernel;
    header.bandwidths =
        "hx=" + std::to_string(kx.bandwidth) + ";hy=" + std::to_string(ky.bandwidth);
    header.seed = common.seed;
    header.fingerprint = fp;

    header.method = band_method_name(slicer.method);
    header.partition = "none";
    write_band_csv(common.out + "_slicer_band.csv", header, slicer);
    header.method = band_method_name(cops_fit.band.method);
    header.partition = partition_descriptor(part);
    write_band_csv(common.out + "_cops_band.csv", header, cops_fit.band);

    const std::map<std::string, std::string> chdr{
        {"model", data_opts.model}, {"alpha", std::to_string(common.alpha)},
        {"n", std::to_string(data_opts.n)}, {"fingerprint", fp}};
    const CoverageReport slicer_cov =
        coverage_report(slicer, model, reps, common.seed + 1, &part);
    write_coverage_csv(common.out + "_coverage_slicer.csv", chdr, slicer_cov);
    const CoverageReport cops_cov =
        coverage_report(cops_fit.band, model, reps, common.seed + 1, &part);
    write_coverage_csv(common.out + "_coverage_cops.csv", chdr, cops_cov);

    print_summary("slicer", common.alpha, slicer, common.out + "_slicer_band.csv");
    print_summary("cops", common.alpha, cops_fit.band, common.out + "_cops_band.csv");
    std::printf("marginal_coverage slicer=%.4f cops=%.4f reps=%zu\n",
                slicer_cov.marginal.value, cops_cov.marginal.value, reps);
    return 0;
}

int run_coverage(const CommonOpts& common, const std::string& band_path,
                 const std::string& model_name_str, std::size_t reps, double bins) {
    if (band_path.empty()) throw std::invalid_argument("coverage requires --band");
    if (model_name_str.empty()) throw std::invalid_argument("coverage requires --model");
    LoadedBand loaded = read_band_csv(band_path);
    SyntheticModel model{model_from_name(model_name_str)};

    std::optional<Partition> part;
    if (bins > 0.0) {
        const Dataset probe = model.sample(4096, common.seed + 7);
        auto [lo, hi] = x_range(probe, 0);
        part = build_partition(probe, PartitionScheme::equal_width, (hi - lo) / bins);
    }
    std::vector<std::string> warnings;
    const CoverageReport report = coverage_report(loaded.band, model, reps, common.seed,
                                                  part ? &*part : nullptr, true, &warnings);
    print_warnings(warnings);
    const std::map<std::string, std::string> header{
        {"model", model_name_str}, {"band", band_path},
        {"alpha", std::to_string(loaded.band.alpha)}};
    write_coverage_csv(common.out, header, report);
    std::printf("coverage method=%s alpha=%g marginal=%.4f se=%.4f out=%s\n",
                loaded.header.method.c_str(), loaded.band.alpha, report.marginal.value,
                report.marginal.se, common.out.c_str());
    return 0;
}

int run_oracle(const CommonOpts& common, const std::string& model_name_str) {
    check_alpha_flag(common.alpha);
    if (model_name_str.empty()) throw std::invalid_argument("oracle requires --model");
    SyntheticModel model{model_from_name(model_name_str)};
    const auto [sx_lo, sx_hi] = model.x_support();
    const auto [sy_lo, sy_hi] = model.y_envelope();
    const GridSpec xg{sx_lo, sx_hi, common.x_grid_points};
    const GridSpec yg{sy_lo, sy_hi, common.y_grid_points};
    PredictionBand band = oracle_band(model, common.alpha, xg, yg);

    BandFileHeader header;
    header.method = "full_conformal";  // placeholder tag; the oracle is analytic
    header.alpha = common.alpha;
    header.kernel = "analytic";
    header.bandwidths = "none";
    header.partition = "none";
    header.seed = common.seed;
    header.fingerprint = model_name_str;
    write_band_csv(common.out, header, band);
    print_summary("oracle", common.alpha, band, common.out);
    return 0;
}

int run_rate(const CommonOpts& common, const std::string& model_name_str,
             const std::string& n_list_str, const std::string& alphas_str, std::size_t reps) {
    if (model_name_str.empty()) throw std::invalid_argument("rate requires --model");
    SyntheticModel model{model_from_name(model_name_str)};
    std::vector<std::size_t> n_list;
    for (double v : parse_double_list(n_list_str, "n-list"))
        n_list.push_back(static_cast<std::size_t>(v));
    const std::vector<double> alphas = parse_double_list(alphas_str, "alphas");
    for (double a : alphas) check_alpha_flag(a);

    const std::vector<RatePoint> table = rate_trend(model, alphas, n_list, reps, common.seed);
    const double slope = log_log_slope(table);
    const std::map<std::string, std::string> header{
        {"model", model_name_str}, {"reps", std::to_string(reps)},
        {"seed", std::to_string(common.seed)}};
    write_rate_csv(common.out, header, table, slope);
    std::printf("rate model=%s slope=%.4f out=%s\n", model_name_str.c_str(), slope,
                common.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distribution-free prediction bands: conformal KDE sets, the sandwich "
                 "slicer, locally valid COPS bands, bandwidth tuning, and a Monte Carlo "
                 "coverage harness"};
    app.require_subcommand(1);

    CommonOpts c_slicer, c_cops, c_linear, c_tune, c_sim, c_cov, c_oracle, c_rate;
    DataOpts d_slicer, d_cops, d_linear, d_tune, d_sim;
    FitOpts f_slicer, f_cops, f_sim;

    auto* cmd_slicer = app.add_subcommand("fit-slicer", "marginally valid sandwich band");
    add_common(cmd_slicer, c_slicer, "slicer_band.csv");
    add_data_source(cmd_slicer, d_slicer);
    cmd_slicer->add_option("--hx", f_slicer.hx, "x bandwidth (default Silverman)");
    cmd_slicer->add_option("--hy", f_slicer.hy, "y bandwidth (default Silverman)");

    auto* cmd_cops = app.add_subcommand("fit-cops", "locally valid conformal band");
    add_common(cmd_cops, c_cops, "cops_band.csv");
    add_data_source(cmd_cops, d_cops);
    cmd_cops->add_option("--hx", f_cops.hx, "x bandwidth (default Silverman)");
    cmd_cops->add_option("--hy", f_cops.hy, "y bandwidth (default Silverman)");
    cmd_cops->add_option("--bins", f_cops.bins, "partition bin count");
    cmd_cops->add_option("--width", f_cops.width, "equal-width bin side length");
    cmd_cops->add_option("--scheme", f_cops.scheme, "equal-width|equal-count");
    cmd_cops->add_option("--n-min", f_cops.n_min, "thin-bin fallback threshold");
    cmd_cops->add_option("--conformity", f_cops.conformity,
                         "local-marginal|joint|conditional");
    cmd_cops->add_flag("--fast", f_cops.fast, "per-bin sandwich approximation");

    auto* cmd_linear = app.add_subcommand("fit-linear", "classical OLS prediction band");
    add_common(cmd_linear, c_linear, "linear_band.csv");
    add_data_source(cmd_linear, d_linear);

    std::string tune_widths, tune_bandwidths, tune_band_out = "tuned_band.csv";
    std::size_t tune_n_min = 20;
    auto* cmd_tune = app.add_subcommand("tune", "width/bandwidth selection by splitting");
    add_common(cmd_tune, c_tune, "tune_report.csv");
    add_data_source(cmd_tune, d_tune);
    cmd_tune->add_option("--widths", tune_widths, "candidate widths, comma separated");
    cmd_tune->add_option("--bandwidths", tune_bandwidths,
                         "candidate bandwidths, comma separated");
    cmd_tune->add_option("--band-out", tune_band_out, "tuned band output file");
    cmd_tune->add_option("--n-min", tune_n_min, "thin-bin fallback threshold");

    std::size_t sim_reps = 2000;
    auto* cmd_sim = app.add_subcommand("simulate", "fit both bands on a synthetic draw");
    add_common(cmd_sim, c_sim, "simulate");
    add_data_source(cmd_sim, d_sim);
    cmd_sim->add_option("--bins", f_sim.bins, "partition bin count");
    cmd_sim->add_option("--scheme", f_sim.scheme, "equal-width|equal-count");
    cmd_sim->add_option("--hx", f_sim.hx, "x bandwidth (default Silverman)");
    cmd_sim->add_option("--hy", f_sim.hy, "y bandwidth (default Silverman)");
    cmd_sim->add_option("--n-min", f_sim.n_min, "thin-bin fallback threshold");
    cmd_sim->add_option("--conformity", f_sim.conformity,
                        "local-marginal|joint|conditional");
    cmd_sim->add_option("--reps", sim_reps, "coverage draws");
    std::string sim_config_unused;
    cmd_sim->add_option("--config", sim_config_unused,
                        "key=value config file (# comments); flags override");

    std::string cov_band, cov_model;
    std::size_t cov_reps = 2000;
    double cov_bins = 0.0;
    auto* cmd_cov = app.add_subcommand("coverage", "coverage of a saved band vs a model");
    add_common(cmd_cov, c_cov, "coverage.csv");
    cmd_cov->add_option("--band", cov_band, "band CSV produced by a fit command");
    cmd_cov->add_option("--model", cov_model, "synthetic model name");
    cmd_cov->add_option("--reps", cov_reps, "fresh draws");
    cmd_cov->add_option("--bins", cov_bins, "equal-width bins for per-bin coverage");

    std::string oracle_model;
    auto* cmd_oracle = app.add_subcommand("oracle", "analytic conditional oracle band");
    add_common(cmd_oracle, c_oracle, "oracle_band.csv");
    cmd_oracle->add_option("--model", oracle_model, "synthetic model name");

    std::string rate_model = "lw_mixture", rate_nlist = "200,500,1000,2000";
    std::string rate_alphas = "0.1";
    std::size_t rate_reps = 20;
    auto* cmd_rate = app.add_subcommand("rate", "efficiency trend vs the oracle");
    add_common(cmd_rate, c_rate, "rate.csv");
    cmd_rate->add_option("--model", rate_model, "synthetic model name");
    cmd_rate->add_option("--n-list", rate_nlist, "sample sizes, comma separated");
    cmd_rate->add_option("--alphas", rate_alphas, "levels, comma separated");
    cmd_rate->add_option("--reps", rate_reps, "replications per n");
    std::string rate_config_unused;
    cmd_rate->add_option("--config", rate_config_unused,
                         "key=value config file (# comments); flags override");

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 vector parse is reversed
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (cmd_slicer->parsed()) return run_fit_slicer(c_slicer, d_slicer, f_slicer);
        if (cmd_cops->parsed()) return run_fit_cops(c_cops, d_cops, f_cops);
        if (cmd_linear->parsed()) return run_linear(c_linear, d_linear);
        if (cmd_tune->parsed())
            return run_tune(c_tune, d_tune, tune_widths, tune_bandwidths, tune_band_out,
                            tune_n_min);
        if (cmd_sim->parsed()) return run_simulate(c_sim, d_sim, f_sim, sim_reps);
        if (cmd_cov->parsed())
            return run_coverage(c_cov, cov_band, cov_model, cov_reps, cov_bins);
        if (cmd_oracle->parsed()) return run_oracle(c_oracle, oracle_model);
        if (cmd_rate->parsed())
            return run_rate(c_rate, rate_model, rate_nlist, rate_alphas, rate_reps);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const TuningInfeasible& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
