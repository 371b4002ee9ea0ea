// Command-line front end: analyze / stats / regress / oos run the pipeline
// from a config file, synth writes reproducible fixture data.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mfp/pipeline.hpp"
#include "mfp/synth.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::string input;
    int threads = -999;      // sentinel: keep config value
    long long seed = -1;     // sentinel: keep config value
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config, "pipeline config file")->required();
    sub->add_option("--out", args.out, "output directory (overrides config)");
    sub->add_option("--input", args.input, "input price file (overrides config)");
    sub->add_option("--threads", args.threads, "worker threads, 0 = all cores");
    sub->add_option("--seed", args.seed, "random seed override");
}

mfp::PipelineConfig resolve_config(const CommonArgs& args) {
    mfp::PipelineConfig cfg = mfp::load_config_file(args.config);
    if (!args.out.empty()) cfg.out_dir = args.out;
    if (!args.input.empty()) cfg.input_path = args.input;
    if (args.threads != -999) cfg.threads = args.threads;
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    return cfg;
}

struct SynthArgs {
    std::string kind = "garch11";
    std::string out;
    std::string layout = "prices";
    int days = 100;
    int minutes = 240;
    std::size_t length = 0;  // series layout only
    long long seed = 1;
    std::string start_date = "2020-01-01";
    double start_price = 100.0;
    std::vector<std::string> params;
};

int run_synth(const SynthArgs& args) {
    mfp::GeneratorSpec spec;
    spec.kind = args.kind;
    spec.seed = static_cast<std::uint64_t>(args.seed);
    for (const auto& kv : args.params) {
        const std::size_t eq = kv.find('=');
        double v = 0.0;
        if (eq == std::string::npos || !mfp::parse_double(kv.substr(eq + 1), v))
            throw mfp::config_error("bad --param, expected name=value: " + kv);
        spec.params[kv.substr(0, eq)] = v;
    }

    std::ofstream os(args.out);
    if (!os) throw mfp::data_error("cannot write " + args.out);

    if (args.layout == "series") {
        spec.length = args.length;
        const std::vector<double> series = mfp::generate(spec);
        os << "value\n";
        for (double v : series) os << mfp::format_full(v) << '\n';
        std::printf("synth: %zu values -> %s\n", series.size(), args.out.c_str());
        return 0;
    }
    if (args.layout != "prices") throw mfp::config_error("layout must be prices or series");
    if (args.days < 1 || args.minutes < 3) throw mfp::config_error("bad days/minutes");

    const std::size_t per_day = static_cast<std::size_t>(args.minutes) - 1;
    spec.length = static_cast<std::size_t>(args.days) * per_day;
    std::vector<double> returns;
    if (spec.kind == "random_walk") {
        // The walk generator emits levels; the price path needs increments.
        spec.length += 1;
        const std::vector<double> levels = mfp::generate(spec);
        returns.resize(levels.size() - 1);
        for (std::size_t i = 0; i + 1 < levels.size(); ++i)
            returns[i] = levels[i + 1] - levels[i];
    } else {
        returns = mfp::generate(spec);
    }

    os << "date,time,price\n";
    mfp::Date day = mfp::Date::parse(args.start_date);
    double price = args.start_price;
    std::size_t k = 0;
    for (int d = 0; d < args.days; ++d) {
        os << day.to_string() << ",1," << mfp::format_full(price) << '\n';
        for (std::size_t m = 2; m <= static_cast<std::size_t>(args.minutes); ++m) {
            price *= std::exp(returns[k++]);
            os << day.to_string() << ',' << m << ',' << mfp::format_full(price) << '\n';
        }
        day = day.next_day();
    }
    std::printf("synth: %d days x %d minutes -> %s\n", args.days, args.minutes,
                args.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multifractal spectrum and return predictability toolkit"};
    app.require_subcommand(1);

    CommonArgs analyze_args, stats_args, regress_args, oos_args;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "windowed multifractal spectra and characteristics");
    add_common(analyze, analyze_args);
    CLI::App* stats = app.add_subcommand(
        "stats", "descriptive statistics and serial-dependence tests");
    add_common(stats, stats_args);
    CLI::App* regress = app.add_subcommand(
        "regress", "in-sample predictive regressions and bin responses");
    add_common(regress, regress_args);
    CLI::App* oos = app.add_subcommand("oos", "out-of-sample forecast evaluation");
    add_common(oos, oos_args);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "generate synthetic fixture data");
    synth->add_option("--kind", synth_args.kind,
                      "gaussian_iid | random_walk | ar1 | garch11 | binomial_cascade");
    synth->add_option("--out", synth_args.out, "output file")->required();
    synth->add_option("--layout", synth_args.layout, "prices (date,time,price) or series");
    synth->add_option("--days", synth_args.days, "trading days (prices layout)");
    synth->add_option("--minutes", synth_args.minutes, "minutes per day (prices layout)");
    synth->add_option("--length", synth_args.length, "series length (series layout)");
    synth->add_option("--seed", synth_args.seed, "random seed");
    synth->add_option("--start-date", synth_args.start_date, "first day (YYYY-MM-DD)");
    synth->add_option("--start-price", synth_args.start_price, "initial price level");
    synth->add_option("--param", synth_args.params, "generator parameter name=value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*analyze) return mfp::cmd_analyze(resolve_config(analyze_args));
        if (*stats) return mfp::cmd_stats(resolve_config(stats_args));
        if (*regress) return mfp::cmd_regress(resolve_config(regress_args));
        if (*oos) return mfp::cmd_oos(resolve_config(oos_args));
        if (*synth) return run_synth(synth_args);
    } catch (const mfp::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const mfp::data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::ios_base::failure& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 4;
    }
    return 2;
}
