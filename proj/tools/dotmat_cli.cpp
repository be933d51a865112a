// dotmat command-line front end: ingest -> (train | predict | grid | densify),
// all downstream commands consume the cache written by `ingest`.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dotmat/data.hpp"
#include "dotmat/harness.hpp"
#include "dotmat/metrics.hpp"
#include "dotmat/model.hpp"
#include "dotmat/trainers.hpp"
#include "../src/numeric_io.hpp"

namespace {

using namespace dotmat;

struct IngestOpts {
    std::string format = "movielens";
    std::string input;
    std::string output;
    std::string user_col = "user_id";
    std::string item_col = "item_id";
    std::string rating_col = "rating";
    double r_max = 0.0;  // 0 = infer from data
};

int run_ingest(const IngestOpts& opt) {
    std::optional<double> r_max;
    if (opt.r_max != 0.0) r_max = opt.r_max;
    ParseStats stats;
    InteractionDataset dataset;
    if (opt.format == "movielens") {
        dataset = parse_movielens_file(opt.input, &stats, r_max);
    } else {
        CsvColumns columns{opt.user_col, opt.item_col, opt.rating_col};
        dataset = parse_csv_file(opt.input, columns, &stats, r_max);
    }
    save_dataset(dataset, std::filesystem::path(opt.output));
    std::cout << "ingested " << stats.lines << " lines: " << dataset.n_users() << " users, "
              << dataset.n_items() << " items, " << dataset.n_triples() << " triples ("
              << stats.duplicates_replaced << " duplicates replaced), r_max="
              << detail::format_double(dataset.r_max()) << "\n";
    return 0;
}

struct TrainOpts {
    std::string algo = "dotmat";
    std::string input;
    std::string model_out;
    std::string trace_out;
    double lr = 0.01;
    std::size_t epochs = 20;
    std::size_t dim = 16;
    double eps = kDefaultClampEps;
    std::uint64_t seed = 42;
    std::size_t pairs_per_user = 100;
};

int run_train(const TrainOpts& opt) {
    const InteractionDataset dataset = load_dataset(std::filesystem::path(opt.input));
    TrainConfig config;
    config.learning_rate = opt.lr;
    config.epochs = opt.epochs;
    config.dim = opt.dim;
    config.clamp_eps = opt.eps;
    config.seed = opt.seed;
    config.pairs_per_user = opt.pairs_per_user;

    // The whole input is the train side; supervised trainers see no test data.
    SplitDataset split;
    split.train = dataset;
    split.test = InteractionDataset::with_universe(dataset.users(), dataset.items(), {},
                                                   dataset.r_max());

    const Algorithm algo = parse_algorithm(opt.algo);
    TrainResult result;
    switch (algo) {
        case Algorithm::DotMat:
            result = train_dotmat(dataset, config);
            break;
        case Algorithm::DotMatHybrid:
            result = train_dotmat_hybrid(split, config, config);
            break;
        case Algorithm::MfClassic:
            result = train_mf_classic(split, config);
            break;
        case Algorithm::RankMat:
            result = train_rankmat(split, popularity_ranks(dataset), config);
            break;
        case Algorithm::GloVeMat:
            result = train_glovemat(split, config);
            break;
        default:
            throw ConfigError("`" + opt.algo + "` has no trainable model; pick one of "
                              "dotmat, dotmat-hybrid, mf, rankmat, glovemat");
    }
    save_model(result.model, std::filesystem::path(opt.model_out));
    if (!opt.trace_out.empty()) {
        std::ofstream out(opt.trace_out);
        if (!out) throw IoError("cannot open trace file for writing: " + opt.trace_out);
        result.trace.to_csv(out);
    }
    std::cout << "trained " << opt.algo << ": dim=" << result.model.dim() << " users="
              << result.model.n_users() << " items=" << result.model.n_items();
    if (!result.trace.epochs.empty())
        std::cout << " final_mean_loss="
                  << detail::format_double(result.trace.epochs.back().mean_loss);
    std::cout << "\n";
    return 0;
}

struct PredictOpts {
    std::string model;
    std::string input;
    std::string output;
    std::string predictor = "dot";
    double r_max = 0.0;  // 0 = take the dataset's
};

int run_predict(const PredictOpts& opt) {
    const FactorModel model = load_model(std::filesystem::path(opt.model));
    const InteractionDataset dataset = load_dataset(std::filesystem::path(opt.input));
    const double r_max = opt.r_max != 0.0 ? opt.r_max : dataset.r_max();
    const PredictFn predict = opt.predictor == "glove" ? glovemat_predictor(model, r_max)
                                                       : model_predictor(model, r_max);
    std::ofstream out(opt.output);
    if (!out) throw IoError("cannot open predictions file for writing: " + opt.output);
    out << "user_id,item_id,predicted,actual\n";
    for (const auto& t : dataset.triples())
        out << t.user_id << ',' << t.item_id << ','
            << detail::format_double(predict(t.user_id, t.item_id)) << ','
            << detail::format_double(t.rating) << '\n';
    if (!out) throw IoError("failed while writing predictions");
    std::cout << "predicted " << dataset.n_triples() << " pairs -> " << opt.output << "\n";
    return 0;
}

struct GridOpts {
    std::string input;
    std::string out_csv;
    std::string out_json;
    std::vector<std::string> algos;
    std::vector<double> lrs;
    std::vector<std::size_t> samples;
    GridSpec spec;  // carries the numeric defaults
};

int run_grid_cmd(const GridOpts& opt) {
    const InteractionDataset dataset = load_dataset(std::filesystem::path(opt.input));
    GridSpec spec = opt.spec;
    if (!opt.algos.empty()) {
        spec.algorithms.clear();
        for (const auto& name : opt.algos) spec.algorithms.push_back(parse_algorithm(name));
    }
    if (!opt.lrs.empty()) spec.learning_rates = opt.lrs;
    if (!opt.samples.empty()) spec.sample_sizes = opt.samples;

    const ExperimentReport report = run_grid(dataset, spec);
    emit_csv(report, std::filesystem::path(opt.out_csv));
    if (!opt.out_json.empty()) emit_json(report, std::filesystem::path(opt.out_json));
    std::cout << "grid finished: " << report.rows.size() << " cells -> " << opt.out_csv << "\n";
    return 0;
}

struct DensifyOpts {
    std::string model;
    std::string input;
    std::string output;
    double eps = kDefaultClampEps;
};

int run_densify(const DensifyOpts& opt) {
    const FactorModel model = load_model(std::filesystem::path(opt.model));
    const InteractionDataset base = load_dataset(std::filesystem::path(opt.input));
    const InteractionDataset dense = densify(model, base, base.users(), base.items(), opt.eps);
    save_dataset(dense, std::filesystem::path(opt.output));
    std::cout << "densified " << base.n_triples() << " observed -> " << dense.n_triples()
              << " triples (" << dense.n_users() << " users x " << dense.n_items()
              << " items) -> " << opt.output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DotMat: data-free matrix factorization toolkit"};
    app.require_subcommand(1);

    IngestOpts ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "parse a ratings file into a dataset cache");
    cmd_ingest->add_option("--format", ingest.format, "input format")
        ->check(CLI::IsMember({"movielens", "csv"}))
        ->capture_default_str();
    cmd_ingest->add_option("--input", ingest.input, "ratings file")->required();
    cmd_ingest->add_option("--output", ingest.output, "dataset cache to write")->required();
    cmd_ingest->add_option("--user-col", ingest.user_col, "CSV user column")->capture_default_str();
    cmd_ingest->add_option("--item-col", ingest.item_col, "CSV item column")->capture_default_str();
    cmd_ingest->add_option("--rating-col", ingest.rating_col, "CSV rating column")
        ->capture_default_str();
    cmd_ingest->add_option("--r-max", ingest.r_max, "rating ceiling override (default: observed max)");

    TrainOpts train;
    auto* cmd_train = app.add_subcommand("train", "train a model on a dataset cache");
    cmd_train->add_option("--algo", train.algo, "dotmat|dotmat-hybrid|mf|rankmat|glovemat")
        ->capture_default_str();
    cmd_train->add_option("--input", train.input, "dataset cache")->required();
    cmd_train->add_option("--model-out", train.model_out, "model file to write")->required();
    cmd_train->add_option("--lr", train.lr, "learning rate")->capture_default_str();
    cmd_train->add_option("--epochs", train.epochs, "training epochs")->capture_default_str();
    cmd_train->add_option("--dim", train.dim, "latent dimension")->capture_default_str();
    cmd_train->add_option("--eps", train.eps, "dot-product clamp epsilon")->capture_default_str();
    cmd_train->add_option("--seed", train.seed, "random seed")->capture_default_str();
    cmd_train->add_option("--pairs-per-user", train.pairs_per_user,
                          "data-free pairs sampled per user per epoch")
        ->capture_default_str();
    cmd_train->add_option("--trace-out", train.trace_out, "per-epoch loss CSV to write");

    PredictOpts predict;
    auto* cmd_predict = app.add_subcommand("predict", "emit per-pair predictions CSV");
    cmd_predict->add_option("--model", predict.model, "model file")->required();
    cmd_predict->add_option("--input", predict.input, "dataset cache with the pairs to score")
        ->required();
    cmd_predict->add_option("--output", predict.output, "predictions CSV to write")->required();
    cmd_predict->add_option("--predictor", predict.predictor,
                            "dot: r_max*clamped dot; glove: exp(dot)-1")
        ->check(CLI::IsMember({"dot", "glove"}))
        ->capture_default_str();
    cmd_predict->add_option("--r-max", predict.r_max, "rating ceiling (default: dataset's)");

    GridOpts grid;
    auto* cmd_grid = app.add_subcommand("grid", "run the algorithms x rates x samples experiment");
    cmd_grid->add_option("--input", grid.input, "dataset cache")->required();
    cmd_grid->add_option("--out-csv", grid.out_csv, "report CSV to write")->required();
    cmd_grid->add_option("--out-json", grid.out_json, "report JSON to write");
    cmd_grid->add_option("--algos", grid.algos,
                         "comma-separated subset of dotmat,dotmat-hybrid,mf,rankmat,glovemat,random,mean")
        ->delimiter(',');
    cmd_grid->add_option("--lrs", grid.lrs, "comma-separated learning rates")->delimiter(',');
    cmd_grid->add_option("--samples", grid.samples, "comma-separated user sample sizes")
        ->delimiter(',');
    cmd_grid->add_option("--dim", grid.spec.dim, "latent dimension")->capture_default_str();
    cmd_grid->add_option("--epochs", grid.spec.epochs, "training epochs")->capture_default_str();
    cmd_grid->add_option("--test-fraction", grid.spec.test_fraction, "per-user test fraction")
        ->capture_default_str();
    cmd_grid->add_option("--top-k", grid.spec.top_k, "recommendation list length")
        ->capture_default_str();
    cmd_grid->add_option("--pairs-per-user", grid.spec.pairs_per_user,
                         "data-free pairs sampled per user per epoch")
        ->capture_default_str();
    cmd_grid->add_option("--eps", grid.spec.clamp_eps, "dot-product clamp epsilon")
        ->capture_default_str();
    cmd_grid->add_option("--seed", grid.spec.seed, "master seed")->capture_default_str();
    cmd_grid->add_flag("--fixed-timing", grid.spec.fixed_timing,
                       "report train_seconds as 0 for byte-reproducible output");

    DensifyOpts densify_opts;
    auto* cmd_densify = app.add_subcommand("densify", "fill unobserved cells with model predictions");
    cmd_densify->add_option("--model", densify_opts.model, "model file")->required();
    cmd_densify->add_option("--input", densify_opts.input, "dataset cache")->required();
    cmd_densify->add_option("--output", densify_opts.output, "densified dataset cache to write")
        ->required();
    cmd_densify->add_option("--eps", densify_opts.eps, "dot-product clamp epsilon")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*cmd_ingest) return run_ingest(ingest);
        if (*cmd_train) return run_train(train);
        if (*cmd_predict) return run_predict(predict);
        if (*cmd_grid) return run_grid_cmd(grid);
        if (*cmd_densify) return run_densify(densify_opts);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const LookupError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const BoundsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
