#include "dotmat/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "dotmat/data.hpp"
#include "dotmat/metrics.hpp"
#include "dotmat/rng.hpp"
#include "dotmat/trainers.hpp"
#include "numeric_io.hpp"

namespace dotmat {

std::string algorithm_name(Algorithm algo) {
    switch (algo) {
        case Algorithm::DotMat: return "dotmat";
        case Algorithm::DotMatHybrid: return "dotmat-hybrid";
        case Algorithm::MfClassic: return "mf";
        case Algorithm::RankMat: return "rankmat";
        case Algorithm::GloVeMat: return "glovemat";
        case Algorithm::RandomBaseline: return "random";
        case Algorithm::MeanBaseline: return "mean";
    }
    throw ConfigError("unknown algorithm enum value");
}

Algorithm parse_algorithm(const std::string& name) {
    for (const Algorithm algo : all_algorithms())
        if (algorithm_name(algo) == name) return algo;
    throw ConfigError("unknown algorithm `" + name +
                      "` (expected dotmat, dotmat-hybrid, mf, rankmat, glovemat, random, mean)");
}

const std::vector<Algorithm>& all_algorithms() {
    static const std::vector<Algorithm> algos = {
        Algorithm::DotMat,    Algorithm::DotMatHybrid,   Algorithm::MfClassic,
        Algorithm::RankMat,   Algorithm::GloVeMat,       Algorithm::RandomBaseline,
        Algorithm::MeanBaseline,
    };
    return algos;
}

void GridSpec::validate() const {
    if (algorithms.empty()) throw ConfigError("grid needs at least one algorithm");
    if (learning_rates.empty()) throw ConfigError("grid needs at least one learning rate");
    if (sample_sizes.empty()) throw ConfigError("grid needs at least one sample size");
    for (const double lr : learning_rates)
        if (!(lr > 0.0)) throw ConfigError("learning rates must be > 0");
    for (const std::size_t s : sample_sizes)
        if (s < 1) throw ConfigError("sample sizes must be >= 1");
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie in (0, 1)");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (pairs_per_user < 1) throw ConfigError("pairs_per_user must be >= 1");
    if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) throw ConfigError("clamp_eps must lie in (0, 0.5)");
}

namespace {

std::uint64_t cell_seed(const GridSpec& spec, std::size_t sample_size, Algorithm algo, double lr) {
    return rng::SeedDigest{}
        .u64(spec.seed)
        .str("cell")
        .u64(sample_size)
        .str(algorithm_name(algo))
        .f64(lr)
        .value();
}

struct CellOutput {
    PredictFn predict;
    double train_seconds = 0.0;
};

CellOutput run_cell(const SplitDataset& split, const PopularityRanks& ranks, Algorithm algo,
                    const TrainConfig& config) {
    const double r_max = split.train.r_max();
    const auto start = std::chrono::steady_clock::now();
    CellOutput out;
    switch (algo) {
        case Algorithm::DotMat:
            out.predict =
                model_predictor(train_dotmat(split.train, config).model, r_max, config.clamp_eps);
            break;
        case Algorithm::DotMatHybrid:
            out.predict = model_predictor(train_dotmat_hybrid(split, config, config).model, r_max,
                                          config.clamp_eps);
            break;
        case Algorithm::MfClassic:
            out.predict =
                model_predictor(train_mf_classic(split, config).model, r_max, config.clamp_eps);
            break;
        case Algorithm::RankMat:
            out.predict = model_predictor(train_rankmat(split, ranks, config).model, r_max,
                                          config.clamp_eps);
            break;
        case Algorithm::GloVeMat:
            out.predict = glovemat_predictor(train_glovemat(split, config).model, r_max);
            break;
        case Algorithm::RandomBaseline:
            out.predict = baseline_random(config.seed, r_max);
            break;
        case Algorithm::MeanBaseline:
            out.predict = baseline_mean(split);
            break;
    }
    out.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::vector<UserId> test_users(const InteractionDataset& test) {
    std::vector<UserId> users;
    for (const auto& t : test.triples()) users.push_back(t.user_id);
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    return users;
}

}  // namespace

ExperimentReport run_grid(const InteractionDataset& dataset, const GridSpec& spec) {
    spec.validate();
    ExperimentReport report;
    for (const std::size_t size : spec.sample_sizes) {
        const InteractionDataset sampled =
            sample_users(dataset, size, rng::derive_seed(spec.seed, "sample", size));
        const SplitDataset split = split_train_test(sampled, spec.test_fraction,
                                                    rng::derive_seed(spec.seed, "split", size));
        const PopularityRanks ranks = popularity_ranks(split.train);
        const ExcludePairs hidden = observed_pairs(split.train);
        const std::vector<UserId> eval_users = test_users(split.test);

        for (const Algorithm algo : spec.algorithms) {
            for (const double lr : spec.learning_rates) {
                const std::string where = "grid cell (sample_size=" + std::to_string(size) +
                                          ", algorithm=" + algorithm_name(algo) +
                                          ", learning_rate=" + detail::format_double(lr) + "): ";
                try {
                    TrainConfig config;
                    config.learning_rate = lr;
                    config.epochs = spec.epochs;
                    config.dim = spec.dim;
                    config.clamp_eps = spec.clamp_eps;
                    config.seed = cell_seed(spec, size, algo, lr);
                    config.pairs_per_user = spec.pairs_per_user;

                    const CellOutput cell = run_cell(split, ranks, algo, config);

                    PredictionSet predictions;
                    predictions.reserve(split.test.n_triples());
                    for (const auto& t : split.test.triples())
                        predictions.push_back(
                            {t.user_id, t.item_id, cell.predict(t.user_id, t.item_id), t.rating});

                    const TopKLists lists = top_k(cell.predict, eval_users, split.test.items(),
                                                  spec.top_k, hidden);
                    const MatthewResult matthew =
                        matthew_degree(exposure_profile(lists, spec.top_k));

                    ReportRow row;
                    row.algorithm = algorithm_name(algo);
                    row.learning_rate = lr;
                    row.sample_size = size;
                    row.mae = mae(predictions);
                    row.matthew_degree = matthew.degree;
                    row.train_seconds = spec.fixed_timing ? 0.0 : cell.train_seconds;
                    row.seed = config.seed;
                    report.rows.push_back(std::move(row));
                } catch (const ConfigError& e) {
                    throw ConfigError(where + e.what());
                } catch (const DataError& e) {
                    throw DataError(where + e.what());
                } catch (const LookupError& e) {
                    throw LookupError(where + e.what());
                } catch (const Error& e) {
                    throw Error(where + e.what());
                }
            }
        }
    }
    return report;
}

void emit_csv(const ExperimentReport& report, std::ostream& out) {
    out << "algorithm,learning_rate,sample_size,mae,matthew_degree,train_seconds,seed\n";
    for (const auto& row : report.rows)
        out << row.algorithm << ',' << detail::format_double(row.learning_rate) << ','
            << row.sample_size << ',' << detail::format_double(row.mae) << ','
            << detail::format_double(row.matthew_degree) << ','
            << detail::format_double(row.train_seconds) << ',' << row.seed << '\n';
    if (!out) throw IoError("failed while writing report CSV");
}

void emit_csv(const ExperimentReport& report, const std::filesystem::path& destination) {
    std::ofstream out(destination);
    if (!out) throw IoError("cannot open report CSV for writing: " + destination.string());
    emit_csv(report, out);
}

void emit_json(const ExperimentReport& report, std::ostream& out) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        rows.push_back({
            {"algorithm", row.algorithm},
            {"learning_rate", row.learning_rate},
            {"sample_size", row.sample_size},
            {"mae", row.mae},
            {"matthew_degree", row.matthew_degree},
            {"train_seconds", row.train_seconds},
            {"seed", row.seed},
        });
    }
    out << rows.dump(2) << '\n';
    if (!out) throw IoError("failed while writing report JSON");
}

void emit_json(const ExperimentReport& report, const std::filesystem::path& destination) {
    std::ofstream out(destination);
    if (!out) throw IoError("cannot open report JSON for writing: " + destination.string());
    emit_json(report, out);
}

ExperimentReport parse_report_json(std::istream& in) {
    ExperimentReport report;
    try {
        const nlohmann::json rows = nlohmann::json::parse(in);
        if (!rows.is_array()) throw ParseError("report JSON must be an array of rows");
        for (const auto& r : rows) {
            ReportRow row;
            row.algorithm = r.at("algorithm").get<std::string>();
            row.learning_rate = r.at("learning_rate").get<double>();
            row.sample_size = r.at("sample_size").get<std::size_t>();
            row.mae = r.at("mae").get<double>();
            row.matthew_degree = r.at("matthew_degree").get<double>();
            row.train_seconds = r.at("train_seconds").get<double>();
            row.seed = r.at("seed").get<std::uint64_t>();
            report.rows.push_back(std::move(row));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad report JSON: ") + e.what());
    }
    return report;
}

}  // namespace dotmat
