#ifndef DOTMAT_HARNESS_HPP
#define DOTMAT_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dotmat/types.hpp"

namespace dotmat {

enum class Algorithm {
    DotMat,
    DotMatHybrid,
    MfClassic,
    RankMat,
    GloVeMat,
    RandomBaseline,
    MeanBaseline,
};

std::string algorithm_name(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);  // ConfigError on unknown
const std::vector<Algorithm>& all_algorithms();

// One grid-search request: algorithms x learning rates x user sample sizes,
// everything else shared.
struct GridSpec {
    std::vector<Algorithm> algorithms = all_algorithms();
    std::vector<double> learning_rates = {1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2};
    std::vector<std::size_t> sample_sizes = {100, 1000, 2000};
    std::size_t dim = 16;
    std::size_t epochs = 20;
    double test_fraction = 0.2;
    std::size_t top_k = 10;
    std::size_t pairs_per_user = 100;
    double clamp_eps = 1e-6;
    std::uint64_t seed = 42;
    bool fixed_timing = false;  // report train_seconds as 0 for byte-reproducible output

    void validate() const;
};

struct ReportRow {
    std::string algorithm;
    double learning_rate{};
    std::size_t sample_size{};
    double mae{};
    double matthew_degree{};
    double train_seconds{};
    std::uint64_t seed{};  // per-cell derived seed

    bool operator==(const ReportRow&) const = default;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;

    bool operator==(const ExperimentReport&) const = default;
};

// Runs the full protocol: per sample size, one seeded user sample and one
// train/test split shared by every (algorithm, rate) cell; per cell, train,
// predict all test triples, and compute MAE plus the Matthew degree of the
// top-k exposure over test users. Rows come out in (sample size, algorithm,
// rate) order, each list in the order given by the spec. A failing cell
// aborts the run with the cell's identity in the error message.
ExperimentReport run_grid(const InteractionDataset& dataset, const GridSpec& spec);

// CSV with header
// `algorithm,learning_rate,sample_size,mae,matthew_degree,train_seconds,seed`
// and shortest round-trip decimals.
void emit_csv(const ExperimentReport& report, std::ostream& out);
void emit_csv(const ExperimentReport& report, const std::filesystem::path& destination);

// JSON array mirroring the rows.
void emit_json(const ExperimentReport& report, std::ostream& out);
void emit_json(const ExperimentReport& report, const std::filesystem::path& destination);
ExperimentReport parse_report_json(std::istream& in);

}  // namespace dotmat

#endif  // DOTMAT_HARNESS_HPP
