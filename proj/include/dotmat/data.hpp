#ifndef DOTMAT_DATA_HPP
#define DOTMAT_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>

#include "dotmat/types.hpp"

namespace dotmat {

// Side information from a parse: total data lines and how many earlier
// (user, item) occurrences were overwritten by later ones.
struct ParseStats {
    std::size_t lines = 0;
    std::size_t duplicates_replaced = 0;
};

// `UserID::MovieID::Rating::Timestamp` lines. r_max is the maximum observed
// rating unless overridden.
InteractionDataset parse_movielens(std::istream& in, ParseStats* stats = nullptr,
                                   std::optional<double> r_max_override = std::nullopt);
InteractionDataset parse_movielens_file(const std::filesystem::path& source,
                                        ParseStats* stats = nullptr,
                                        std::optional<double> r_max_override = std::nullopt);

// Column names for the generic CSV loader; the file must have a header row.
struct CsvColumns {
    std::string user = "user_id";
    std::string item = "item_id";
    std::string rating = "rating";
};

InteractionDataset parse_csv(std::istream& in, const CsvColumns& columns,
                             ParseStats* stats = nullptr,
                             std::optional<double> r_max_override = std::nullopt);
InteractionDataset parse_csv_file(const std::filesystem::path& source, const CsvColumns& columns,
                                  ParseStats* stats = nullptr,
                                  std::optional<double> r_max_override = std::nullopt);

// Uniform sample of n users without replacement; keeps all their triples,
// shrinks the item universe to items they touched.
InteractionDataset sample_users(const InteractionDataset& dataset, std::size_t n,
                                std::uint64_t seed);

struct SplitDataset {
    InteractionDataset train;
    InteractionDataset test;
};

// Per-user stratified split: ceil(fraction * count) triples to test, rest to
// train, except single-triple users, whose triple stays in train. Both sides
// carry the full source universes and r_max.
SplitDataset split_train_test(const InteractionDataset& dataset, double test_fraction,
                              std::uint64_t seed);

// Dense popularity ranks 1..N by descending rating count, ties by ascending
// id. Every universe member is ranked, including zero-count ones.
struct PopularityRanks {
    std::unordered_map<UserId, std::size_t> user_rank;
    std::unordered_map<ItemId, std::size_t> item_rank;
};

PopularityRanks popularity_ranks(const InteractionDataset& dataset);

// Cache format written by `ingest` and consumed by the other subcommands:
//   DOTMAT-DATASET 1 <n_users> <n_items> <n_triples> <r_max>
//   <user> <item> <rating> <timestamp|->    (one line per triple)
// followed by `u <id>` / `i <id>` lines for universe members no triple
// touches. Numbers are shortest round-trip decimals.
void save_dataset(const InteractionDataset& dataset, std::ostream& out);
void save_dataset(const InteractionDataset& dataset, const std::filesystem::path& destination);
InteractionDataset load_dataset(std::istream& in);
InteractionDataset load_dataset(const std::filesystem::path& source);

}  // namespace dotmat

#endif  // DOTMAT_DATA_HPP
