#ifndef DOTMAT_METRICS_HPP
#define DOTMAT_METRICS_HPP

#include <functional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dotmat/model.hpp"
#include "dotmat/types.hpp"

namespace dotmat {

struct PredictionRecord {
    UserId user_id{};
    ItemId item_id{};
    double predicted{};
    double actual{};
};

using PredictionSet = std::vector<PredictionRecord>;

// Mean absolute error over the set.
double mae(const PredictionSet& predictions);

// (user, item) pairs to hide from recommendation lists, usually the train
// pairs of the dataset being evaluated.
using ExcludePairs = std::unordered_map<UserId, std::unordered_set<ItemId>>;
ExcludePairs observed_pairs(const InteractionDataset& dataset);

using ScoreFn = std::function<double(UserId, ItemId)>;

// Per-user top-k lists: highest score first, ties by ascending item id,
// excluded items filtered out; shorter than k when candidates run out.
using TopKLists = std::vector<std::pair<UserId, std::vector<ItemId>>>;

TopKLists top_k(const ScoreFn& score, std::span<const UserId> users, std::span<const ItemId> items,
                std::size_t k, const ExcludePairs& exclude);
// Default scorer: predict_rating over the model.
TopKLists top_k(const FactorModel& model, double r_max, std::span<const UserId> users,
                std::span<const ItemId> items, std::size_t k, const ExcludePairs& exclude);

// How often each item shows up across all users' top-k lists.
struct ExposureProfile {
    std::unordered_map<ItemId, std::size_t> counts;
    std::size_t k = 0;
    std::size_t users_served = 0;
};

ExposureProfile exposure_profile(const TopKLists& lists, std::size_t k);

// Degree of Matthew effect: absolute slope of the least-squares fit of
// ln(count) against ln(rank) over the nonzero exposure counts sorted
// descending. 0 means uniform exposure; an exact Zipf profile with exponent
// s yields s. Items with zero exposure are excluded and counted.
struct MatthewResult {
    double degree = 0.0;
    std::size_t fitted = 0;          // nonzero counts entering the fit
    std::size_t excluded_zero = 0;   // zero counts left out (log 0)
};

MatthewResult matthew_degree(std::span<const double> counts);
MatthewResult matthew_degree(const ExposureProfile& exposure);

}  // namespace dotmat

#endif  // DOTMAT_METRICS_HPP
