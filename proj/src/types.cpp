#include "dotmat/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace dotmat {

namespace {

template <typename T>
std::vector<T> sorted_unique(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

void check_triples(const std::vector<RatingTriple>& triples, const std::vector<UserId>& users,
                   const std::vector<ItemId>& items, double r_max) {
    for (const auto& t : triples) {
        if (!(t.rating > 0.0)) throw DataError("rating must be > 0");
        if (!(t.rating <= r_max)) throw DataError("rating exceeds r_max");
        if (!std::isfinite(t.rating)) throw DataError("rating must be finite");
        if (!std::binary_search(users.begin(), users.end(), t.user_id))
            throw DataError("triple references a user outside the universe");
        if (!std::binary_search(items.begin(), items.end(), t.item_id))
            throw DataError("triple references an item outside the universe");
    }
    // (user, item) pairs must be unique; checked via a sorted index to keep
    // peak memory flat for multi-million-triple densified sets.
    std::vector<std::uint32_t> order(triples.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const auto& x = triples[a];
        const auto& y = triples[b];
        if (x.user_id != y.user_id) return x.user_id < y.user_id;
        return x.item_id < y.item_id;
    });
    for (std::size_t i = 1; i < order.size(); ++i) {
        const auto& a = triples[order[i - 1]];
        const auto& b = triples[order[i]];
        if (a.user_id == b.user_id && a.item_id == b.item_id)
            throw DataError("duplicate (user, item) pair in dataset");
    }
}

}  // namespace

InteractionDataset InteractionDataset::from_triples(std::vector<RatingTriple> triples,
                                                    std::optional<double> r_max) {
    std::vector<UserId> users;
    std::vector<ItemId> items;
    users.reserve(triples.size());
    items.reserve(triples.size());
    double max_rating = 0.0;
    for (const auto& t : triples) {
        users.push_back(t.user_id);
        items.push_back(t.item_id);
        max_rating = std::max(max_rating, t.rating);
    }
    return with_universe(sorted_unique(std::move(users)), sorted_unique(std::move(items)),
                         std::move(triples), r_max.value_or(max_rating));
}

InteractionDataset InteractionDataset::with_universe(std::vector<UserId> users,
                                                     std::vector<ItemId> items,
                                                     std::vector<RatingTriple> triples,
                                                     double r_max) {
    users = sorted_unique(std::move(users));
    items = sorted_unique(std::move(items));
    if (r_max < 0.0 || !std::isfinite(r_max)) throw DataError("r_max must be finite and >= 0");
    check_triples(triples, users, items, r_max);
    InteractionDataset ds;
    ds.users_ = std::move(users);
    ds.items_ = std::move(items);
    ds.triples_ = std::move(triples);
    ds.r_max_ = r_max;
    return ds;
}

}  // namespace dotmat
