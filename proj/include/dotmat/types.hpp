#ifndef DOTMAT_TYPES_HPP
#define DOTMAT_TYPES_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "dotmat/errors.hpp"

namespace dotmat {

using UserId = std::int64_t;
using ItemId = std::int64_t;

// One observed (user, item, rating) event.
struct RatingTriple {
    UserId user_id{};
    ItemId item_id{};
    double rating{};
    std::optional<std::int64_t> timestamp{};

    bool operator==(const RatingTriple&) const = default;
};

// Indexed collection of rating triples with explicit user/item universes and
// a rating ceiling. Universes may be wider than the ids the triples touch;
// every triple's ids must lie inside them, each (user, item) pair appears at
// most once, and r_max dominates every observed rating.
class InteractionDataset {
public:
    InteractionDataset() = default;

    // Universe = the distinct ids seen in `triples`; r_max defaults to the
    // maximum observed rating.
    static InteractionDataset from_triples(std::vector<RatingTriple> triples,
                                           std::optional<double> r_max = std::nullopt);

    // Explicit (possibly wider) universes.
    static InteractionDataset with_universe(std::vector<UserId> users, std::vector<ItemId> items,
                                            std::vector<RatingTriple> triples, double r_max);

    const std::vector<UserId>& users() const { return users_; }
    const std::vector<ItemId>& items() const { return items_; }
    const std::vector<RatingTriple>& triples() const { return triples_; }
    double r_max() const { return r_max_; }

    std::size_t n_users() const { return users_.size(); }
    std::size_t n_items() const { return items_.size(); }
    std::size_t n_triples() const { return triples_.size(); }
    bool empty() const { return triples_.empty() && users_.empty() && items_.empty(); }

    bool operator==(const InteractionDataset&) const = default;

private:
    std::vector<UserId> users_;  // sorted, unique
    std::vector<ItemId> items_;  // sorted, unique
    std::vector<RatingTriple> triples_;
    double r_max_ = 0.0;
};

// Hyperparameters shared by every trainer.
struct TrainConfig {
    double learning_rate = 0.01;   // gamma
    std::size_t epochs = 20;       // 0 returns the freshly initialized model
    std::size_t dim = 16;          // latent dimension k
    double clamp_eps = 1e-6;       // clamp interval [eps, 1-eps]
    std::uint64_t seed = 42;
    std::size_t pairs_per_user = 100;  // data-free sampling budget per epoch

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
        if (dim < 1) throw ConfigError("dim must be >= 1");
        if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) throw ConfigError("clamp_eps must lie in (0, 0.5)");
        if (pairs_per_user < 1) throw ConfigError("pairs_per_user must be >= 1");
    }
};

}  // namespace dotmat

#endif  // DOTMAT_TYPES_HPP
