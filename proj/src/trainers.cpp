#include "dotmat/trainers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "dotmat/rng.hpp"
#include "numeric_io.hpp"

namespace dotmat {

namespace {

double sign_of(double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); }

// No dimension check: callers in hot loops take rows from one model.
double dot_unchecked(std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

void check_same_dim(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw DimensionError("factor vectors have lengths " + std::to_string(u.size()) + " and " +
                             std::to_string(v.size()));
}

double clamp_unit(double dot, double eps) {
    return std::min(std::max(dot, eps), 1.0 - eps);
}

// c such that dL/dU = c*V and dL/dV = c*U for L = |x^x - target|.
double dotmat_scalar_at(double x, double target) {
    const double xx = std::pow(x, x);
    return xx * sign_of(xx - target) * (1.0 + std::log(x));
}

// U -= step*V and V -= step*U from the pre-update snapshot, then floor at 0.
void descend_floored(std::span<double> u, std::span<double> v, double step) {
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double ui = u[i];
        const double vi = v[i];
        u[i] = std::max(0.0, ui - step * vi);
        v[i] = std::max(0.0, vi - step * ui);
    }
}

// Unconstrained variant for classic MF (moves along +step here).
void ascend_free(std::span<double> u, std::span<double> v, double step) {
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double ui = u[i];
        const double vi = v[i];
        u[i] = ui + step * vi;
        v[i] = vi + step * ui;
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<UserId> merge_ids(const std::vector<UserId>& a, const std::vector<UserId>& b) {
    std::vector<UserId> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Triples rewritten against model row indices, plus a precomputed target.
struct IndexedTriple {
    std::uint32_t user;
    std::uint32_t item;
    double target;
    double aux;  // trainer-specific (RankMat: ln a)
};

std::vector<IndexedTriple> index_triples(const FactorModel& model,
                                         const InteractionDataset& dataset,
                                         const std::function<double(const RatingTriple&)>& target,
                                         const std::function<double(const RatingTriple&)>& aux = {}) {
    std::vector<IndexedTriple> out;
    out.reserve(dataset.n_triples());
    for (const auto& t : dataset.triples()) {
        IndexedTriple it;
        it.user = static_cast<std::uint32_t>(model.user_index(t.user_id));
        it.item = static_cast<std::uint32_t>(model.item_index(t.item_id));
        it.target = target(t);
        it.aux = aux ? aux(t) : 0.0;
        out.push_back(it);
    }
    return out;
}

// Shared driver for the supervised baselines: one seeded shuffled sweep per
// epoch, per-triple loss accumulated before the update.
template <typename Step>
TrainTrace sweep_epochs(FactorModel& model, std::vector<IndexedTriple>& triples,
                        const TrainConfig& config, Step&& step) {
    TrainTrace trace;
    std::vector<std::size_t> order(triples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        auto gen = rng::make_engine(rng::derive_seed(config.seed, "sweep", epoch));
        rng::shuffle(order, gen);
        double loss_sum = 0.0;
        for (const std::size_t idx : order) {
            const IndexedTriple& t = triples[idx];
            loss_sum += step(model.user_row(t.user), model.item_row(t.item), t);
        }
        const double mean = triples.empty() ? 0.0 : loss_sum / static_cast<double>(triples.size());
        trace.epochs.push_back({epoch, mean, seconds_since(start)});
    }
    return trace;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pair losses and gradient scalars.
// ---------------------------------------------------------------------------

double dotmat_pair_loss(std::span<const double> u, std::span<const double> v, double target,
                        double eps) {
    const double x = clamped_dot(u, v, eps);
    return std::fabs(std::pow(x, x) - target);
}

double dotmat_pair_grad_scalar(std::span<const double> u, std::span<const double> v, double target,
                               double eps) {
    return dotmat_scalar_at(clamped_dot(u, v, eps), target);
}

double dotmat_datafree_pair_loss(std::span<const double> u, std::span<const double> v, double eps) {
    const double x = clamped_dot(u, v, eps);
    return std::fabs(std::pow(x, x) - x);
}

double dotmat_datafree_grad_scalar(std::span<const double> u, std::span<const double> v,
                                   double eps) {
    const double x = clamped_dot(u, v, eps);
    return dotmat_scalar_at(x, x);
}

double rankmat_pair_loss(std::span<const double> u, std::span<const double> v,
                         double inv_rank_product, double target, double eps) {
    if (!(inv_rank_product > 0.0 && inv_rank_product <= 1.0))
        throw ConfigError("inv_rank_product must lie in (0, 1]");
    const double x = clamped_dot(u, v, eps);
    const double e = std::pow(inv_rank_product, x) - target;
    return e * e;
}

double rankmat_pair_grad_scalar(std::span<const double> u, std::span<const double> v,
                                double inv_rank_product, double target, double eps) {
    if (!(inv_rank_product > 0.0 && inv_rank_product <= 1.0))
        throw ConfigError("inv_rank_product must lie in (0, 1]");
    const double x = clamped_dot(u, v, eps);
    const double ax = std::pow(inv_rank_product, x);
    return 2.0 * (ax - target) * ax * std::log(inv_rank_product);
}

double glovemat_pair_loss(std::span<const double> u, std::span<const double> v, double rating) {
    check_same_dim(u, v);
    const double e = dot_unchecked(u, v) - std::log(rating + 1.0);
    return e * e;
}

double glovemat_pair_grad_scalar(std::span<const double> u, std::span<const double> v,
                                 double rating) {
    check_same_dim(u, v);
    return 2.0 * (dot_unchecked(u, v) - std::log(rating + 1.0));
}

double dotmat_loss(const FactorModel& model, const InteractionDataset& dataset, double eps) {
    if (dataset.n_triples() == 0) return 0.0;
    const double r_max = dataset.r_max();
    double sum = 0.0;
    for (const auto& t : dataset.triples())
        sum += dotmat_pair_loss(model.user_factors(t.user_id), model.item_factors(t.item_id),
                                t.rating / r_max, eps);
    return sum / static_cast<double>(dataset.n_triples());
}

// ---------------------------------------------------------------------------
// Single steps.
// ---------------------------------------------------------------------------

void dotmat_step_supervised(FactorModel& model, UserId user, ItemId item, double rating,
                            double r_max, double learning_rate, double eps) {
    if (!(r_max > 0.0)) throw ConfigError("r_max must be > 0");
    auto u = model.user_factors(user);
    auto v = model.item_factors(item);
    const double c = dotmat_scalar_at(clamped_dot(u, v, eps), rating / r_max);
    descend_floored(u, v, learning_rate * c);
}

void dotmat_step_datafree(FactorModel& model, UserId user, ItemId item, double learning_rate,
                          double eps) {
    auto u = model.user_factors(user);
    auto v = model.item_factors(item);
    const double x = clamped_dot(u, v, eps);
    descend_floored(u, v, learning_rate * dotmat_scalar_at(x, x));
}

// ---------------------------------------------------------------------------
// Data-free DotMat.
// ---------------------------------------------------------------------------

PairSampler::PairSampler(std::size_t n_users, std::size_t n_items, std::uint64_t seed,
                         std::size_t pairs_per_user)
    : n_users_(n_users), n_items_(n_items), seed_(seed), pairs_per_user_(pairs_per_user) {
    if (n_users_ == 0 || n_items_ == 0)
        throw ConfigError("pair sampling needs at least one user and one item");
    if (pairs_per_user_ == 0) throw ConfigError("pairs_per_user must be >= 1");
}

void PairSampler::for_epoch(std::size_t epoch,
                            const std::function<void(std::size_t, std::size_t)>& visit) const {
    auto gen = rng::make_engine(rng::derive_seed(seed_, "epoch", epoch));
    for (std::size_t u = 0; u < n_users_; ++u)
        for (std::size_t p = 0; p < pairs_per_user_; ++p)
            visit(u, static_cast<std::size_t>(rng::uniform_below(gen, n_items_)));
}

void TrainTrace::to_csv(std::ostream& out) const {
    out << "epoch,mean_loss,seconds\n";
    for (const auto& e : epochs)
        out << e.epoch << ',' << detail::format_double(e.mean_loss) << ','
            << detail::format_double(e.seconds) << '\n';
}

TrainResult train_dotmat(std::span<const UserId> user_ids, std::span<const ItemId> item_ids,
                         const TrainConfig& config, const StepObserver& observer) {
    config.validate();
    FactorModel model =
        init_model(user_ids, item_ids, config.dim, rng::derive_seed(config.seed, "init"));
    if (config.epochs == 0) return {std::move(model), {}};

    PairSampler sampler(model.n_users(), model.n_items(), rng::derive_seed(config.seed, "pairs"),
                        config.pairs_per_user);
    const double lr = config.learning_rate;
    const double eps = config.clamp_eps;
    const bool observed = static_cast<bool>(observer);

    TrainTrace trace;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        double loss_sum = 0.0;
        sampler.for_epoch(epoch, [&](std::size_t ui, std::size_t ii) {
            auto u = model.user_row(ui);
            auto v = model.item_row(ii);
            const double x = clamp_unit(dot_unchecked(u, v), eps);
            if (observed) observer(epoch, ui, ii, x);
            loss_sum += std::fabs(std::pow(x, x) - x);
            descend_floored(u, v, lr * dotmat_scalar_at(x, x));
        });
        trace.epochs.push_back(
            {epoch, loss_sum / static_cast<double>(sampler.pairs_per_epoch()), seconds_since(start)});
    }
    return {std::move(model), std::move(trace)};
}

TrainResult train_dotmat(const InteractionDataset& dataset, const TrainConfig& config,
                         const StepObserver& observer) {
    return train_dotmat(dataset.users(), dataset.items(), config, observer);
}

// ---------------------------------------------------------------------------
// Supervised baselines.
// ---------------------------------------------------------------------------

namespace {

FactorModel init_union_model(const SplitDataset& split, const TrainConfig& config) {
    config.validate();
    return init_model(merge_ids(split.train.users(), split.test.users()),
                      merge_ids(split.train.items(), split.test.items()), config.dim,
                      rng::derive_seed(config.seed, "init"));
}

}  // namespace

TrainResult train_mf_classic(const SplitDataset& split, const TrainConfig& config) {
    FactorModel model = init_union_model(split, config);
    const double r_max = split.train.r_max();
    if (split.train.n_triples() > 0 && !(r_max > 0.0))
        throw ConfigError("r_max must be > 0 to normalize ratings");
    auto triples =
        index_triples(model, split.train, [&](const RatingTriple& t) { return t.rating / r_max; });
    const double lr = config.learning_rate;
    TrainTrace trace = sweep_epochs(
        model, triples, config,
        [lr](std::span<double> u, std::span<double> v, const IndexedTriple& t) {
            const double e = t.target - dot_unchecked(u, v);
            ascend_free(u, v, lr * e);
            return e * e;
        });
    return {std::move(model), std::move(trace)};
}

TrainResult train_rankmat(const SplitDataset& split, const PopularityRanks& ranks,
                          const TrainConfig& config) {
    FactorModel model = init_union_model(split, config);
    const double r_max = split.train.r_max();
    if (split.train.n_triples() > 0 && !(r_max > 0.0))
        throw ConfigError("r_max must be > 0 to normalize ratings");
    auto rank_of = [](const auto& table, std::int64_t id, const char* kind) {
        auto it = table.find(id);
        if (it == table.end())
            throw LookupError(std::string("no popularity rank for ") + kind + " " +
                              std::to_string(id));
        return static_cast<double>(it->second);
    };
    auto triples = index_triples(
        model, split.train, [&](const RatingTriple& t) { return t.rating / r_max; },
        [&](const RatingTriple& t) {
            const double a = 1.0 / (rank_of(ranks.user_rank, t.user_id, "user") *
                                    rank_of(ranks.item_rank, t.item_id, "item"));
            return std::log(a);
        });
    const double lr = config.learning_rate;
    const double eps = config.clamp_eps;
    TrainTrace trace = sweep_epochs(
        model, triples, config,
        [lr, eps](std::span<double> u, std::span<double> v, const IndexedTriple& t) {
            const double x = clamp_unit(dot_unchecked(u, v), eps);
            const double ax = std::exp(t.aux * x);  // a^x with ln a precomputed
            const double e = ax - t.target;
            descend_floored(u, v, lr * 2.0 * e * ax * t.aux);
            return e * e;
        });
    return {std::move(model), std::move(trace)};
}

TrainResult train_glovemat(const SplitDataset& split, const TrainConfig& config) {
    FactorModel model = init_union_model(split, config);
    auto triples = index_triples(model, split.train,
                                 [](const RatingTriple& t) { return std::log(t.rating + 1.0); });
    const double lr = config.learning_rate;
    TrainTrace trace = sweep_epochs(
        model, triples, config,
        [lr](std::span<double> u, std::span<double> v, const IndexedTriple& t) {
            const double e = dot_unchecked(u, v) - t.target;
            descend_floored(u, v, lr * 2.0 * e);
            return e * e;
        });
    return {std::move(model), std::move(trace)};
}

// ---------------------------------------------------------------------------
// Densify + hybrid.
// ---------------------------------------------------------------------------

namespace {

struct PairKey {
    UserId user;
    ItemId item;
    bool operator==(const PairKey&) const = default;
};

struct PairKeyHash {
    std::size_t operator()(const PairKey& p) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p.user);
        h = rng::mix(h) ^ static_cast<std::uint64_t>(p.item);
        return static_cast<std::size_t>(rng::mix(h));
    }
};

}  // namespace

InteractionDataset densify(const FactorModel& model, const InteractionDataset& base,
                           std::span<const UserId> user_ids, std::span<const ItemId> item_ids,
                           double eps) {
    std::vector<UserId> users(user_ids.begin(), user_ids.end());
    std::vector<ItemId> items(item_ids.begin(), item_ids.end());
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    if (users.empty() || items.empty()) throw ConfigError("densify needs non-empty universes");

    std::unordered_map<PairKey, std::size_t, PairKeyHash> observed;
    observed.reserve(base.n_triples());
    for (std::size_t i = 0; i < base.n_triples(); ++i) {
        const auto& t = base.triples()[i];
        if (!std::binary_search(users.begin(), users.end(), t.user_id) ||
            !std::binary_search(items.begin(), items.end(), t.item_id))
            throw IntegrityError("observed triple (" + std::to_string(t.user_id) + ", " +
                                 std::to_string(t.item_id) + ") outside the densify universes");
        observed.emplace(PairKey{t.user_id, t.item_id}, i);
    }

    const double r_max = base.r_max();
    if (!(r_max > 0.0)) throw ConfigError("densify needs r_max > 0");

    std::vector<RatingTriple> out;
    out.reserve(users.size() * items.size());
    std::vector<std::size_t> item_index(items.size());
    for (std::size_t j = 0; j < items.size(); ++j) item_index[j] = model.item_index(items[j]);
    for (UserId u : users) {
        const auto urow = model.user_row(model.user_index(u));
        for (std::size_t j = 0; j < items.size(); ++j) {
            const ItemId it = items[j];
            if (auto hit = observed.find(PairKey{u, it}); hit != observed.end()) {
                out.push_back(base.triples()[hit->second]);
            } else {
                const double x = clamp_unit(dot_unchecked(urow, model.item_row(item_index[j])), eps);
                out.push_back(RatingTriple{u, it, r_max * x, std::nullopt});
            }
        }
    }
    return InteractionDataset::with_universe(std::move(users), std::move(items), std::move(out),
                                             r_max);
}

TrainResult train_dotmat_hybrid(const SplitDataset& split, const TrainConfig& config_dotmat,
                                const TrainConfig& config_mf) {
    config_mf.validate();
    const std::vector<UserId> users = merge_ids(split.train.users(), split.test.users());
    const std::vector<ItemId> items = merge_ids(split.train.items(), split.test.items());
    TrainResult stage1 = train_dotmat(users, items, config_dotmat);
    InteractionDataset densified =
        densify(stage1.model, split.train, users, items, config_dotmat.clamp_eps);
    SplitDataset stage2;
    stage2.train = std::move(densified);
    stage2.test = InteractionDataset::with_universe(users, items, {}, split.train.r_max());
    return train_mf_classic(stage2, config_mf);
}

// ---------------------------------------------------------------------------
// Prediction closures.
// ---------------------------------------------------------------------------

PredictFn baseline_random(std::uint64_t seed, double r_max) {
    if (!(r_max > 0.0)) throw ConfigError("r_max must be > 0");
    return [seed, r_max](UserId user, ItemId item) {
        const std::uint64_t h = rng::SeedDigest{}
                                    .u64(seed)
                                    .str("random")
                                    .u64(static_cast<std::uint64_t>(user))
                                    .u64(static_cast<std::uint64_t>(item))
                                    .value();
        const double unit = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        return unit * r_max;
    };
}

PredictFn baseline_mean(const SplitDataset& split) {
    if (split.train.n_triples() == 0)
        throw ConfigError("mean baseline needs at least one training triple");
    std::unordered_map<ItemId, std::pair<double, std::size_t>> sums;
    double total = 0.0;
    for (const auto& t : split.train.triples()) {
        auto& [sum, count] = sums[t.item_id];
        sum += t.rating;
        ++count;
        total += t.rating;
    }
    std::unordered_map<ItemId, double> item_mean;
    item_mean.reserve(sums.size());
    for (const auto& [id, sc] : sums) item_mean.emplace(id, sc.first / static_cast<double>(sc.second));
    const double global = total / static_cast<double>(split.train.n_triples());
    return [item_mean = std::move(item_mean), global](UserId, ItemId item) {
        auto it = item_mean.find(item);
        return it == item_mean.end() ? global : it->second;
    };
}

PredictFn model_predictor(const FactorModel& model, double r_max, double eps) {
    return [model, r_max, eps](UserId user, ItemId item) {
        return predict_rating(model, user, item, r_max, eps);
    };
}

PredictFn glovemat_predictor(const FactorModel& model, double r_max) {
    return [model, r_max](UserId user, ItemId item) {
        const double dot = dot_unchecked(model.user_factors(user), model.item_factors(item));
        return std::min(std::max(std::exp(dot) - 1.0, 0.0), r_max);
    };
}

}  // namespace dotmat
