#ifndef DOTMAT_TRAINERS_HPP
#define DOTMAT_TRAINERS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "dotmat/data.hpp"
#include "dotmat/model.hpp"
#include "dotmat/types.hpp"

namespace dotmat {

// ---------------------------------------------------------------------------
// Per-pair losses and their analytic gradients.
//
// Every loss below depends on the factors only through the dot product, so
// dL/dU = scalar * V and dL/dV = scalar * U; the functions return that
// scalar. Training steps descend along it; the gradient tests compare it
// against finite differences of the matching loss.
// ---------------------------------------------------------------------------

// DotMat supervised loss |x^x - target| with x = clamped_dot(u, v, eps).
double dotmat_pair_loss(std::span<const double> u, std::span<const double> v, double target,
                        double eps = kDefaultClampEps);
// d/ddot |x^x - t| = x^x * sign(x^x - t) * (1 + ln x); sign(0) = 0 makes the
// kink a fixed point. Natural log: it is forced by d/dx x^x = x^x (1 + ln x).
double dotmat_pair_grad_scalar(std::span<const double> u, std::span<const double> v, double target,
                               double eps = kDefaultClampEps);

// Data-free variant: the target is the dot product itself.
double dotmat_datafree_pair_loss(std::span<const double> u, std::span<const double> v,
                                 double eps = kDefaultClampEps);
double dotmat_datafree_grad_scalar(std::span<const double> u, std::span<const double> v,
                                   double eps = kDefaultClampEps);

// RankMat loss (a^x - target)^2 where a = 1/(rank_i * rank_j) in (0, 1].
double rankmat_pair_loss(std::span<const double> u, std::span<const double> v,
                         double inv_rank_product, double target, double eps = kDefaultClampEps);
double rankmat_pair_grad_scalar(std::span<const double> u, std::span<const double> v,
                                double inv_rank_product, double target,
                                double eps = kDefaultClampEps);

// GloVeMat loss (u.v - ln(rating + 1))^2 on the raw, unclamped dot.
double glovemat_pair_loss(std::span<const double> u, std::span<const double> v, double rating);
double glovemat_pair_grad_scalar(std::span<const double> u, std::span<const double> v,
                                 double rating);

// Mean of |x^x - r/r_max| over the dataset's observed triples.
double dotmat_loss(const FactorModel& model, const InteractionDataset& dataset,
                   double eps = kDefaultClampEps);

// ---------------------------------------------------------------------------
// Single SGD steps. Both factor updates read the pre-update snapshot of the
// other vector, then entries are floored at 0 (except classic MF, which is
// unconstrained by design).
// ---------------------------------------------------------------------------

void dotmat_step_supervised(FactorModel& model, UserId user, ItemId item, double rating,
                            double r_max, double learning_rate, double eps = kDefaultClampEps);

void dotmat_step_datafree(FactorModel& model, UserId user, ItemId item, double learning_rate,
                          double eps = kDefaultClampEps);

// ---------------------------------------------------------------------------
// Training drivers.
// ---------------------------------------------------------------------------

// Deterministic (user, item) pair stream for data-free training: per epoch,
// every user is paired with pairs_per_user items drawn uniformly with
// replacement. The stream is a pure function of (seed, epoch).
class PairSampler {
public:
    PairSampler(std::size_t n_users, std::size_t n_items, std::uint64_t seed,
                std::size_t pairs_per_user);

    std::size_t pairs_per_epoch() const { return n_users_ * pairs_per_user_; }

    // visit(user_index, item_index), in emission order.
    void for_epoch(std::size_t epoch, const std::function<void(std::size_t, std::size_t)>& visit) const;

private:
    std::size_t n_users_;
    std::size_t n_items_;
    std::uint64_t seed_;
    std::size_t pairs_per_user_;
};

struct TrainTrace {
    struct Epoch {
        std::size_t epoch;     // 0-based, strictly increasing
        double mean_loss;      // trainer's own per-pair loss, mean over visits
        double seconds;        // wall clock for the epoch
    };
    std::vector<Epoch> epochs;

    // CSV with header `epoch,mean_loss,seconds`.
    void to_csv(std::ostream& out) const;
};

struct TrainResult {
    FactorModel model;
    TrainTrace trace;
};

// Observation hook for instrumenting data-free training; receives the
// clamped dot of each visited pair before the update is applied.
using StepObserver =
    std::function<void(std::size_t epoch, std::size_t user_index, std::size_t item_index, double x)>;

// Data-free DotMat training: initializes the model over the given universes
// and streams sampled pairs through the data-free step. Never sees a rating.
// The trace records the mean |x^x - x| per epoch.
TrainResult train_dotmat(std::span<const UserId> user_ids, std::span<const ItemId> item_ids,
                         const TrainConfig& config, const StepObserver& observer = {});
// Convenience over a dataset: only its universes are consumed.
TrainResult train_dotmat(const InteractionDataset& dataset, const TrainConfig& config,
                         const StepObserver& observer = {});

// Classic MF baseline: squared error on r/r_max with the raw dot, no
// regularization, no biases, no nonnegativity floor. Model covers the union
// of the split's universes; triples are swept in a seeded shuffled order.
TrainResult train_mf_classic(const SplitDataset& split, const TrainConfig& config);

// RankMat baseline over the train split; ranks must cover its users/items.
TrainResult train_rankmat(const SplitDataset& split, const PopularityRanks& ranks,
                          const TrainConfig& config);

// GloVeMat baseline: squared error of the raw dot against ln(rating + 1).
TrainResult train_glovemat(const SplitDataset& split, const TrainConfig& config);

// Fill every unobserved (user, item) cell of the given universes with
// predict_rating(model, ...); observed triples pass through bit-exact.
// Output is in user-major (user, item) order and has |users|*|items| triples.
InteractionDataset densify(const FactorModel& model, const InteractionDataset& base,
                           std::span<const UserId> user_ids, std::span<const ItemId> item_ids,
                           double eps = kDefaultClampEps);

// DotMat Hybrid: data-free DotMat over the split's universes, densify the
// train side, then classic MF on the densified set. Test triples are never
// touched. The returned trace is the MF stage's.
TrainResult train_dotmat_hybrid(const SplitDataset& split, const TrainConfig& config_dotmat,
                                const TrainConfig& config_mf);

// ---------------------------------------------------------------------------
// Floor/sanity baselines.
// ---------------------------------------------------------------------------

using PredictFn = std::function<double(UserId, ItemId)>;

// Uniform prediction in (0, r_max], a pure function of (seed, user, item).
PredictFn baseline_random(std::uint64_t seed, double r_max);

// Per-item train mean, global train mean for unseen items.
PredictFn baseline_mean(const SplitDataset& split);

// predict_rating closure over a trained model.
PredictFn model_predictor(const FactorModel& model, double r_max, double eps = kDefaultClampEps);

// GloVeMat's reconstruction: exp(u.v) - 1, clamped to [0, r_max].
PredictFn glovemat_predictor(const FactorModel& model, double r_max);

}  // namespace dotmat

#endif  // DOTMAT_TRAINERS_HPP
