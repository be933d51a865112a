#ifndef DOTMAT_MODEL_HPP
#define DOTMAT_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "dotmat/types.hpp"

namespace dotmat {

inline constexpr double kDefaultClampEps = 1e-6;

// Latent factor model: one k-vector per user and per item, indexable by id.
// Mutable during training (single thread); share read-only afterwards.
class FactorModel {
public:
    FactorModel() = default;
    FactorModel(std::size_t dim, std::vector<UserId> user_ids, std::vector<ItemId> item_ids);

    std::size_t dim() const { return dim_; }
    std::size_t n_users() const { return user_ids_.size(); }
    std::size_t n_items() const { return item_ids_.size(); }
    const std::vector<UserId>& user_ids() const { return user_ids_; }  // sorted
    const std::vector<ItemId>& item_ids() const { return item_ids_; }  // sorted

    bool has_user(UserId id) const { return user_index_.count(id) != 0; }
    bool has_item(ItemId id) const { return item_index_.count(id) != 0; }
    std::size_t user_index(UserId id) const;  // LookupError if unknown
    std::size_t item_index(ItemId id) const;

    std::span<double> user_factors(UserId id) { return user_row(user_index(id)); }
    std::span<const double> user_factors(UserId id) const { return user_row(user_index(id)); }
    std::span<double> item_factors(ItemId id) { return item_row(item_index(id)); }
    std::span<const double> item_factors(ItemId id) const { return item_row(item_index(id)); }

    // Index-based access for hot loops.
    std::span<double> user_row(std::size_t idx) { return {user_data_.data() + idx * dim_, dim_}; }
    std::span<const double> user_row(std::size_t idx) const { return {user_data_.data() + idx * dim_, dim_}; }
    std::span<double> item_row(std::size_t idx) { return {item_data_.data() + idx * dim_, dim_}; }
    std::span<const double> item_row(std::size_t idx) const { return {item_data_.data() + idx * dim_, dim_}; }

    bool operator==(const FactorModel& other) const {
        return dim_ == other.dim_ && user_ids_ == other.user_ids_ && item_ids_ == other.item_ids_ &&
               user_data_ == other.user_data_ && item_data_ == other.item_data_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<UserId> user_ids_;
    std::vector<ItemId> item_ids_;
    std::unordered_map<UserId, std::size_t> user_index_;
    std::unordered_map<ItemId, std::size_t> item_index_;
    std::vector<double> user_data_;  // row-major n_users x dim
    std::vector<double> item_data_;  // row-major n_items x dim
};

// Dot product projected into [eps, 1-eps]. The dot stands for a Zipf
// probability, so it has to stay strictly inside (0, 1) for the x^x and
// log x terms used in training.
double clamped_dot(std::span<const double> u, std::span<const double> v, double eps);

// R_hat = r_max * clamped_dot(U_i, V_j).
double predict_rating(const FactorModel& model, UserId user, ItemId item, double r_max,
                      double eps = kDefaultClampEps);

// Entries iid uniform on (0, 1/sqrt(k)); expected dot is 1/4, comfortably
// inside the clamp interval. Bit-deterministic given the seed: users are
// filled in sorted-id order, then items.
FactorModel init_model(std::span<const UserId> user_ids, std::span<const ItemId> item_ids,
                       std::size_t k, std::uint64_t seed);

// Text persistence. Numbers use shortest round-trip decimals so
// load(save(m)) == m bitwise.
void save_model(const FactorModel& model, std::ostream& out);
void save_model(const FactorModel& model, const std::filesystem::path& destination);
FactorModel load_model(std::istream& in);
FactorModel load_model(const std::filesystem::path& source);

}  // namespace dotmat

#endif  // DOTMAT_MODEL_HPP
