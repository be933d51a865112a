#include "dotmat/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace dotmat {

double mae(const PredictionSet& predictions) {
    if (predictions.empty()) throw ConfigError("MAE of an empty prediction set");
    double sum = 0.0;
    for (const auto& p : predictions) sum += std::fabs(p.predicted - p.actual);
    return sum / static_cast<double>(predictions.size());
}

ExcludePairs observed_pairs(const InteractionDataset& dataset) {
    ExcludePairs pairs;
    for (const auto& t : dataset.triples()) pairs[t.user_id].insert(t.item_id);
    return pairs;
}

TopKLists top_k(const ScoreFn& score, std::span<const UserId> users, std::span<const ItemId> items,
                std::size_t k, const ExcludePairs& exclude) {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (!score) throw ConfigError("top_k needs a score function");
    TopKLists lists;
    lists.reserve(users.size());
    std::vector<std::pair<double, ItemId>> scored;
    static const std::unordered_set<ItemId> kNone;
    for (const UserId user : users) {
        auto ex = exclude.find(user);
        const auto& hidden = ex == exclude.end() ? kNone : ex->second;
        scored.clear();
        for (const ItemId item : items) {
            if (hidden.count(item)) continue;
            scored.emplace_back(score(user, item), item);
        }
        const std::size_t take = std::min(k, scored.size());
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                          scored.end(), [](const auto& a, const auto& b) {
                              return a.first > b.first ||
                                     (a.first == b.first && a.second < b.second);
                          });
        std::vector<ItemId> top;
        top.reserve(take);
        for (std::size_t i = 0; i < take; ++i) top.push_back(scored[i].second);
        lists.emplace_back(user, std::move(top));
    }
    return lists;
}

TopKLists top_k(const FactorModel& model, double r_max, std::span<const UserId> users,
                std::span<const ItemId> items, std::size_t k, const ExcludePairs& exclude) {
    return top_k([&](UserId u, ItemId i) { return predict_rating(model, u, i, r_max); }, users,
                 items, k, exclude);
}

ExposureProfile exposure_profile(const TopKLists& lists, std::size_t k) {
    ExposureProfile profile;
    profile.k = k;
    profile.users_served = lists.size();
    for (const auto& [user, items] : lists)
        for (const ItemId item : items) ++profile.counts[item];
    return profile;
}

MatthewResult matthew_degree(std::span<const double> counts) {
    std::vector<double> nonzero;
    nonzero.reserve(counts.size());
    std::size_t zeros = 0;
    for (const double c : counts) {
        if (c < 0.0 || !std::isfinite(c)) throw BoundsError("exposure counts must be finite and >= 0");
        if (c > 0.0)
            nonzero.push_back(c);
        else
            ++zeros;
    }
    if (nonzero.size() < 2)
        throw DegenerateInputError("Matthew degree needs at least two nonzero exposure counts");
    std::sort(nonzero.begin(), nonzero.end(), std::greater<>());

    const std::size_t n = nonzero.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::log(static_cast<double>(i + 1));
        ys[i] = std::log(nonzero[i]);
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    MatthewResult result;
    result.degree = std::fabs(sxy / sxx);
    result.fitted = n;
    result.excluded_zero = zeros;
    return result;
}

MatthewResult matthew_degree(const ExposureProfile& exposure) {
    std::vector<double> counts;
    counts.reserve(exposure.counts.size());
    for (const auto& [item, count] : exposure.counts)
        counts.push_back(static_cast<double>(count));
    return matthew_degree(counts);
}

}  // namespace dotmat
