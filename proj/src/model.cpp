#include "dotmat/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dotmat/errors.hpp"
#include "dotmat/rng.hpp"
#include "numeric_io.hpp"

namespace dotmat {

namespace {

template <typename Id>
std::vector<Id> sorted_unique_ids(std::vector<Id> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

}  // namespace

FactorModel::FactorModel(std::size_t dim, std::vector<UserId> user_ids,
                         std::vector<ItemId> item_ids)
    : dim_(dim),
      user_ids_(sorted_unique_ids(std::move(user_ids))),
      item_ids_(sorted_unique_ids(std::move(item_ids))) {
    if (dim_ < 1) throw ConfigError("latent dimension must be >= 1");
    if (user_ids_.empty() || item_ids_.empty())
        throw ConfigError("model needs at least one user and one item");
    user_index_.reserve(user_ids_.size());
    item_index_.reserve(item_ids_.size());
    for (std::size_t i = 0; i < user_ids_.size(); ++i) user_index_.emplace(user_ids_[i], i);
    for (std::size_t i = 0; i < item_ids_.size(); ++i) item_index_.emplace(item_ids_[i], i);
    user_data_.assign(user_ids_.size() * dim_, 0.0);
    item_data_.assign(item_ids_.size() * dim_, 0.0);
}

std::size_t FactorModel::user_index(UserId id) const {
    auto it = user_index_.find(id);
    if (it == user_index_.end())
        throw LookupError("unknown user id " + std::to_string(id));
    return it->second;
}

std::size_t FactorModel::item_index(ItemId id) const {
    auto it = item_index_.find(id);
    if (it == item_index_.end())
        throw LookupError("unknown item id " + std::to_string(id));
    return it->second;
}

double clamped_dot(std::span<const double> u, std::span<const double> v, double eps) {
    if (u.size() != v.size())
        throw DimensionError("factor vectors differ in length: " + std::to_string(u.size()) +
                             " vs " + std::to_string(v.size()));
    if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("clamp eps must lie in (0, 0.5)");
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
    return std::min(std::max(dot, eps), 1.0 - eps);
}

double predict_rating(const FactorModel& model, UserId user, ItemId item, double r_max,
                      double eps) {
    return r_max * clamped_dot(model.user_factors(user), model.item_factors(item), eps);
}

FactorModel init_model(std::span<const UserId> user_ids, std::span<const ItemId> item_ids,
                       std::size_t k, std::uint64_t seed) {
    if (k < 1) throw ConfigError("latent dimension k must be >= 1");
    if (user_ids.empty() || item_ids.empty())
        throw ConfigError("init_model needs non-empty user and item id sets");
    FactorModel model(k, std::vector<UserId>(user_ids.begin(), user_ids.end()),
                      std::vector<ItemId>(item_ids.begin(), item_ids.end()));
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    auto gen = rng::make_engine(seed);
    for (std::size_t i = 0; i < model.n_users(); ++i)
        for (double& x : model.user_row(i)) x = scale * rng::uniform_unit(gen);
    for (std::size_t i = 0; i < model.n_items(); ++i)
        for (double& x : model.item_row(i)) x = scale * rng::uniform_unit(gen);
    return model;
}

// --------------------------------------------------------------------------
// Persistence.
//   DOTMAT-MODEL 1 <k> <n_users> <n_items>
//   U <user_id> <v1> ... <vk>
//   V <item_id> <v1> ... <vk>
// --------------------------------------------------------------------------

void save_model(const FactorModel& model, std::ostream& out) {
    out << "DOTMAT-MODEL 1 " << model.dim() << ' ' << model.n_users() << ' ' << model.n_items()
        << '\n';
    for (std::size_t i = 0; i < model.n_users(); ++i) {
        out << "U " << model.user_ids()[i];
        for (double x : model.user_row(i)) out << ' ' << detail::format_double(x);
        out << '\n';
    }
    for (std::size_t i = 0; i < model.n_items(); ++i) {
        out << "V " << model.item_ids()[i];
        for (double x : model.item_row(i)) out << ' ' << detail::format_double(x);
        out << '\n';
    }
    if (!out) throw IoError("failed while writing model");
}

void save_model(const FactorModel& model, const std::filesystem::path& destination) {
    std::ofstream out(destination);
    if (!out) throw IoError("cannot open model file for writing: " + destination.string());
    save_model(model, out);
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

[[noreturn]] void model_parse_fail(std::size_t line_no, const std::string& what) {
    throw ParseError("model file line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

FactorModel load_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("model file is empty");
    auto header = split_ws(line);
    if (header.size() != 5 || header[0] != "DOTMAT-MODEL" || header[1] != "1")
        model_parse_fail(1, "expected header `DOTMAT-MODEL 1 <k> <n_users> <n_items>`");
    std::size_t k = 0, n_users = 0, n_items = 0;
    if (!detail::parse_size(header[2], k) || !detail::parse_size(header[3], n_users) ||
        !detail::parse_size(header[4], n_items))
        model_parse_fail(1, "non-numeric header field");
    if (k < 1) throw IntegrityError("model header declares k = 0");
    if (n_users < 1 || n_items < 1)
        throw IntegrityError("model header declares an empty user or item set");

    std::vector<UserId> user_ids;
    std::vector<ItemId> item_ids;
    std::vector<std::vector<double>> user_vecs;
    std::vector<std::vector<double>> item_vecs;
    user_ids.reserve(n_users);
    item_ids.reserve(n_items);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (fields[0] != "U" && fields[0] != "V")
            model_parse_fail(line_no, "unknown record tag `" + std::string(fields[0]) + "`");
        if (fields.size() < 2) model_parse_fail(line_no, "missing id");
        std::int64_t id = 0;
        if (!detail::parse_int64(fields[1], id)) model_parse_fail(line_no, "non-numeric id");
        if (fields.size() - 2 != k)
            throw IntegrityError("model file line " + std::to_string(line_no) + ": vector has " +
                                 std::to_string(fields.size() - 2) + " entries, header says k = " +
                                 std::to_string(k));
        std::vector<double> vec(k);
        for (std::size_t i = 0; i < k; ++i) {
            if (!detail::parse_double(fields[i + 2], vec[i]))
                model_parse_fail(line_no, "bad number `" + std::string(fields[i + 2]) + "`");
            if (!std::isfinite(vec[i])) model_parse_fail(line_no, "non-finite factor entry");
        }
        if (fields[0] == "U") {
            user_ids.push_back(id);
            user_vecs.push_back(std::move(vec));
        } else {
            item_ids.push_back(id);
            item_vecs.push_back(std::move(vec));
        }
    }
    if (user_ids.size() != n_users)
        throw IntegrityError("model file has " + std::to_string(user_ids.size()) +
                             " user records, header says " + std::to_string(n_users));
    if (item_ids.size() != n_items)
        throw IntegrityError("model file has " + std::to_string(item_ids.size()) +
                             " item records, header says " + std::to_string(n_items));

    FactorModel model(k, user_ids, item_ids);
    if (model.n_users() != n_users || model.n_items() != n_items)
        throw IntegrityError("model file contains duplicate ids");
    for (std::size_t r = 0; r < user_ids.size(); ++r) {
        auto row = model.user_factors(user_ids[r]);
        std::copy(user_vecs[r].begin(), user_vecs[r].end(), row.begin());
    }
    for (std::size_t r = 0; r < item_ids.size(); ++r) {
        auto row = model.item_factors(item_ids[r]);
        std::copy(item_vecs[r].begin(), item_vecs[r].end(), row.begin());
    }
    return model;
}

FactorModel load_model(const std::filesystem::path& source) {
    std::ifstream in(source);
    if (!in) throw IoError("cannot open model file: " + source.string());
    return load_model(in);
}

}  // namespace dotmat
