#include "dotmat/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "dotmat/rng.hpp"
#include "numeric_io.hpp"

namespace dotmat {

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

// Accumulates triples with the last-occurrence-wins duplicate rule.
class TripleAccumulator {
public:
    void add(RatingTriple t) {
        auto [it, inserted] = index_.try_emplace(PairKey{t.user_id, t.item_id}, triples_.size());
        if (inserted) {
            triples_.push_back(t);
        } else {
            triples_[it->second] = t;
            ++duplicates_;
        }
    }
    std::vector<RatingTriple> take() { return std::move(triples_); }
    std::size_t duplicates() const { return duplicates_; }

private:
    std::unordered_map<PairKey, std::size_t, PairKeyHash> index_;
    std::vector<RatingTriple> triples_;
    std::size_t duplicates_ = 0;
};

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

// --------------------------------------------------------------------------
// MovieLens `UserID::MovieID::Rating::Timestamp`
// --------------------------------------------------------------------------

InteractionDataset parse_movielens(std::istream& in, ParseStats* stats,
                                   std::optional<double> r_max_override) {
    TripleAccumulator acc;
    std::string line;
    std::size_t line_no = 0;
    std::size_t data_lines = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        std::string_view sv = line;
        std::string_view fields[4];
        std::size_t n_fields = 0;
        std::size_t pos = 0;
        while (true) {
            std::size_t sep = sv.find("::", pos);
            std::string_view field =
                sep == std::string_view::npos ? sv.substr(pos) : sv.substr(pos, sep - pos);
            if (n_fields == 4) fail_line(line_no, "expected 4 `::`-separated fields");
            fields[n_fields++] = field;
            if (sep == std::string_view::npos) break;
            pos = sep + 2;
        }
        if (n_fields != 4) fail_line(line_no, "expected 4 `::`-separated fields, got " +
                                                  std::to_string(n_fields));
        RatingTriple t;
        std::int64_t ts = 0;
        if (!detail::parse_int64(fields[0], t.user_id)) fail_line(line_no, "bad user id");
        if (!detail::parse_int64(fields[1], t.item_id)) fail_line(line_no, "bad item id");
        if (!detail::parse_double(fields[2], t.rating)) fail_line(line_no, "bad rating");
        if (!detail::parse_int64(fields[3], ts)) fail_line(line_no, "bad timestamp");
        if (!(t.rating > 0.0)) fail_line(line_no, "nonpositive rating");
        t.timestamp = ts;
        acc.add(t);
        ++data_lines;
    }
    if (stats) *stats = ParseStats{data_lines, acc.duplicates()};
    return InteractionDataset::from_triples(acc.take(), r_max_override);
}

InteractionDataset parse_movielens_file(const std::filesystem::path& source, ParseStats* stats,
                                        std::optional<double> r_max_override) {
    std::ifstream in(source);
    if (!in) throw IoError("cannot open ratings file: " + source.string());
    return parse_movielens(in, stats, r_max_override);
}

// --------------------------------------------------------------------------
// Generic CSV (RFC-4180-style: quoted fields, doubled quotes, embedded
// commas and newlines).
// --------------------------------------------------------------------------

namespace {

// Reads one logical CSV record; returns false on clean EOF.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;
    ++line_no;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    while (true) {
        if (c == EOF) {
            fields.push_back(std::move(field));
            return true;
        }
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line_no;
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty() && !any) {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
            any = false;
            c = in.get();
            continue;
        } else if (ch == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
            any = true;
        }
        c = in.get();
    }
}

}  // namespace

InteractionDataset parse_csv(std::istream& in, const CsvColumns& columns, ParseStats* stats,
                             std::optional<double> r_max_override) {
    std::vector<std::string> fields;
    std::size_t line_no = 0;
    if (!read_csv_record(in, fields, line_no)) {
        if (stats) *stats = ParseStats{};
        return InteractionDataset::from_triples({}, r_max_override);
    }
    auto column_of = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (fields[i] == name) return i;
        throw SchemaError("column `" + name + "` not found in CSV header");
    };
    const std::size_t user_col = column_of(columns.user);
    const std::size_t item_col = column_of(columns.item);
    const std::size_t rating_col = column_of(columns.rating);
    const std::size_t min_cols = std::max({user_col, item_col, rating_col}) + 1;

    TripleAccumulator acc;
    std::size_t row = 0;
    std::size_t data_rows = 0;
    while (read_csv_record(in, fields, line_no)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        auto fail_row = [&](const std::string& what) -> void {
            throw ParseError("row " + std::to_string(row) + ": " + what);
        };
        if (fields.size() < min_cols)
            fail_row("expected at least " + std::to_string(min_cols) + " columns, got " +
                     std::to_string(fields.size()));
        RatingTriple t;
        if (!detail::parse_int64(fields[user_col], t.user_id))
            fail_row("bad user id `" + fields[user_col] + "`");
        if (!detail::parse_int64(fields[item_col], t.item_id))
            fail_row("bad item id `" + fields[item_col] + "`");
        if (!detail::parse_double(fields[rating_col], t.rating))
            fail_row("bad rating `" + fields[rating_col] + "`");
        if (!(t.rating > 0.0)) fail_row("nonpositive rating");
        acc.add(t);
        ++data_rows;
    }
    if (stats) *stats = ParseStats{data_rows, acc.duplicates()};
    return InteractionDataset::from_triples(acc.take(), r_max_override);
}

InteractionDataset parse_csv_file(const std::filesystem::path& source, const CsvColumns& columns,
                                  ParseStats* stats, std::optional<double> r_max_override) {
    std::ifstream in(source);
    if (!in) throw IoError("cannot open CSV file: " + source.string());
    return parse_csv(in, columns, stats, r_max_override);
}

// --------------------------------------------------------------------------
// Sampling, splitting, ranking.
// --------------------------------------------------------------------------

InteractionDataset sample_users(const InteractionDataset& dataset, std::size_t n,
                                std::uint64_t seed) {
    const std::size_t total = dataset.n_users();
    if (n < 1 || n > total)
        throw BoundsError("sample size " + std::to_string(n) + " outside [1, " +
                          std::to_string(total) + "]");
    std::vector<UserId> pool = dataset.users();
    auto gen = rng::make_engine(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + rng::uniform_below(gen, total - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    std::sort(pool.begin(), pool.end());

    std::unordered_set<UserId> selected(pool.begin(), pool.end());
    std::vector<RatingTriple> kept;
    std::vector<ItemId> touched;
    for (const auto& t : dataset.triples()) {
        if (selected.count(t.user_id)) {
            kept.push_back(t);
            touched.push_back(t.item_id);
        }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    return InteractionDataset::with_universe(std::move(pool), std::move(touched), std::move(kept),
                                             dataset.r_max());
}

SplitDataset split_train_test(const InteractionDataset& dataset, double test_fraction,
                              std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie in (0, 1)");

    std::unordered_map<UserId, std::vector<std::size_t>> per_user;
    const auto& triples = dataset.triples();
    for (std::size_t i = 0; i < triples.size(); ++i)
        per_user[triples[i].user_id].push_back(i);

    std::vector<bool> to_test(triples.size(), false);
    auto gen = rng::make_engine(seed);
    for (UserId u : dataset.users()) {  // sorted order keeps the draw stream stable
        auto it = per_user.find(u);
        if (it == per_user.end()) continue;
        auto& idx = it->second;
        const std::size_t c = idx.size();
        if (c < 2) continue;  // single-triple users stay in train
        const auto t = static_cast<std::size_t>(
            std::ceil(test_fraction * static_cast<double>(c) - 1e-12));
        rng::shuffle(idx, gen);
        for (std::size_t i = 0; i < t && i < c; ++i) to_test[idx[i]] = true;
    }

    std::vector<RatingTriple> train, test;
    for (std::size_t i = 0; i < triples.size(); ++i)
        (to_test[i] ? test : train).push_back(triples[i]);
    SplitDataset split;
    split.train = InteractionDataset::with_universe(dataset.users(), dataset.items(),
                                                    std::move(train), dataset.r_max());
    split.test = InteractionDataset::with_universe(dataset.users(), dataset.items(),
                                                   std::move(test), dataset.r_max());
    return split;
}

namespace {

template <typename Id>
std::unordered_map<Id, std::size_t> rank_by_count(const std::vector<Id>& universe,
                                                  const std::unordered_map<Id, std::size_t>& counts) {
    std::vector<Id> order = universe;  // already sorted ascending: the tie-break
    std::stable_sort(order.begin(), order.end(), [&](Id a, Id b) {
        const std::size_t ca = counts.count(a) ? counts.at(a) : 0;
        const std::size_t cb = counts.count(b) ? counts.at(b) : 0;
        return ca > cb;
    });
    std::unordered_map<Id, std::size_t> ranks;
    ranks.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) ranks.emplace(order[i], i + 1);
    return ranks;
}

}  // namespace

PopularityRanks popularity_ranks(const InteractionDataset& dataset) {
    if (dataset.n_users() == 0 || dataset.n_items() == 0)
        throw ConfigError("popularity_ranks needs a non-empty dataset");
    std::unordered_map<UserId, std::size_t> user_counts;
    std::unordered_map<ItemId, std::size_t> item_counts;
    for (const auto& t : dataset.triples()) {
        ++user_counts[t.user_id];
        ++item_counts[t.item_id];
    }
    PopularityRanks ranks;
    ranks.user_rank = rank_by_count(dataset.users(), user_counts);
    ranks.item_rank = rank_by_count(dataset.items(), item_counts);
    return ranks;
}

// --------------------------------------------------------------------------
// Dataset cache.
// --------------------------------------------------------------------------

void save_dataset(const InteractionDataset& dataset, std::ostream& out) {
    out << "DOTMAT-DATASET 1 " << dataset.n_users() << ' ' << dataset.n_items() << ' '
        << dataset.n_triples() << ' ' << detail::format_double(dataset.r_max()) << '\n';
    std::unordered_set<UserId> seen_users;
    std::unordered_set<ItemId> seen_items;
    for (const auto& t : dataset.triples()) {
        out << t.user_id << ' ' << t.item_id << ' ' << detail::format_double(t.rating) << ' ';
        if (t.timestamp)
            out << *t.timestamp;
        else
            out << '-';
        out << '\n';
        seen_users.insert(t.user_id);
        seen_items.insert(t.item_id);
    }
    for (UserId u : dataset.users())
        if (!seen_users.count(u)) out << "u " << u << '\n';
    for (ItemId i : dataset.items())
        if (!seen_items.count(i)) out << "i " << i << '\n';
    if (!out) throw IoError("failed while writing dataset");
}

void save_dataset(const InteractionDataset& dataset, const std::filesystem::path& destination) {
    std::ofstream out(destination);
    if (!out) throw IoError("cannot open dataset file for writing: " + destination.string());
    save_dataset(dataset, out);
}

InteractionDataset load_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("dataset file is empty");
    strip_cr(line);
    std::vector<std::string> header;
    {
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t sep = line.find(' ', pos);
            if (sep == std::string::npos) {
                header.push_back(line.substr(pos));
                break;
            }
            header.push_back(line.substr(pos, sep - pos));
            pos = sep + 1;
        }
    }
    if (header.size() != 6 || header[0] != "DOTMAT-DATASET" || header[1] != "1")
        throw ParseError("line 1: expected header `DOTMAT-DATASET 1 <n_users> <n_items> "
                         "<n_triples> <r_max>`");
    std::size_t n_users = 0, n_items = 0, n_triples = 0;
    double r_max = 0.0;
    if (!detail::parse_size(header[2], n_users) || !detail::parse_size(header[3], n_items) ||
        !detail::parse_size(header[4], n_triples) || !detail::parse_double(header[5], r_max))
        throw ParseError("line 1: non-numeric header field");

    std::vector<RatingTriple> triples;
    triples.reserve(n_triples);
    std::vector<UserId> extra_users;
    std::vector<ItemId> extra_items;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        if (line[0] == 'u' || line[0] == 'i') {
            std::int64_t id = 0;
            if (line.size() < 3 || line[1] != ' ' || !detail::parse_int64(line.substr(2), id))
                fail_line(line_no, "bad universe record");
            if (line[0] == 'u')
                extra_users.push_back(id);
            else
                extra_items.push_back(id);
            continue;
        }
        std::string_view sv = line;
        std::string_view f[4];
        std::size_t n = 0;
        std::size_t pos = 0;
        while (n < 4 && pos <= sv.size()) {
            std::size_t sep = sv.find(' ', pos);
            if (sep == std::string_view::npos) {
                f[n++] = sv.substr(pos);
                pos = sv.size() + 1;
            } else {
                f[n++] = sv.substr(pos, sep - pos);
                pos = sep + 1;
            }
        }
        if (n != 4 || pos <= sv.size()) fail_line(line_no, "expected 4 space-separated fields");
        RatingTriple t;
        if (!detail::parse_int64(f[0], t.user_id)) fail_line(line_no, "bad user id");
        if (!detail::parse_int64(f[1], t.item_id)) fail_line(line_no, "bad item id");
        if (!detail::parse_double(f[2], t.rating)) fail_line(line_no, "bad rating");
        if (f[3] != "-") {
            std::int64_t ts = 0;
            if (!detail::parse_int64(f[3], ts)) fail_line(line_no, "bad timestamp");
            t.timestamp = ts;
        }
        triples.push_back(t);
    }
    if (triples.size() != n_triples)
        throw IntegrityError("dataset file has " + std::to_string(triples.size()) +
                             " triples, header says " + std::to_string(n_triples));

    std::vector<UserId> users = extra_users;
    std::vector<ItemId> items = extra_items;
    for (const auto& t : triples) {
        users.push_back(t.user_id);
        items.push_back(t.item_id);
    }
    auto ds = InteractionDataset::with_universe(std::move(users), std::move(items),
                                                std::move(triples), r_max);
    if (ds.n_users() != n_users || ds.n_items() != n_items)
        throw IntegrityError("dataset universe sizes disagree with the header");
    return ds;
}

InteractionDataset load_dataset(const std::filesystem::path& source) {
    std::ifstream in(source);
    if (!in) throw IoError("cannot open dataset file: " + source.string());
    return load_dataset(in);
}

}  // namespace dotmat
