// Ship gate: one [PASS]/[FAIL] line per criterion, exit code = number of
// failures. Numeric tolerances and runtime budgets are pinned here on
// purpose; loosening them is a release decision, not a refactor.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <span>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dotmat/data.hpp"
#include "dotmat/harness.hpp"
#include "dotmat/metrics.hpp"
#include "dotmat/model.hpp"
#include "dotmat/rng.hpp"
#include "dotmat/trainers.hpp"
#include "ml1m_synth.hpp"

namespace fs = std::filesystem;
using namespace dotmat;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

double relative_gap(double a, double b) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-12});
}

// ---------------------------------------------------------------------------
// 1. Analytic gradients vs central finite differences, h = 1e-6, 100 seeded
//    points per loss family, points kept away from kinks and from the zero
//    set of each gradient (where a relative comparison is meaningless).
// ---------------------------------------------------------------------------
Outcome check_gradients() {
    constexpr double kH = 1e-6;
    constexpr double kRelTol = 1e-5;
    auto gen = rng::make_engine(1001);
    double worst = 0.0;
    std::size_t checks = 0;

    auto draw = [&](std::vector<double>& v) {
        for (auto& x : v) x = 0.12 + 0.33 * rng::uniform_unit(gen);
    };
    auto probe = [&](const std::function<double(std::span<const double>, std::span<const double>)>& loss,
                     const std::function<double(std::span<const double>, std::span<const double>)>& scalar,
                     std::vector<double> u, std::vector<double> v) {
        const double s = scalar(u, v);
        for (std::size_t j = 0; j < u.size(); ++j) {
            auto up = u, um = u;
            up[j] += kH;
            um[j] -= kH;
            worst = std::max(worst, relative_gap((loss(up, v) - loss(um, v)) / (2 * kH), s * v[j]));
            auto vp = v, vm = v;
            vp[j] += kH;
            vm[j] -= kH;
            worst = std::max(worst, relative_gap((loss(u, vp) - loss(u, vm)) / (2 * kH), s * u[j]));
            checks += 2;
        }
    };

    for (int n = 0; n < 100; ++n) {
        std::vector<double> u(3), v(3);
        double t, dot;
        do {
            draw(u);
            draw(v);
            dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            t = 0.05 + 0.9 * rng::uniform_unit(gen);
            // stay away from the |.| kink and from the gradient's smooth zero
        } while (std::fabs(std::pow(dot, dot) - t) < 1e-3 || std::fabs(1.0 + std::log(dot)) < 0.05);
        probe([t](auto a, auto b) { return dotmat_pair_loss(a, b, t); },
              [t](auto a, auto b) { return dotmat_pair_grad_scalar(a, b, t); }, u, v);
    }
    for (int n = 0; n < 100; ++n) {
        std::vector<double> u(3), v(3);
        double a, t, dot;
        do {
            draw(u);
            draw(v);
            dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            a = 0.05 + 0.85 * rng::uniform_unit(gen);
            t = 0.05 + 0.9 * rng::uniform_unit(gen);
        } while (std::fabs(std::pow(a, dot) - t) < 0.02);  // zero-residual => zero gradient
        probe([a, t](auto x, auto y) { return rankmat_pair_loss(x, y, a, t); },
              [a, t](auto x, auto y) { return rankmat_pair_grad_scalar(x, y, a, t); }, u, v);
    }
    for (int n = 0; n < 100; ++n) {
        std::vector<double> u(3), v(3);
        double r, dot;
        do {
            draw(u);
            draw(v);
            dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            r = 0.5 + 4.0 * rng::uniform_unit(gen);
        } while (std::fabs(dot - std::log1p(r)) < 0.02);
        probe([r](auto a, auto b) { return glovemat_pair_loss(a, b, r); },
              [r](auto a, auto b) { return glovemat_pair_grad_scalar(a, b, r); }, u, v);
    }

    return {worst <= kRelTol,
            fmt("%zu derivative checks across 300 points, worst relative gap %.3g (tol %g)",
                checks, worst, kRelTol)};
}

// ---------------------------------------------------------------------------
// 2. x^x > x on a 1000-point grid of [1e-6, 1-1e-6], and the data-free sign
//    factor is +1 at every sampled step of a 10-epoch run.
// ---------------------------------------------------------------------------
Outcome check_power_dominance() {
    for (int i = 0; i < 1000; ++i) {
        const double x = 1e-6 + static_cast<double>(i) * (1.0 - 2e-6) / 999.0;
        if (!(std::pow(x, x) > x)) return {false, fmt("x^x <= x at grid x = %.17g", x)};
    }
    std::vector<UserId> users;
    std::vector<ItemId> items;
    for (int i = 1; i <= 10; ++i) {
        users.push_back(i);
        items.push_back(100 + i);
    }
    TrainConfig config;
    config.dim = 8;
    config.epochs = 10;
    config.learning_rate = 0.02;
    config.pairs_per_user = 20;
    config.seed = 42;
    std::size_t steps = 0;
    bool sign_ok = true;
    double bad_x = 0.0;
    (void)train_dotmat(users, items, config,
                       [&](std::size_t, std::size_t, std::size_t, double x) {
                           ++steps;
                           if (!(std::pow(x, x) - x > 0.0) && sign_ok) {
                               sign_ok = false;
                               bad_x = x;
                           }
                       });
    if (!sign_ok) return {false, fmt("sign factor not +1 at sampled x = %.17g", bad_x)};
    return {true, fmt("1000 grid points dominated; sign +1 at all %zu sampled steps", steps)};
}

// ---------------------------------------------------------------------------
// 3. Repeated data-free steps on one pair, k = 4, gamma = 0.01, reach
//    1/e within 1e-3 in <= 10,000 steps, tracking a scalar-recurrence
//    oracle: with c = x^x (1 + ln x),
//      x'  = x - g c (nU + nV) + g^2 c^2 x
//      nU' = nU - 2 g c x + g^2 c^2 nV   (and symmetrically for nV),
//    valid while the nonnegativity floor never clips (checked).
// ---------------------------------------------------------------------------
Outcome check_fixed_point() {
    constexpr double kGamma = 0.01;
    constexpr double kTargetTol = 1e-3;
    constexpr double kOracleTol = 1e-9;
    const double kFixedPoint = 1.0 / std::exp(1.0);

    const std::vector<UserId> users{1};
    const std::vector<ItemId> items{2};
    FactorModel m = init_model(users, items, 4, 7);
    auto u = m.user_factors(1);
    auto v = m.item_factors(2);

    double ox = clamped_dot(u, v, kDefaultClampEps);
    double onU = 0.0, onV = 0.0;
    for (int j = 0; j < 4; ++j) {
        onU += u[j] * u[j];
        onV += v[j] * v[j];
    }

    double drift = 0.0;
    for (int step = 1; step <= 10000; ++step) {
        const double c = std::pow(ox, ox) * (1.0 + std::log(ox));
        const double gc = kGamma * c;
        const double nx = ox - gc * (onU + onV) + gc * gc * ox;
        const double nU = onU - 2.0 * gc * ox + gc * gc * onV;
        const double nV = onV - 2.0 * gc * ox + gc * gc * onU;
        ox = nx;
        onU = nU;
        onV = nV;

        dotmat_step_datafree(m, 1, 2, kGamma);
        for (int j = 0; j < 4; ++j)
            if (!(u[j] > 0.0) || !(v[j] > 0.0))
                return {false, fmt("floor clipped at step %d; oracle assumptions broken", step)};
        const double mx = clamped_dot(u, v, kDefaultClampEps);
        drift = std::max(drift, std::fabs(mx - ox));
        if (drift > kOracleTol)
            return {false, fmt("model diverged from recurrence oracle by %.3g at step %d", drift, step)};
        if (std::fabs(mx - kFixedPoint) <= kTargetTol && std::fabs(ox - kFixedPoint) <= kTargetTol)
            return {true, fmt("reached 1/e +- 1e-3 at step %d; max oracle drift %.3g", step, drift)};
    }
    return {false, "did not reach 1/e +- 1e-3 within 10,000 steps"};
}

// ---------------------------------------------------------------------------
// 4. Two datasets over identical universes with every rating changed train
//    to bit-identical models under the same seed.
// ---------------------------------------------------------------------------
Outcome check_rating_blindness() {
    auto gen = rng::make_engine(77);
    std::vector<RatingTriple> t1, t2;
    std::vector<UserId> users;
    std::vector<ItemId> items;
    for (int u = 1; u <= 50; ++u) users.push_back(u);
    for (int i = 1; i <= 40; ++i) items.push_back(i);
    for (const UserId u : users)
        for (const ItemId i : items) {
            const double r = 1.0 + static_cast<double>(rng::uniform_below(gen, 5));
            const double changed = 1.0 + std::fmod(r, 5.0);  // cyclic shift: never equal
            t1.push_back({u, i, r, std::nullopt});
            t2.push_back({u, i, changed, std::nullopt});
        }
    for (std::size_t i = 0; i < t1.size(); ++i)
        if (t1[i].rating == t2[i].rating) return {false, "rating perturbation left a value unchanged"};

    const auto ds1 = InteractionDataset::with_universe(users, items, std::move(t1), 5.0);
    const auto ds2 = InteractionDataset::with_universe(users, items, std::move(t2), 5.0);
    TrainConfig config;
    config.dim = 16;
    config.epochs = 10;
    config.learning_rate = 0.01;
    config.pairs_per_user = 50;
    config.seed = 42;
    const auto m1 = train_dotmat(ds1, config);
    const auto m2 = train_dotmat(ds2, config);
    if (!(m1.model == m2.model)) return {false, "models differ despite identical universes"};
    return {true, fmt("2000/2000 ratings changed; %zux%zu models bit-identical", users.size(), items.size())};
}

// ---------------------------------------------------------------------------
// 5. mae matches brute force to 1e-12; matthew_degree recovers s exactly for
//    Zipf-s exposures, s in {0.5, 1, 2}, within 1e-9.
// ---------------------------------------------------------------------------
Outcome check_metric_oracles() {
    auto gen = rng::make_engine(55);
    PredictionSet predictions;
    double sum = 0.0;
    for (int i = 0; i < 1000; ++i) {
        PredictionRecord p;
        p.user_id = static_cast<UserId>(1 + rng::uniform_below(gen, 500));
        p.item_id = static_cast<ItemId>(1 + rng::uniform_below(gen, 500));
        p.predicted = 5.0 * rng::uniform_unit(gen);
        p.actual = 5.0 * rng::uniform_unit(gen);
        sum += std::fabs(p.predicted - p.actual);
        predictions.push_back(p);
    }
    const double gap = std::fabs(mae(predictions) - sum / 1000.0);
    if (gap > 1e-12) return {false, fmt("mae off brute force by %.3g", gap)};

    double worst = 0.0;
    for (const double s : {0.5, 1.0, 2.0}) {
        std::vector<double> counts;
        for (int r = 1; r <= 500; ++r) counts.push_back(12345.0 / std::pow(r, s));
        worst = std::max(worst, std::fabs(matthew_degree(counts).degree - s));
    }
    if (worst > 1e-9) return {false, fmt("matthew degree off by %.3g on exact Zipf", worst)};
    return {true, fmt("mae gap %.2g (tol 1e-12); worst Zipf-s degree error %.2g (tol 1e-9)", gap, worst)};
}

// ---------------------------------------------------------------------------
// 6. Full corpus parse: 6040 users, 3706 movies, 1,000,209 triples, with the
//    file's own line count as the oracle.
// ---------------------------------------------------------------------------
Outcome check_parse(const fs::path& ratings) {
    std::ifstream in(ratings, std::ios::binary);
    if (!in) return {false, "ratings file unreadable: " + ratings.string()};
    std::size_t lines = 0;
    std::vector<char> buf(1 << 20);
    bool ends_with_newline = true;
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const std::streamsize got = in.gcount();
        if (got <= 0) break;
        lines += static_cast<std::size_t>(std::count(buf.data(), buf.data() + got, '\n'));
        ends_with_newline = buf[static_cast<std::size_t>(got) - 1] == '\n';
    }
    if (!ends_with_newline) ++lines;

    ParseStats stats;
    const auto ds = parse_movielens_file(ratings, &stats);
    const bool ok = ds.n_users() == 6040 && ds.n_items() == 3706 &&
                    ds.n_triples() == 1000209 && ds.n_triples() + stats.duplicates_replaced == lines;
    return {ok, fmt("%zu users, %zu movies, %zu triples; %zu source lines",
                    ds.n_users(), ds.n_items(), ds.n_triples(), lines)};
}

const ReportRow* find_row(const ExperimentReport& report, const std::string& algo, double lr) {
    for (const auto& row : report.rows)
        if (row.algorithm == algo && row.learning_rate == lr) return &row;
    return nullptr;
}

GridSpec corpus_spec() {
    GridSpec spec;  // default rates {1e-4 .. 5e-2}, dim 16, epochs 20, top-10
    spec.fixed_timing = true;
    return spec;
}

// ---------------------------------------------------------------------------
// 7. At the smallest grid rate on a 100-user sample, data-free training is
//    comparable to classic MF: MAE(dotmat) <= 1.25 x MAE(mf).
// ---------------------------------------------------------------------------
Outcome check_small_rate_parity(const InteractionDataset& corpus) {
    GridSpec spec = corpus_spec();
    spec.algorithms = {Algorithm::DotMat, Algorithm::MfClassic};
    spec.sample_sizes = {100};
    const auto report = run_grid(corpus, spec);
    const double lr = *std::min_element(spec.learning_rates.begin(), spec.learning_rates.end());
    const ReportRow* dm = find_row(report, "dotmat", lr);
    const ReportRow* mf = find_row(report, "mf", lr);
    if (!dm || !mf) return {false, "grid rows missing"};
    return {dm->mae <= 1.25 * mf->mae,
            fmt("rate %g: MAE dotmat %.4f vs mf %.4f (ratio %.3f, limit 1.25)", lr, dm->mae,
                mf->mae, dm->mae / mf->mae)};
}

// ---------------------------------------------------------------------------
// 8. Densify-then-MF beats (or matches within 0.02) plain MF at their
//    respective best grid rates on a 1000-user sample.
// ---------------------------------------------------------------------------
Outcome check_hybrid_best(const InteractionDataset& corpus) {
    GridSpec spec = corpus_spec();
    spec.algorithms = {Algorithm::DotMatHybrid, Algorithm::MfClassic};
    spec.sample_sizes = {1000};
    const auto report = run_grid(corpus, spec);
    double best_hybrid = 1e300, best_mf = 1e300;
    for (const auto& row : report.rows) {
        if (row.algorithm == "dotmat-hybrid") best_hybrid = std::min(best_hybrid, row.mae);
        if (row.algorithm == "mf") best_mf = std::min(best_mf, row.mae);
    }
    return {best_hybrid <= best_mf + 0.02,
            fmt("best MAE: hybrid %.4f vs mf %.4f (margin %+.4f, limit +0.02)", best_hybrid,
                best_mf, best_hybrid - best_mf)};
}

// ---------------------------------------------------------------------------
// 9. Data-free training beats the uniform-random baseline by >= 20% relative
//    at every grid rate on the 100-user sample.
// ---------------------------------------------------------------------------
Outcome check_beats_random(const InteractionDataset& corpus) {
    GridSpec spec = corpus_spec();
    spec.algorithms = {Algorithm::DotMat, Algorithm::RandomBaseline};
    spec.sample_sizes = {100};
    const auto report = run_grid(corpus, spec);
    double worst_improvement = 1.0;
    double worst_rate = 0.0;
    for (const double lr : spec.learning_rates) {
        const ReportRow* dm = find_row(report, "dotmat", lr);
        const ReportRow* rnd = find_row(report, "random", lr);
        if (!dm || !rnd) return {false, "grid rows missing"};
        const double improvement = (rnd->mae - dm->mae) / rnd->mae;
        if (improvement < worst_improvement) {
            worst_improvement = improvement;
            worst_rate = lr;
        }
    }
    return {worst_improvement >= 0.20,
            fmt("worst relative improvement %.1f%% at rate %g (needs >= 20%%)",
                100.0 * worst_improvement, worst_rate)};
}

// ---------------------------------------------------------------------------
// 10. Two `grid` CLI invocations with identical flags produce byte-identical
//     CSV files.
// ---------------------------------------------------------------------------
std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

Outcome check_cli_determinism(const fs::path& ratings, const fs::path& work_dir) {
    const std::string cli = DOTMAT_CLI_PATH;
    const fs::path cache = work_dir / "c10.cache";
    const fs::path csv_a = work_dir / "c10_a.csv";
    const fs::path csv_b = work_dir / "c10_b.csv";

    const std::string ingest = "\"" + cli + "\" ingest --format movielens --input \"" +
                               ratings.string() + "\" --output \"" + cache.string() +
                               "\" > /dev/null";
    if (std::system(ingest.c_str()) != 0) return {false, "ingest invocation failed"};

    const std::string flags = " --algos dotmat,mf --samples 100 --fixed-timing --input \"" +
                              cache.string() + "\" --out-csv \"";
    const std::string run_a = "\"" + cli + "\" grid" + flags + csv_a.string() + "\" > /dev/null";
    const std::string run_b = "\"" + cli + "\" grid" + flags + csv_b.string() + "\" > /dev/null";
    if (std::system(run_a.c_str()) != 0) return {false, "first grid invocation failed"};
    if (std::system(run_b.c_str()) != 0) return {false, "second grid invocation failed"};

    const std::string a = read_bytes(csv_a);
    const std::string b = read_bytes(csv_b);
    if (a.empty()) return {false, "grid produced an empty CSV"};
    if (a != b) return {false, "CSV outputs differ between identical invocations"};
    return {true, fmt("identical %zu-byte CSVs from repeated runs", a.size())};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) {
        const int id = std::atoi(argv[i]);
        if (id < 1 || id > 10) {
            std::fprintf(stderr, "usage: %s [criterion numbers 1..10]\n", argv[0]);
            return 64;
        }
        wanted.insert(id);
    }
    auto runs = [&](int id) { return wanted.empty() || wanted.count(id) != 0; };

    const fs::path data_dir = DOTMAT_DATA_DIR;
    fs::create_directories(data_dir);

    fs::path ratings;
    const bool needs_corpus = runs(6) || runs(7) || runs(8) || runs(9) || runs(10);
    if (needs_corpus) {
        if (const char* env = std::getenv("DOTMAT_ML1M")) {
            ratings = env;
            std::printf("corpus: using ratings file from DOTMAT_ML1M: %s\n", ratings.string().c_str());
        } else {
            ratings = data_dir / "ml1m_ratings.dat";
            if (!fs::exists(ratings) || fs::file_size(ratings) == 0) {
                std::printf("corpus: generating a MovieLens-1M-shaped ratings file (one-time)...\n");
                std::fflush(stdout);
                ml1m_synth::write_ratings_file(ratings, 1);
            }
        }
    }

    InteractionDataset corpus;
    if (runs(7) || runs(8) || runs(9)) {
        const auto t0 = std::chrono::steady_clock::now();
        corpus = parse_movielens_file(ratings);
        std::printf("corpus: %zu triples parsed in %.1f s (shared by the sampled-grid criteria)\n",
                    corpus.n_triples(), seconds_since(t0));
        std::fflush(stdout);
    }

    struct Criterion {
        int id;
        const char* label;
        double budget_s;
        std::function<Outcome()> run;
    };
    const double budget_7 = 120.0;
    const std::vector<Criterion> criteria = {
        {1, "analytic-vs-fd-gradients", 5.0, check_gradients},
        {2, "power-dominance-sign", 1.0, check_power_dominance},
        {3, "fixed-point-1-over-e", 1.0, check_fixed_point},
        {4, "rating-blind-training", 5.0, check_rating_blindness},
        {5, "mae-matthew-oracles", 1.0, check_metric_oracles},
        {6, "movielens-1m-parse", 30.0, [&] { return check_parse(ratings); }},
        {7, "small-rate-parity", budget_7, [&] { return check_small_rate_parity(corpus); }},
        {8, "hybrid-best-mae", 900.0, [&] { return check_hybrid_best(corpus); }},
        {9, "beats-random-20pct", budget_7, [&] { return check_beats_random(corpus); }},
        {10, "grid-byte-determinism", 2 * budget_7,
         [&] { return check_cli_determinism(ratings, data_dir); }},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (!runs(criterion.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = seconds_since(t0);
        const bool in_budget = elapsed < criterion.budget_s;
        const bool pass = outcome.pass && in_budget;
        std::printf("[%s] %2d %-24s (%6.2f s / %4.0f s) %s%s\n", pass ? "PASS" : "FAIL",
                    criterion.id, criterion.label, elapsed, criterion.budget_s,
                    outcome.detail.c_str(), outcome.pass && !in_budget ? " [budget exceeded]" : "");
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    return failures;
}
