#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "dotmat/data.hpp"
#include "dotmat/harness.hpp"
#include "dotmat/metrics.hpp"
#include "dotmat/model.hpp"
#include "dotmat/trainers.hpp"
#include "dotmat/types.hpp"

namespace py = pybind11;
using namespace dotmat;

namespace {

std::vector<double> as_vector(std::span<const double> s) {
    return {s.begin(), s.end()};
}

}  // namespace

PYBIND11_MODULE(_dotmat, m) {
    m.doc() = "Data-free matrix factorization toolkit: cold-start training, "
              "densify-then-MF, baselines, metrics, and a grid experiment harness.";

    // Exceptions: one library base, the useful subclasses chained under it.
    auto base = py::register_exception<Error>(m, "DotMatError");
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<DataError>(m, "DataError", base);
    py::register_exception<LookupError>(m, "IdLookupError", base);
    py::register_exception<BoundsError>(m, "BoundsError", base);
    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base);

    py::class_<RatingTriple>(m, "RatingTriple")
        .def(py::init<>())
        .def(py::init([](UserId u, ItemId i, double r, std::optional<std::int64_t> ts) {
                 return RatingTriple{u, i, r, ts};
             }),
             py::arg("user_id"), py::arg("item_id"), py::arg("rating"),
             py::arg("timestamp") = std::optional<std::int64_t>{})
        .def_readwrite("user_id", &RatingTriple::user_id)
        .def_readwrite("item_id", &RatingTriple::item_id)
        .def_readwrite("rating", &RatingTriple::rating)
        .def_readwrite("timestamp", &RatingTriple::timestamp)
        .def(py::self == py::self)
        .def("__repr__", [](const RatingTriple& t) {
            std::ostringstream out;
            out << "RatingTriple(user_id=" << t.user_id << ", item_id=" << t.item_id
                << ", rating=" << t.rating << ")";
            return out.str();
        });

    py::class_<InteractionDataset>(m, "InteractionDataset")
        .def(py::init<>())
        .def_static("from_triples", &InteractionDataset::from_triples, py::arg("triples"),
                    py::arg("r_max") = std::optional<double>{})
        .def_static("with_universe", &InteractionDataset::with_universe, py::arg("users"),
                    py::arg("items"), py::arg("triples"), py::arg("r_max"))
        .def_property_readonly("users", &InteractionDataset::users)
        .def_property_readonly("items", &InteractionDataset::items)
        .def_property_readonly("triples", &InteractionDataset::triples)
        .def_property_readonly("r_max", &InteractionDataset::r_max)
        .def_property_readonly("n_users", &InteractionDataset::n_users)
        .def_property_readonly("n_items", &InteractionDataset::n_items)
        .def_property_readonly("n_triples", &InteractionDataset::n_triples)
        .def(py::self == py::self)
        .def("__len__", &InteractionDataset::n_triples);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("dim", &TrainConfig::dim)
        .def_readwrite("clamp_eps", &TrainConfig::clamp_eps)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("pairs_per_user", &TrainConfig::pairs_per_user)
        .def("validate", &TrainConfig::validate);

    py::class_<FactorModel>(m, "FactorModel")
        .def_property_readonly("dim", &FactorModel::dim)
        .def_property_readonly("n_users", &FactorModel::n_users)
        .def_property_readonly("n_items", &FactorModel::n_items)
        .def_property_readonly("user_ids", &FactorModel::user_ids)
        .def_property_readonly("item_ids", &FactorModel::item_ids)
        .def("user_factors",
             [](const FactorModel& mo, UserId id) { return as_vector(mo.user_factors(id)); },
             py::arg("user_id"))
        .def("item_factors",
             [](const FactorModel& mo, ItemId id) { return as_vector(mo.item_factors(id)); },
             py::arg("item_id"))
        .def(py::self == py::self);

    py::class_<SplitDataset>(m, "SplitDataset")
        .def(py::init<>())
        .def_readwrite("train", &SplitDataset::train)
        .def_readwrite("test", &SplitDataset::test);

    py::class_<PopularityRanks>(m, "PopularityRanks")
        .def(py::init<>())
        .def_readwrite("user_rank", &PopularityRanks::user_rank)
        .def_readwrite("item_rank", &PopularityRanks::item_rank);

    py::class_<ParseStats>(m, "ParseStats")
        .def(py::init<>())
        .def_readwrite("lines", &ParseStats::lines)
        .def_readwrite("duplicates_replaced", &ParseStats::duplicates_replaced);

    py::class_<TrainTrace::Epoch>(m, "TraceEpoch")
        .def_readonly("epoch", &TrainTrace::Epoch::epoch)
        .def_readonly("mean_loss", &TrainTrace::Epoch::mean_loss)
        .def_readonly("seconds", &TrainTrace::Epoch::seconds);

    py::class_<TrainTrace>(m, "TrainTrace")
        .def_readonly("epochs", &TrainTrace::epochs)
        .def("to_csv", [](const TrainTrace& t) {
            std::ostringstream out;
            t.to_csv(out);
            return out.str();
        });

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("trace", &TrainResult::trace);

    py::class_<PredictionRecord>(m, "PredictionRecord")
        .def(py::init([](UserId u, ItemId i, double pred, double act) {
                 return PredictionRecord{u, i, pred, act};
             }),
             py::arg("user_id"), py::arg("item_id"), py::arg("predicted"), py::arg("actual"))
        .def_readwrite("user_id", &PredictionRecord::user_id)
        .def_readwrite("item_id", &PredictionRecord::item_id)
        .def_readwrite("predicted", &PredictionRecord::predicted)
        .def_readwrite("actual", &PredictionRecord::actual);

    py::class_<ExposureProfile>(m, "ExposureProfile")
        .def_readonly("counts", &ExposureProfile::counts)
        .def_readonly("k", &ExposureProfile::k)
        .def_readonly("users_served", &ExposureProfile::users_served);

    py::class_<MatthewResult>(m, "MatthewResult")
        .def_readonly("degree", &MatthewResult::degree)
        .def_readonly("fitted", &MatthewResult::fitted)
        .def_readonly("excluded_zero", &MatthewResult::excluded_zero);

    py::enum_<Algorithm>(m, "Algorithm")
        .value("DotMat", Algorithm::DotMat)
        .value("DotMatHybrid", Algorithm::DotMatHybrid)
        .value("MfClassic", Algorithm::MfClassic)
        .value("RankMat", Algorithm::RankMat)
        .value("GloVeMat", Algorithm::GloVeMat)
        .value("RandomBaseline", Algorithm::RandomBaseline)
        .value("MeanBaseline", Algorithm::MeanBaseline);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def_readwrite("algorithms", &GridSpec::algorithms)
        .def_readwrite("learning_rates", &GridSpec::learning_rates)
        .def_readwrite("sample_sizes", &GridSpec::sample_sizes)
        .def_readwrite("dim", &GridSpec::dim)
        .def_readwrite("epochs", &GridSpec::epochs)
        .def_readwrite("test_fraction", &GridSpec::test_fraction)
        .def_readwrite("top_k", &GridSpec::top_k)
        .def_readwrite("pairs_per_user", &GridSpec::pairs_per_user)
        .def_readwrite("clamp_eps", &GridSpec::clamp_eps)
        .def_readwrite("seed", &GridSpec::seed)
        .def_readwrite("fixed_timing", &GridSpec::fixed_timing)
        .def("validate", &GridSpec::validate);

    py::class_<ReportRow>(m, "ReportRow")
        .def_readonly("algorithm", &ReportRow::algorithm)
        .def_readonly("learning_rate", &ReportRow::learning_rate)
        .def_readonly("sample_size", &ReportRow::sample_size)
        .def_readonly("mae", &ReportRow::mae)
        .def_readonly("matthew_degree", &ReportRow::matthew_degree)
        .def_readonly("train_seconds", &ReportRow::train_seconds)
        .def_readonly("seed", &ReportRow::seed)
        .def(py::self == py::self);

    py::class_<ExperimentReport>(m, "ExperimentReport")
        .def(py::init<>())
        .def_readonly("rows", &ExperimentReport::rows)
        .def(py::self == py::self);

    // --- model primitives ---
    m.def("clamped_dot",
          [](const std::vector<double>& u, const std::vector<double>& v, double eps) {
              return clamped_dot(u, v, eps);
          },
          py::arg("u"), py::arg("v"), py::arg("eps") = kDefaultClampEps);
    m.def("predict_rating", &predict_rating, py::arg("model"), py::arg("user"), py::arg("item"),
          py::arg("r_max"), py::arg("eps") = kDefaultClampEps);
    m.def("init_model",
          [](const std::vector<UserId>& users, const std::vector<ItemId>& items, std::size_t k,
             std::uint64_t seed) { return init_model(users, items, k, seed); },
          py::arg("user_ids"), py::arg("item_ids"), py::arg("k"), py::arg("seed"));
    m.def("save_model",
          py::overload_cast<const FactorModel&, const std::filesystem::path&>(&save_model),
          py::arg("model"), py::arg("destination"));
    m.def("load_model", py::overload_cast<const std::filesystem::path&>(&load_model),
          py::arg("source"));

    // --- data ingestion and splits ---
    m.def("parse_movielens_file",
          [](const std::filesystem::path& source, std::optional<double> r_max) {
              ParseStats stats;
              auto ds = parse_movielens_file(source, &stats, r_max);
              return py::make_tuple(std::move(ds), stats);
          },
          py::arg("source"), py::arg("r_max") = std::optional<double>{},
          "Returns (dataset, parse_stats).");
    m.def("parse_csv_file",
          [](const std::filesystem::path& source, const std::string& user_col,
             const std::string& item_col, const std::string& rating_col,
             std::optional<double> r_max) {
              ParseStats stats;
              CsvColumns columns{user_col, item_col, rating_col};
              auto ds = parse_csv_file(source, columns, &stats, r_max);
              return py::make_tuple(std::move(ds), stats);
          },
          py::arg("source"), py::arg("user_col") = "user_id", py::arg("item_col") = "item_id",
          py::arg("rating_col") = "rating", py::arg("r_max") = std::optional<double>{});
    m.def("save_dataset",
          py::overload_cast<const InteractionDataset&, const std::filesystem::path&>(&save_dataset),
          py::arg("dataset"), py::arg("destination"));
    m.def("load_dataset", py::overload_cast<const std::filesystem::path&>(&load_dataset),
          py::arg("source"));
    m.def("sample_users", &sample_users, py::arg("dataset"), py::arg("n"), py::arg("seed"));
    m.def("split_train_test", &split_train_test, py::arg("dataset"), py::arg("test_fraction"),
          py::arg("seed"));
    m.def("popularity_ranks", &popularity_ranks, py::arg("dataset"));

    // --- losses and single steps ---
    m.def("dotmat_pair_loss",
          [](const std::vector<double>& u, const std::vector<double>& v, double target,
             double eps) { return dotmat_pair_loss(u, v, target, eps); },
          py::arg("u"), py::arg("v"), py::arg("target"), py::arg("eps") = kDefaultClampEps);
    m.def("dotmat_pair_grad_scalar",
          [](const std::vector<double>& u, const std::vector<double>& v, double target,
             double eps) { return dotmat_pair_grad_scalar(u, v, target, eps); },
          py::arg("u"), py::arg("v"), py::arg("target"), py::arg("eps") = kDefaultClampEps);
    m.def("dotmat_datafree_pair_loss",
          [](const std::vector<double>& u, const std::vector<double>& v, double eps) {
              return dotmat_datafree_pair_loss(u, v, eps);
          },
          py::arg("u"), py::arg("v"), py::arg("eps") = kDefaultClampEps);
    m.def("dotmat_datafree_grad_scalar",
          [](const std::vector<double>& u, const std::vector<double>& v, double eps) {
              return dotmat_datafree_grad_scalar(u, v, eps);
          },
          py::arg("u"), py::arg("v"), py::arg("eps") = kDefaultClampEps);
    m.def("dotmat_loss", &dotmat_loss, py::arg("model"), py::arg("dataset"),
          py::arg("eps") = kDefaultClampEps);
    m.def("dotmat_step_supervised", &dotmat_step_supervised, py::arg("model"), py::arg("user"),
          py::arg("item"), py::arg("rating"), py::arg("r_max"), py::arg("learning_rate"),
          py::arg("eps") = kDefaultClampEps);
    m.def("dotmat_step_datafree", &dotmat_step_datafree, py::arg("model"), py::arg("user"),
          py::arg("item"), py::arg("learning_rate"), py::arg("eps") = kDefaultClampEps);

    // --- trainers ---
    m.def("train_dotmat",
          [](const InteractionDataset& ds, const TrainConfig& config) {
              return train_dotmat(ds, config);
          },
          py::arg("dataset"), py::arg("config"),
          "Data-free training over the dataset's universes; ratings are never read.");
    m.def("train_dotmat",
          [](const std::vector<UserId>& users, const std::vector<ItemId>& items,
             const TrainConfig& config) { return train_dotmat(users, items, config); },
          py::arg("user_ids"), py::arg("item_ids"), py::arg("config"));
    m.def("train_mf_classic", &train_mf_classic, py::arg("split"), py::arg("config"));
    m.def("train_rankmat", &train_rankmat, py::arg("split"), py::arg("ranks"), py::arg("config"));
    m.def("train_glovemat", &train_glovemat, py::arg("split"), py::arg("config"));
    m.def("train_dotmat_hybrid", &train_dotmat_hybrid, py::arg("split"), py::arg("config_dotmat"),
          py::arg("config_mf"));
    m.def("densify",
          [](const FactorModel& model, const InteractionDataset& base,
             const std::vector<UserId>& users, const std::vector<ItemId>& items, double eps) {
              return densify(model, base, users, items, eps);
          },
          py::arg("model"), py::arg("base"), py::arg("user_ids"), py::arg("item_ids"),
          py::arg("eps") = kDefaultClampEps);

    // --- predictors ---
    m.def("baseline_random", &baseline_random, py::arg("seed"), py::arg("r_max"));
    m.def("baseline_mean", &baseline_mean, py::arg("split"));
    m.def("model_predictor", &model_predictor, py::arg("model"), py::arg("r_max"),
          py::arg("eps") = kDefaultClampEps);
    m.def("glovemat_predictor", &glovemat_predictor, py::arg("model"), py::arg("r_max"));

    // --- metrics ---
    m.def("mae", &mae, py::arg("predictions"));
    m.def("observed_pairs", &observed_pairs, py::arg("dataset"));
    m.def("top_k",
          [](const ScoreFn& score, const std::vector<UserId>& users,
             const std::vector<ItemId>& items, std::size_t k, const ExcludePairs& exclude) {
              return top_k(score, users, items, k, exclude);
          },
          py::arg("score"), py::arg("users"), py::arg("items"), py::arg("k"),
          py::arg("exclude") = ExcludePairs{});
    m.def("top_k",
          [](const FactorModel& model, double r_max, const std::vector<UserId>& users,
             const std::vector<ItemId>& items, std::size_t k, const ExcludePairs& exclude) {
              return top_k(model, r_max, users, items, k, exclude);
          },
          py::arg("model"), py::arg("r_max"), py::arg("users"), py::arg("items"), py::arg("k"),
          py::arg("exclude") = ExcludePairs{});
    m.def("exposure_profile", &exposure_profile, py::arg("lists"), py::arg("k"));
    m.def("matthew_degree",
          [](const std::vector<double>& counts) { return matthew_degree(counts); },
          py::arg("counts"));
    m.def("matthew_degree",
          [](const ExposureProfile& profile) { return matthew_degree(profile); },
          py::arg("profile"));

    // --- experiment harness ---
    m.def("algorithm_name", &algorithm_name, py::arg("algorithm"));
    m.def("parse_algorithm", &parse_algorithm, py::arg("name"));
    m.def("all_algorithms", &all_algorithms);
    m.def("run_grid", &run_grid, py::arg("dataset"), py::arg("spec"));
    m.def("emit_csv",
          py::overload_cast<const ExperimentReport&, const std::filesystem::path&>(&emit_csv),
          py::arg("report"), py::arg("destination"));
    m.def("emit_json",
          py::overload_cast<const ExperimentReport&, const std::filesystem::path&>(&emit_json),
          py::arg("report"), py::arg("destination"));
    m.def("report_csv", [](const ExperimentReport& report) {
        std::ostringstream out;
        emit_csv(report, out);
        return out.str();
    });
    m.def("report_json", [](const ExperimentReport& report) {
        std::ostringstream out;
        emit_json(report, out);
        return out.str();
    });
    m.def("parse_report_json", [](const std::string& text) {
        std::istringstream in(text);
        return parse_report_json(in);
    });
}
