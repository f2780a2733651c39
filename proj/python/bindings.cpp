#include "mvtl/archive.hpp"
#include "mvtl/experiment.hpp"
#include "mvtl/features.hpp"
#include "mvtl/trainer.hpp"
#include "mvtl/wavelet.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mvtl;

namespace {

std::size_t infer_classes(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::size_t c = 0;
    for (auto y : a) c = std::max(c, y + 1);
    for (auto y : b) c = std::max(c, y + 1);
    return std::max<std::size_t>(c, 2);
}

MultiViewDataset dataset(std::vector<Matrix> views, const std::vector<std::size_t>* labels, std::size_t classes,
                         DomainTag domain) {
    std::optional<Matrix> y;
    if (labels) y = one_hot_encode(*labels, classes);
    return make_multiview(std::move(views), std::move(y), domain);
}

py::dict trace_dict(const TrainTrace& t) {
    py::list objectives;
    py::list weights;
    for (const auto& it : t.iterations) {
        objectives.append(it.objective);
        weights.append(it.weights);
    }
    py::dict flags;
    flags["knowledge_transfer"] = t.flags.knowledge_transfer;
    flags["distribution_matching"] = t.flags.distribution_matching;
    flags["consensus"] = t.flags.consensus;
    flags["prior_refresh"] = t.flags.prior_refresh;
    py::dict d;
    d["initial_objective"] = t.initial_objective;
    d["objectives"] = objectives;
    d["weights"] = weights;
    d["flags"] = flags;
    d["converged"] = t.converged;
    return d;
}

}  // namespace

PYBIND11_MODULE(mvtl, m) {
    m.doc() = "Multi-view transfer-learning TSK fuzzy classifier";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ArchiveError>(m, "ArchiveError", PyExc_IOError);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("rules", &TrainConfig::rules)
        .def_readwrite("fuzzy_index", &TrainConfig::fuzzy_index)
        .def_readwrite("lambda_pg", &TrainConfig::lambda_pg)
        .def_readwrite("lambda_t", &TrainConfig::lambda_t)
        .def_readwrite("lambda_d", &TrainConfig::lambda_d)
        .def_readwrite("lambda_un", &TrainConfig::lambda_un)
        .def_readwrite("max_iters", &TrainConfig::max_iters)
        .def_readwrite("tol", &TrainConfig::tol)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("prior_refresh", &TrainConfig::prior_refresh)
        .def_readwrite("clustering_fuzzifier", &TrainConfig::clustering_fuzzifier)
        .def_readwrite("spread_scale", &TrainConfig::spread_scale)
        .def("validate", [](const TrainConfig& c) { validate(c); });

    py::class_<ViewAntecedents>(m, "ViewAntecedents")
        .def_readonly("centers", &ViewAntecedents::centers)
        .def_readonly("spreads", &ViewAntecedents::spreads)
        .def_property_readonly("rules", &ViewAntecedents::rules)
        .def_property_readonly("dim", &ViewAntecedents::dim);

    m.def(
        "cluster_antecedents",
        [](const Matrix& data, std::size_t rules, double fuzzifier, double spread_scale) {
            ClusteringOptions o;
            o.fuzzifier = fuzzifier;
            o.spread_scale = spread_scale;
            auto r = cluster_antecedents(data, rules, o);
            return py::make_tuple(r.antecedents, r.memberships);
        },
        py::arg("data"), py::arg("rules"), py::arg("fuzzifier") = 2.0, py::arg("spread_scale") = 1.0,
        "Fuzzy c-means antecedents; returns (antecedents, memberships).");
    m.def("firing_strengths", [](const Vector& x, const ViewAntecedents& a) { return firing_strengths(x, a); });
    m.def("map_dataset", [](const Matrix& data, const ViewAntecedents& a) { return map_dataset(data, a).rows; },
          "Fuzzy-space design matrix, N x K(d+1).");
    m.def("ridge_consequents", [](const Matrix& G, const Matrix& Y, double lam) { return ridge_consequents(G, Y, lam).P; },
          py::arg("G"), py::arg("Y"), py::arg("lam"));
    m.def("mmd_matrix", [](const Matrix& source, const Matrix& target) { return build_mmd(source, target).omega; });
    m.def("update_weights", [](const std::vector<double>& errors, double m) { return update_weights(errors, m); },
          py::arg("errors"), py::arg("fuzzy_index"));

    py::class_<MvTlModel>(m, "Model")
        .def_readonly("weights", &MvTlModel::weights)
        .def_readonly("fuzzy_index", &MvTlModel::fuzzy_index)
        .def_readonly("classes", &MvTlModel::classes)
        .def_property_readonly("num_views", &MvTlModel::num_views)
        .def("consequents", [](const MvTlModel& mdl, std::size_t v) { return mdl.consequents.at(v).P; })
        .def("antecedents", [](const MvTlModel& mdl, std::size_t v) { return mdl.antecedents.views.at(v); })
        .def("decision_values",
             [](const MvTlModel& mdl, std::vector<Matrix> views) {
                 return decision_values(mdl, make_multiview(std::move(views), std::nullopt, DomainTag::target));
             })
        .def("predict",
             [](const MvTlModel& mdl, std::vector<Matrix> views) {
                 return predict_labels(mdl, make_multiview(std::move(views), std::nullopt, DomainTag::target));
             })
        .def("save", [](const MvTlModel& mdl, const std::string& path) { save_model(ModelArchive{mdl, {}}, path); })
        .def_static("load", [](const std::string& path) { return load_model(path).model; });

    m.def(
        "fit",
        [](std::vector<Matrix> source_views, const std::vector<std::size_t>& source_labels,
           std::vector<Matrix> target_views, const std::vector<std::size_t>& target_labels, const TrainConfig& cfg,
           std::optional<std::vector<Matrix>> target_pool) {
            const std::size_t c = infer_classes(source_labels, target_labels);
            const auto src = dataset(std::move(source_views), &source_labels, c, DomainTag::source);
            const auto tgt = dataset(std::move(target_views), &target_labels, c, DomainTag::target);
            FitResult r;
            {
                py::gil_scoped_release release;
                if (target_pool)
                    r = fit(src, tgt, dataset(std::move(*target_pool), nullptr, c, DomainTag::target), cfg);
                else
                    r = fit(src, tgt, cfg);
            }
            return py::make_tuple(r.model, trace_dict(r.trace));
        },
        py::arg("source_views"), py::arg("source_labels"), py::arg("target_views"), py::arg("target_labels"),
        py::arg("config") = TrainConfig{}, py::arg("target_pool") = py::none(),
        "Train on labeled source and target views; returns (model, trace).");

    m.def("fft_magnitudes", [](const Vector& x) { return fft_magnitudes(x); });
    m.def("band_bins", [](std::size_t length, double fs, double lo, double hi) { return band_bins(length, fs, Band{lo, hi}); },
          py::arg("length"), py::arg("fs"), py::arg("low_hz") = 4.0, py::arg("high_hz") = 30.0);
    m.def("time_view", [](const Matrix& w, std::size_t q) { return time_view(w, q); }, py::arg("window"),
          py::arg("decimation") = 4);
    m.def("freq_view", [](const Matrix& w, double fs) { return freq_view(w, fs); }, py::arg("window"), py::arg("fs"));
    m.def("wavelet_view", [](const Matrix& w, std::size_t levels) { return wavelet_view(w, levels); },
          py::arg("window"), py::arg("levels") = 4);
    m.def("dwt", [](const Vector& x, std::size_t levels) { return wavelet::dwt(x, levels); });
    m.def("idwt", [](const Vector& c, std::size_t levels) { return wavelet::idwt(c, levels); });

    m.def(
        "stratified_folds",
        [](const std::vector<std::size_t>& labels, std::size_t folds, std::uint64_t seed) {
            py::list out;
            for (const auto& f : experiment::stratified_folds(labels, folds, seed)) out.append(py::make_tuple(f.train, f.test));
            return out;
        },
        py::arg("labels"), py::arg("folds") = 5, py::arg("seed") = 42);
    m.def("report", [](const std::string& results_path) {
        return experiment::report_text(experiment::make_report(experiment::parse_results_csv(results_path)));
    });
}
