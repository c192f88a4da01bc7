#include "gibbsfit/json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace gibbsfit {

namespace {

Matrix entries_from_json(const Json& j) {
    if (!j.contains("dim") || !j.contains("entries")) {
        throw std::runtime_error("operator JSON: missing 'dim' or 'entries'");
    }
    const int d = j.at("dim").get<int>();
    if (d < 2) {
        throw std::runtime_error("operator JSON: dim must be >= 2");
    }
    const Json& rows = j.at("entries");
    if (!rows.is_array() || static_cast<int>(rows.size()) != d) {
        throw std::runtime_error("operator JSON: 'entries' must have dim rows");
    }
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) {
        const Json& row = rows.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<int>(row.size()) != d) {
            throw std::runtime_error("operator JSON: row " + std::to_string(i) + " must have dim entries");
        }
        for (int k = 0; k < d; ++k) {
            const Json& cell = row.at(static_cast<std::size_t>(k));
            if (!cell.is_array() || cell.size() != 2) {
                throw std::runtime_error("operator JSON: entries must be [re, im] pairs");
            }
            m(i, k) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
        }
    }
    return m;
}

Json entries_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(Json::array({m(i, k).real(), m(i, k).imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Json operator_to_json(const HermitianOperator& op) {
    return Json{{"dim", op.dim()}, {"entries", entries_to_json(op.matrix())}};
}

HermitianOperator operator_from_json(const Json& j) {
    try {
        return HermitianOperator(entries_from_json(j), 1e-9);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("operator JSON: ") + e.what());
    }
}

Json state_to_json(const DensityMatrix& state) {
    Json j = operator_to_json(state.op());
    j["type"] = "state";
    return j;
}

DensityMatrix state_from_json(const Json& j) {
    if (!j.contains("type") || j.at("type").get<std::string>() != "state") {
        throw std::runtime_error("state JSON: missing 'type': 'state' tag");
    }
    try {
        return DensityMatrix(HermitianOperator(entries_from_json(j), 1e-9));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("state JSON: ") + e.what());
    }
}

Json observables_to_json(const ObservableSet& set) {
    Json list = Json::array();
    for (int b = 0; b < set.size(); ++b) {
        Json entry = operator_to_json(set[b]);
        entry["label"] = set.labels()[static_cast<std::size_t>(b)];
        list.push_back(std::move(entry));
    }
    return Json{{"dim", set.dim()}, {"observables", std::move(list)}};
}

ObservableSet observables_from_json(const Json& j) {
    if (!j.contains("dim") || !j.contains("observables")) {
        throw std::runtime_error("observable set JSON: missing 'dim' or 'observables'");
    }
    const int dim = j.at("dim").get<int>();
    std::vector<HermitianOperator> ops;
    std::vector<std::string> labels;
    for (const Json& entry : j.at("observables")) {
        ops.push_back(operator_from_json(entry));
        labels.push_back(entry.value("label", "G" + std::to_string(labels.size())));
    }
    try {
        return ObservableSet(dim, std::move(ops), std::move(labels));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("observable set JSON: ") + e.what());
    }
}

Json sample_means_to_json(const SampleMeans& means) {
    Json labels = Json::array();
    Json values = Json::array();
    for (int b = 0; b < means.observables.size(); ++b) {
        labels.push_back(means.observables.labels()[static_cast<std::size_t>(b)]);
        values.push_back(means.values(b));
    }
    return Json{{"labels", std::move(labels)}, {"values", std::move(values)}, {"N", means.sample_size}};
}

SampleMeans sample_means_from_json(const Json& j, const ObservableSet& measured) {
    if (!j.contains("labels") || !j.contains("values") || !j.contains("N")) {
        throw std::runtime_error("sample means JSON: missing 'labels', 'values' or 'N'");
    }
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    const auto values = j.at("values").get<std::vector<double>>();
    if (labels.size() != values.size()) {
        throw std::runtime_error("sample means JSON: labels and values differ in length");
    }
    std::vector<int> indices;
    for (const std::string& label : labels) {
        const auto& pool_labels = measured.labels();
        const auto it = std::find(pool_labels.begin(), pool_labels.end(), label);
        if (it == pool_labels.end()) {
            throw std::runtime_error("sample means JSON: label '" + label +
                                     "' is not among the provided observables");
        }
        indices.push_back(static_cast<int>(std::distance(pool_labels.begin(), it)));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t b = 0; b < values.size(); ++b) v(static_cast<Eigen::Index>(b)) = values[b];
    try {
        return SampleMeans(measured.subset(indices), std::move(v), j.at("N").get<std::int64_t>());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("sample means JSON: ") + e.what());
    }
}

Json gibbs_model_to_json(const GibbsModel& model) {
    Json labels = Json::array();
    Json kappa = Json::array();
    for (int b = 0; b < model.observables.size(); ++b) {
        labels.push_back(model.observables.labels()[static_cast<std::size_t>(b)]);
        kappa.push_back(model.kappa(b));
    }
    return Json{{"sigma", state_to_json(model.sigma)},
                {"labels", std::move(labels)},
                {"kappa", std::move(kappa)},
                {"log_partition", model.log_partition}};
}

GibbsModel gibbs_model_from_json(const Json& j, const ObservableSet& observables) {
    for (const std::string required : {"sigma", "labels", "kappa", "log_partition"}) {
        if (!j.contains(required)) {
            throw std::runtime_error("gibbs model JSON: missing '" + required + "'");
        }
    }
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    if (labels != observables.labels()) {
        throw std::runtime_error("gibbs model JSON: labels do not match the provided observables");
    }
    const auto kappa_values = j.at("kappa").get<std::vector<double>>();
    if (static_cast<int>(kappa_values.size()) != observables.size()) {
        throw std::runtime_error("gibbs model JSON: kappa length does not match observables");
    }
    Eigen::VectorXd kappa(static_cast<Eigen::Index>(kappa_values.size()));
    for (std::size_t b = 0; b < kappa_values.size(); ++b) {
        kappa(static_cast<Eigen::Index>(b)) = kappa_values[b];
    }
    const DensityMatrix sigma = state_from_json(j.at("sigma"));
    DensityMatrix state = gibbs_state(kappa, observables, sigma);
    return GibbsModel{sigma, observables, std::move(kappa), std::move(state),
                      j.at("log_partition").get<double>()};
}

Json sample_record_to_json(const SampleRecord& record) {
    Json j{{"id", record.id},
           {"N", record.size},
           {"means", sample_means_to_json(record.means)},
           {"image", state_to_json(record.image)},
           {"shrink_factor", record.shrink_factor},
           {"residual", record.residual}};
    j["true_state"] = record.true_state ? state_to_json(*record.true_state) : Json(nullptr);
    return j;
}

SampleRecord sample_record_from_json(const Json& j, const ObservableSet& measured) {
    for (const std::string required : {"id", "N", "means", "image"}) {
        if (!j.contains(required)) {
            throw std::runtime_error("sample record JSON: missing '" + required + "'");
        }
    }
    SampleMeans means = sample_means_from_json(j.at("means"), measured);
    std::optional<DensityMatrix> truth;
    if (j.contains("true_state") && !j.at("true_state").is_null()) {
        truth = state_from_json(j.at("true_state"));
    }
    return SampleRecord{j.at("id").get<std::string>(),
                        j.at("N").get<std::int64_t>(),
                        std::move(means),
                        state_from_json(j.at("image")),
                        std::move(truth),
                        j.value("shrink_factor", 1.0),
                        j.value("residual", 0.0)};
}

Json ensemble_spec_to_json(const EnsembleSpec& spec) {
    Json draws = Json::array();
    for (const auto& draw : spec.parameter_draws) {
        Json one = Json::array();
        for (Eigen::Index k = 0; k < draw.size(); ++k) one.push_back(draw(k));
        draws.push_back(std::move(one));
    }
    return Json{{"seed", spec.seed},
                {"sigma", state_to_json(spec.sigma)},
                {"family", observables_to_json(spec.family)},
                {"parameter_draws", std::move(draws)},
                {"sizes", spec.sizes},
                {"measurement", observables_to_json(spec.measurement_set)}};
}

EnsembleSpec ensemble_spec_from_json(const Json& j) {
    for (const std::string required : {"seed", "family", "parameter_draws", "sizes"}) {
        if (!j.contains(required)) {
            throw std::runtime_error("ensemble spec JSON: missing '" + required + "'");
        }
    }
    ObservableSet family = observables_from_json(j.at("family"));
    DensityMatrix sigma = j.contains("sigma") && !j.at("sigma").is_null()
                              ? state_from_json(j.at("sigma"))
                              : DensityMatrix::maximally_mixed(family.dim());
    ObservableSet measurement = j.contains("measurement") && !j.at("measurement").is_null()
                                    ? observables_from_json(j.at("measurement"))
                                    : family;

    std::vector<Eigen::VectorXd> draws;
    for (const Json& one : j.at("parameter_draws")) {
        const auto values = one.get<std::vector<double>>();
        Eigen::VectorXd draw(static_cast<Eigen::Index>(values.size()));
        for (std::size_t k = 0; k < values.size(); ++k) draw(static_cast<Eigen::Index>(k)) = values[k];
        draws.push_back(std::move(draw));
    }
    return EnsembleSpec{std::move(sigma),
                        std::move(family),
                        std::move(draws),
                        j.at("sizes").get<std::vector<std::int64_t>>(),
                        std::move(measurement),
                        j.at("seed").get<std::uint64_t>()};
}

std::vector<RelevanceHypothesis> hypotheses_from_json(const Json& j, const ObservableSet& pool) {
    if (!j.is_array()) {
        throw std::runtime_error("hypotheses JSON: expected an array");
    }
    std::vector<RelevanceHypothesis> out;
    for (const Json& entry : j) {
        if (!entry.contains("indices")) {
            throw std::runtime_error("hypotheses JSON: entry missing 'indices'");
        }
        RelevanceHypothesis h;
        h.indices = entry.at("indices").get<std::vector<int>>();
        for (const int idx : h.indices) {
            if (idx < 0 || idx >= pool.size()) {
                throw std::runtime_error("hypotheses JSON: index " + std::to_string(idx) +
                                         " out of pool bounds");
            }
        }
        if (entry.contains("label")) {
            h.label = entry.at("label").get<std::string>();
        } else {
            std::string label = "{";
            for (std::size_t k = 0; k < h.indices.size(); ++k) {
                if (k > 0) label += ",";
                label += pool.labels()[static_cast<std::size_t>(h.indices[k])];
            }
            h.label = label + "}";
        }
        out.push_back(std::move(h));
    }
    return out;
}

Json ranking_to_json(const std::vector<RankedHypothesis>& ranking) {
    Json out = Json::array();
    for (const RankedHypothesis& r : ranking) {
        out.push_back(Json{{"label", r.hypothesis.label},
                           {"fit_term", r.score.fit_term},
                           {"penalty_term", r.score.penalty_term},
                           {"total", r.score.total},
                           {"posterior_weight", r.posterior_weight}});
    }
    return out;
}

std::string ranking_to_csv(const std::vector<RankedHypothesis>& ranking) {
    std::string csv = "label,fit_term,penalty_term,total,posterior_weight\n";
    for (const RankedHypothesis& r : ranking) {
        csv += r.hypothesis.label + "," + format_double17(r.score.fit_term) + "," +
               format_double17(r.score.penalty_term) + "," + format_double17(r.score.total) + "," +
               format_double17(r.posterior_weight) + "\n";
    }
    return csv;
}

std::string posterior_to_csv(const GridPosterior& grid) {
    std::string csv = "x,y,z,weight\n";
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        csv += format_double17(grid.points[i].x()) + "," + format_double17(grid.points[i].y()) +
               "," + format_double17(grid.points[i].z()) + "," + format_double17(grid.weights[i]) +
               "\n";
    }
    return csv;
}

std::string format_double17(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

Json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::runtime_error("cannot parse '" + path.string() + "': " + e.what());
    }
}

void save_json_file(const std::filesystem::path& path, const Json& j) {
    save_text_file(path, j.dump(2) + "\n");
}

void save_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write to '" + path.string() + "' failed");
    }
}

}  // namespace gibbsfit
