#ifndef GIBBSFIT_JSON_IO_HPP
#define GIBBSFIT_JSON_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbsfit/model_selection.hpp"
#include "gibbsfit/tomography.hpp"

namespace gibbsfit {

using Json = nlohmann::json;

// Hermitian operator: {"dim": d, "entries": [[[re,im], ...], ...]} row-major.
// States carry an additional "type": "state" tag. Parsers reject input that
// is non-Hermitian beyond 1e-9.
Json operator_to_json(const HermitianOperator& op);
HermitianOperator operator_from_json(const Json& j);

Json state_to_json(const DensityMatrix& state);
DensityMatrix state_from_json(const Json& j);

// {"dim": d, "observables": [{"label": ..., "dim": d, "entries": ...}, ...]}
Json observables_to_json(const ObservableSet& set);
ObservableSet observables_from_json(const Json& j);

// {"labels": [...], "values": [...], "N": n}; labels bind to `measured`.
Json sample_means_to_json(const SampleMeans& means);
SampleMeans sample_means_from_json(const Json& j, const ObservableSet& measured);

// {"sigma": <state>, "labels": [...], "kappa": [...], "log_partition": r}
Json gibbs_model_to_json(const GibbsModel& model);
GibbsModel gibbs_model_from_json(const Json& j, const ObservableSet& observables);

Json sample_record_to_json(const SampleRecord& record);
SampleRecord sample_record_from_json(const Json& j, const ObservableSet& measured);

Json ensemble_spec_to_json(const EnsembleSpec& spec);
EnsembleSpec ensemble_spec_from_json(const Json& j);

// [{"label": ..., "indices": [...]}, ...]; indices validated against pool.
std::vector<RelevanceHypothesis> hypotheses_from_json(const Json& j, const ObservableSet& pool);

Json ranking_to_json(const std::vector<RankedHypothesis>& ranking);
std::string ranking_to_csv(const std::vector<RankedHypothesis>& ranking);

// Grid posterior as plot-ready CSV: x,y,z,weight rows at 17 digits.
std::string posterior_to_csv(const GridPosterior& grid);

std::string format_double17(double value);

Json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const Json& j);
void save_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gibbsfit

#endif  // GIBBSFIT_JSON_IO_HPP
