#ifndef GIBBSFIT_MODEL_SELECTION_HPP
#define GIBBSFIT_MODEL_SELECTION_HPP

#include <span>
#include <string>
#include <vector>

#include "gibbsfit/tomography.hpp"

namespace gibbsfit {

/// A candidate set of relevant observables: indices into a candidate pool.
/// The empty set is the "reference state only" hypothesis.
struct RelevanceHypothesis {
    std::string label;
    std::vector<int> indices;  // distinct, sorted ascending

    int p() const { return static_cast<int>(indices.size()); }
};

/// Penalized asymptotic log-likelihood of one hypothesis:
///   fit_term     = -sum_i N_i S(mu_i | pi_i)
///   penalty_term = -(p/2) sum_i ln N_i
struct HypothesisScore {
    double fit_term = 0.0;
    double penalty_term = 0.0;
    double total = 0.0;
    std::vector<double> per_sample_divergences;
};

/// -(p/2) sum ln N_i over the given sample sizes.
double occam_penalty(int p, std::span<const double> sample_sizes);

/// The closest state of the hypothesis's Gibbs family over sigma: fits the
/// image's expectation values of the hypothesis observables.
DensityMatrix project_to_hypothesis(const DensityMatrix& image, const RelevanceHypothesis& hypothesis,
                                    const ObservableSet& pool, const DensityMatrix& sigma);

HypothesisScore score_hypothesis(std::span<const SampleRecord> samples,
                                 const RelevanceHypothesis& hypothesis, const ObservableSet& pool,
                                 const DensityMatrix& sigma);

struct RankedHypothesis {
    RelevanceHypothesis hypothesis;
    HypothesisScore score;
    double posterior_weight = 0.0;
};

/// Scores every hypothesis, sorts by total descending (ties by label) and
/// attaches posterior weights proportional to exp(total - max total) under a
/// uniform hypothesis prior.
std::vector<RankedHypothesis> rank_hypotheses(std::span<const SampleRecord> samples,
                                              const std::vector<RelevanceHypothesis>& hypotheses,
                                              const ObservableSet& pool, const DensityMatrix& sigma);

/// All subsets of the pool with size <= max_size, ordered by size then
/// lexicographic indices. Labels are "{}" or "{A,B}" from the pool labels.
std::vector<RelevanceHypothesis> enumerate_hypotheses(const ObservableSet& pool, int max_size);

}  // namespace gibbsfit

#endif  // GIBBSFIT_MODEL_SELECTION_HPP
