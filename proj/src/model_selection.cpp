#include "gibbsfit/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gibbsfit/parallel.hpp"

namespace gibbsfit {

namespace {

// Compensated (Kahan) sum in slot order, so the reduction does not depend on
// how the per-slot values were produced.
double kahan_sum(std::span<const double> values) {
    double sum = 0.0;
    double carry = 0.0;
    for (const double v : values) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

void validate_hypothesis(const RelevanceHypothesis& hypothesis, const ObservableSet& pool) {
    int previous = -1;
    for (const int idx : hypothesis.indices) {
        if (idx < 0 || idx >= pool.size()) {
            throw std::out_of_range("hypothesis '" + hypothesis.label + "': index out of pool bounds");
        }
        if (idx <= previous) {
            throw std::invalid_argument("hypothesis '" + hypothesis.label +
                                        "': indices must be distinct and ascending");
        }
        previous = idx;
    }
}

std::string subset_label(const ObservableSet& pool, const std::vector<int>& indices) {
    std::string label = "{";
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (k > 0) label += ",";
        label += pool.labels()[static_cast<std::size_t>(indices[k])];
    }
    label += "}";
    return label;
}

}  // namespace

double occam_penalty(int p, std::span<const double> sample_sizes) {
    if (p == 0) return 0.0;
    std::vector<double> logs;
    logs.reserve(sample_sizes.size());
    for (const double n : sample_sizes) logs.push_back(std::log(n));
    return -(static_cast<double>(p) / 2.0) * kahan_sum(logs);
}

DensityMatrix project_to_hypothesis(const DensityMatrix& image, const RelevanceHypothesis& hypothesis,
                                    const ObservableSet& pool, const DensityMatrix& sigma) {
    validate_hypothesis(hypothesis, pool);
    const ObservableSet subset = pool.subset(hypothesis.indices);
    Eigen::VectorXd values(subset.size());
    for (int b = 0; b < subset.size(); ++b) {
        values(b) = expectation(image, subset[b]);
    }
    return fit_gibbs(subset, values, sigma).model.state;
}

HypothesisScore score_hypothesis(std::span<const SampleRecord> samples,
                                 const RelevanceHypothesis& hypothesis, const ObservableSet& pool,
                                 const DensityMatrix& sigma) {
    validate_hypothesis(hypothesis, pool);
    for (const SampleRecord& sample : samples) {
        for (const int idx : hypothesis.indices) {
            const std::string& label = pool.labels()[static_cast<std::size_t>(idx)];
            const auto& measured = sample.means.observables.labels();
            if (std::find(measured.begin(), measured.end(), label) == measured.end()) {
                throw std::invalid_argument("score_hypothesis: sample '" + sample.id +
                                            "' was not measured over candidate '" + label + "'");
            }
        }
    }

    HypothesisScore score;
    score.per_sample_divergences.resize(samples.size(), 0.0);
    std::vector<double> weighted(samples.size(), 0.0);
    parallel_for(samples.size(), [&](std::size_t i) {
        const SampleRecord& sample = samples[i];
        const DensityMatrix projected = project_to_hypothesis(sample.image, hypothesis, pool, sigma);
        const double divergence = relative_entropy(sample.image, projected);
        if (std::isinf(divergence)) {
            throw std::domain_error(
                "score_hypothesis: sample '" + sample.id +
                "' has an image outside the hypothesis family's support; reconstruct the image "
                "with shrinkage so it is full rank");
        }
        score.per_sample_divergences[i] = divergence;
        weighted[i] = static_cast<double>(sample.size) * divergence;
    });

    std::vector<double> sizes;
    sizes.reserve(samples.size());
    for (const SampleRecord& sample : samples) sizes.push_back(static_cast<double>(sample.size));

    score.fit_term = -kahan_sum(weighted);
    score.penalty_term = occam_penalty(hypothesis.p(), sizes);
    score.total = score.fit_term + score.penalty_term;
    return score;
}

std::vector<RankedHypothesis> rank_hypotheses(std::span<const SampleRecord> samples,
                                              const std::vector<RelevanceHypothesis>& hypotheses,
                                              const ObservableSet& pool, const DensityMatrix& sigma) {
    if (hypotheses.empty()) {
        throw std::invalid_argument("rank_hypotheses: need at least one hypothesis");
    }
    std::vector<RankedHypothesis> ranked(hypotheses.size());
    parallel_for(hypotheses.size(), [&](std::size_t h) {
        ranked[h].hypothesis = hypotheses[h];
        ranked[h].score = score_hypothesis(samples, hypotheses[h], pool, sigma);
    });

    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedHypothesis& a, const RankedHypothesis& b) {
        if (a.score.total != b.score.total) return a.score.total > b.score.total;
        return a.hypothesis.label < b.hypothesis.label;
    });

    const double best = ranked.front().score.total;
    std::vector<double> relative(ranked.size(), 0.0);
    for (std::size_t h = 0; h < ranked.size(); ++h) {
        relative[h] = std::exp(ranked[h].score.total - best);
    }
    const double total = kahan_sum(relative);
    for (std::size_t h = 0; h < ranked.size(); ++h) {
        ranked[h].posterior_weight = relative[h] / total;
    }
    return ranked;
}

std::vector<RelevanceHypothesis> enumerate_hypotheses(const ObservableSet& pool, int max_size) {
    if (max_size < 0 || max_size > pool.size()) {
        throw std::invalid_argument("enumerate_hypotheses: max_size must lie in [0, pool size]");
    }
    std::vector<RelevanceHypothesis> out;
    std::vector<int> indices;
    for (int size = 0; size <= max_size; ++size) {
        indices.assign(static_cast<std::size_t>(size), 0);
        // lexicographic combinations of the given size
        for (int k = 0; k < size; ++k) indices[static_cast<std::size_t>(k)] = k;
        while (true) {
            if (size == 0) {
                out.push_back({"{}", {}});
                break;
            }
            out.push_back({subset_label(pool, indices), indices});
            int k = size - 1;
            while (k >= 0 && indices[static_cast<std::size_t>(k)] == pool.size() - size + k) --k;
            if (k < 0) break;
            ++indices[static_cast<std::size_t>(k)];
            for (int j = k + 1; j < size; ++j) {
                indices[static_cast<std::size_t>(j)] = indices[static_cast<std::size_t>(j - 1)] + 1;
            }
        }
    }
    return out;
}

}  // namespace gibbsfit
