#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "tart/data.hpp"
#include "tart/model.hpp"

namespace tart {

// Per-feature attribution of a scalar output value. For values produced by
// the conserving softmax rule the scores sum to the value; propagated
// arrival probabilities carry the factor (1 - 2^-d) instead (see
// propagate_arrival_relevance).
struct RelevanceVector {
    std::vector<double> scores;
    double value = 0.0;
};

// scores[k] = f_grad[k] * x[k]; exact for positively homogeneous functions.
RelevanceVector linear_relevance(std::span<const double> f_grad,
                                 std::span<const double> x, double value);

// z+ rule for a softmax output: positive weight*input contributions share
// the class probability proportionally. Bias terms receive no relevance.
// When every contribution is nonpositive the scores are all zero.
RelevanceVector softmax_relevance(const Matrix& weights, std::span<const double> x,
                                  std::span<const double> probs, int class_i);

// r(v1 + v2): elementwise sum.
RelevanceVector relevance_add(const RelevanceVector& a, const RelevanceVector& b);

// r(v1 * v2) = (v2 * r(v1) + v1 * r(v2)) / 2.
RelevanceVector relevance_mul(const RelevanceVector& a, const RelevanceVector& b);

// Relevance of each leaf's arrival probability, propagated layer by layer
// through the transition chain:
//   r(p_{d+1,j}) = 1/2 * sum_i [ p_{d,i} r(t_{d,ji}) + t_{d,ji} r(p_{d,i}) ]
// with r(p_0) = 0 (the root arrival is a constant). The halving makes the
// propagated score sum (1 - 2^-d) * p_{d,j} rather than p_{d,j}; no
// renormalization is applied. Requires single-layer decisions when depth > 0.
std::vector<RelevanceVector> propagate_arrival_relevance(const TartModel& m,
                                                         std::span<const double> x);

struct RelevanceReport {
    std::vector<RelevanceVector> class_relevance;  // one per class
    std::vector<RelevanceVector> leaf_arrival;     // one per leaf (empty in fallback)
    int chosen_leaf = 0;                           // argmax arrival probability
    bool fallback = false;                         // gradient-times-input used
};

// Exact relevance propagation for models with single-layer decisions and
// at-most-linear leaves; other structures throw unless allow_fallback is
// set, in which case gradient-times-input scores are returned and flagged.
RelevanceReport explain_prediction(const TartModel& m, std::span<const double> x,
                                   bool allow_fallback = false);

// d(prediction[class_i])/dx under the model's leaf mode (single mode
// differentiates the chosen leaf's classifier only).
std::vector<double> prediction_input_gradient(const TartModel& m,
                                              std::span<const double> x,
                                              int class_i);

struct ClassMeanRelevance {
    Matrix means;                  // class_count x feature_count
    std::vector<bool> class_seen;  // false marks an empty class (zero row)
};

// Row c: mean class-c relevance scores over all examples labeled c.
ClassMeanRelevance class_mean_relevance(const TartModel& m, const Dataset& data,
                                        bool allow_fallback = false);

// Writers for the CLI outputs. Scores are printed with 17 significant digits.
void write_relevance_rows(std::ostream& out,
                          const std::vector<RelevanceReport>& reports,
                          bool fallback);
void write_class_means(std::ostream& out, const ClassMeanRelevance& cmr);
// One row per example: argmax node at layer 1, argmax leaf, true label.
void write_leaf_table(std::ostream& out, const TartModel& m, const Dataset& data);

} // namespace tart
