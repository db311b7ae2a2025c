#ifndef HIGEN_DISTRIBUTIONS_HPP
#define HIGEN_DISTRIBUTIONS_HPP

#include <vector>

#include "higen/graph.hpp"
#include "higen/rng.hpp"

namespace higen::dist {

/// Parameters of Mu(w | total, probs). probs must lie on the simplex to
/// within 1e-9.
struct MultinomialParams {
  Weight total = 0;
  std::vector<double> probs;
};

/// One step of the grouped binomial-multinomial chain: at the step there
/// were `remaining` units left, `group_sum` of them landed in this group,
/// split as `counts`. eta is the binomial allocation probability and lambda
/// the within-group multinomial row.
struct FactorizedStep {
  Weight remaining = 0;
  Weight group_sum = 0;
  std::vector<Weight> counts;
  double eta = 0.0;
  std::vector<double> lambda;
};

/// log Mu(w | total, probs) via log-gamma. Returns -inf for unsupported
/// outcomes (positive count on zero probability).
double multinomial_logpmf(const std::vector<Weight>& w, const MultinomialParams& params);

/// log Bi(k | n, p) with the 0*log(0) = 0 convention. Throws if p is outside
/// [0,1] or k outside [0,n].
double binomial_logpmf(Weight k, Weight n, double p);

/// Edge-by-edge stick-breaking factorization: sum_e Bi(w_e | rem_e, theta_e
/// / rem_prob_e). Equals multinomial_logpmf exactly (up to float error).
double stick_break_logpmf(const std::vector<Weight>& w, const MultinomialParams& params);

/// Grouped chain: per group, Bi(group total | remaining, eta) * Mu(split |
/// group total, lambda). `grouping` must partition {0..E-1}. Equals the
/// ungrouped multinomial log-pmf.
double grouped_chain_logpmf(const std::vector<Weight>& w, const MultinomialParams& params,
                            const std::vector<std::vector<int>>& grouping);

/// The per-step decomposition behind grouped_chain_logpmf, for inspection.
std::vector<FactorizedStep> factorize_grouped(const std::vector<Weight>& w,
                                              const MultinomialParams& params,
                                              const std::vector<std::vector<int>>& grouping);

/// Samples the grouped chain: group totals from the binomial, splits from
/// categorical draws left to right. The concatenation is distributed as
/// Mu(total, probs).
std::vector<Weight> sample_grouped_chain(const MultinomialParams& params,
                                         const std::vector<std::vector<int>>& grouping,
                                         Rng& rng);

/// Stable log( sum_k exp(log_beta[k] + component_logpmfs[k]) ).
double mixture_logpmf(const std::vector<double>& component_logpmfs,
                      const std::vector<double>& log_beta);

/// All non-negative integer vectors of length dims summing to total, in
/// lexicographic order. Guarded to C(total+dims-1, dims-1) <= 1e6.
std::vector<std::vector<Weight>> enumerate_multinomial_support(int dims, Weight total);

/// Binomial draw: CDF inversion for n <= 64, a Bernoulli sequence otherwise.
Weight sample_binomial(Weight n, double p, Rng& rng);

/// Binomial conditioned on lo <= k <= hi, sampled by inversion on the
/// renormalized pmf.
Weight sample_binomial_truncated(Weight n, double p, Weight lo, Weight hi, Rng& rng);

/// One categorical draw by CDF inversion; probs need not be normalized.
int sample_categorical(const std::vector<double>& probs, Rng& rng);

/// Mu(total, probs) sampled as `total` categorical draws.
std::vector<Weight> sample_multinomial(Weight total, const std::vector<double>& probs,
                                       Rng& rng);

/// Multinomial conditioned on all entries being 0/1: `total` draws without
/// replacement proportional to probs. Requires total <= dims.
std::vector<Weight> sample_multinomial_binary(Weight total, const std::vector<double>& probs,
                                              Rng& rng);

}  // namespace higen::dist

#endif  // HIGEN_DISTRIBUTIONS_HPP
