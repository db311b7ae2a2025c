#include "higen/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace higen::dist {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_factorial(Weight n) { return std::lgamma(static_cast<double>(n) + 1.0); }

void check_params(const MultinomialParams& params) {
  if (params.probs.empty()) throw std::invalid_argument("multinomial needs dimension >= 1");
  if (params.total < 0) throw std::invalid_argument("negative total");
  double sum = 0.0;
  for (double p : params.probs) {
    if (p < -1e-12 || p > 1.0 + 1e-12) throw std::invalid_argument("probability outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
}

void check_counts(const std::vector<Weight>& w, const MultinomialParams& params) {
  if (w.size() != params.probs.size())
    throw std::invalid_argument("count vector dimension mismatch");
  Weight sum = 0;
  for (Weight x : w) {
    if (x < 0) throw std::invalid_argument("negative count");
    sum += x;
  }
  if (sum != params.total) throw std::invalid_argument("counts do not sum to total");
}

void check_grouping(const std::vector<std::vector<int>>& grouping, std::size_t dims) {
  std::vector<bool> seen(dims, false);
  std::size_t covered = 0;
  for (const auto& group : grouping) {
    for (int e : group) {
      if (e < 0 || static_cast<std::size_t>(e) >= dims || seen[static_cast<std::size_t>(e)])
        throw std::invalid_argument("grouping is not a partition");
      seen[static_cast<std::size_t>(e)] = true;
      ++covered;
    }
  }
  if (covered != dims) throw std::invalid_argument("grouping is not a partition");
}

}  // namespace

double multinomial_logpmf(const std::vector<Weight>& w, const MultinomialParams& params) {
  check_params(params);
  check_counts(w, params);
  double lp = log_factorial(params.total);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0) continue;
    if (params.probs[i] <= 0.0) return kNegInf;
    lp += static_cast<double>(w[i]) * std::log(params.probs[i]) - log_factorial(w[i]);
  }
  return lp;
}

double binomial_logpmf(Weight k, Weight n, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial probability outside [0,1]");
  if (k < 0 || k > n) throw std::invalid_argument("binomial count outside [0,n]");
  if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
  if (p == 1.0) return k == n ? 0.0 : kNegInf;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k) +
         static_cast<double>(k) * std::log(p) +
         static_cast<double>(n - k) * std::log1p(-p);
}

double stick_break_logpmf(const std::vector<Weight>& w, const MultinomialParams& params) {
  check_params(params);
  check_counts(w, params);
  double lp = 0.0;
  Weight remaining = params.total;
  double remaining_prob = 1.0;
  for (std::size_t e = 0; e < w.size(); ++e) {
    if (remaining_prob <= 0.0) {
      if (w[e] != 0) return kNegInf;
      continue;
    }
    const double frac = std::clamp(params.probs[e] / remaining_prob, 0.0, 1.0);
    lp += binomial_logpmf(w[e], remaining, frac);
    if (lp == kNegInf) return kNegInf;
    remaining -= w[e];
    remaining_prob -= params.probs[e];
  }
  return lp;
}

std::vector<FactorizedStep> factorize_grouped(const std::vector<Weight>& w,
                                              const MultinomialParams& params,
                                              const std::vector<std::vector<int>>& grouping) {
  check_params(params);
  check_counts(w, params);
  check_grouping(grouping, w.size());

  std::vector<FactorizedStep> steps;
  steps.reserve(grouping.size());
  Weight remaining = params.total;
  double remaining_prob = 1.0;
  for (const auto& group : grouping) {
    FactorizedStep step;
    step.remaining = remaining;
    double group_prob = 0.0;
    for (int e : group) {
      step.counts.push_back(w[static_cast<std::size_t>(e)]);
      step.group_sum += w[static_cast<std::size_t>(e)];
      group_prob += params.probs[static_cast<std::size_t>(e)];
    }
    step.eta = remaining_prob > 0.0 ? std::clamp(group_prob / remaining_prob, 0.0, 1.0) : 0.0;
    step.lambda.reserve(group.size());
    for (int e : group)
      step.lambda.push_back(group_prob > 0.0 ? params.probs[static_cast<std::size_t>(e)] / group_prob
                                             : 0.0);
    steps.push_back(std::move(step));
    remaining -= steps.back().group_sum;
    remaining_prob -= group_prob;
  }
  return steps;
}

double grouped_chain_logpmf(const std::vector<Weight>& w, const MultinomialParams& params,
                            const std::vector<std::vector<int>>& grouping) {
  double lp = 0.0;
  for (const FactorizedStep& step : factorize_grouped(w, params, grouping)) {
    if (step.group_sum > 0 && step.eta == 0.0) return kNegInf;
    lp += binomial_logpmf(step.group_sum, step.remaining, step.eta);
    if (step.group_sum > 0) {
      double norm = std::accumulate(step.lambda.begin(), step.lambda.end(), 0.0);
      if (norm <= 0.0) return kNegInf;
      MultinomialParams inner{step.group_sum, step.lambda};
      for (double& q : inner.probs) q /= norm;
      lp += multinomial_logpmf(step.counts, inner);
    }
    if (lp == kNegInf) return kNegInf;
  }
  return lp;
}

std::vector<Weight> sample_grouped_chain(const MultinomialParams& params,
                                         const std::vector<std::vector<int>>& grouping,
                                         Rng& rng) {
  check_params(params);
  check_grouping(grouping, params.probs.size());

  std::vector<Weight> out(params.probs.size(), 0);
  Weight remaining = params.total;
  double remaining_prob = 1.0;
  for (const auto& group : grouping) {
    double group_prob = 0.0;
    for (int e : group) group_prob += params.probs[static_cast<std::size_t>(e)];
    const double eta =
        remaining_prob > 0.0 ? std::clamp(group_prob / remaining_prob, 0.0, 1.0) : 0.0;
    const Weight v = sample_binomial(remaining, eta, rng);
    if (v > 0) {
      std::vector<double> lambda;
      lambda.reserve(group.size());
      for (int e : group) lambda.push_back(params.probs[static_cast<std::size_t>(e)]);
      for (Weight draw = 0; draw < v; ++draw)
        out[static_cast<std::size_t>(group[static_cast<std::size_t>(
            sample_categorical(lambda, rng))])] += 1;
    }
    remaining -= v;
    remaining_prob -= group_prob;
  }
  return out;
}

double mixture_logpmf(const std::vector<double>& component_logpmfs,
                      const std::vector<double>& log_beta) {
  if (component_logpmfs.size() != log_beta.size())
    throw std::invalid_argument("mixture dimension mismatch");
  double max_term = kNegInf;
  std::vector<double> terms(component_logpmfs.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    terms[k] = component_logpmfs[k] + log_beta[k];
    max_term = std::max(max_term, terms[k]);
  }
  if (max_term == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  return max_term + std::log(acc);
}

std::vector<std::vector<Weight>> enumerate_multinomial_support(int dims, Weight total) {
  if (dims < 1) throw std::invalid_argument("dims must be >= 1");
  double size = 1.0;  // C(total + dims - 1, dims - 1)
  for (int i = 1; i < dims; ++i)
    size *= static_cast<double>(total + i) / static_cast<double>(i);
  if (size > 1e6) throw std::invalid_argument("support too large to enumerate");

  std::vector<std::vector<Weight>> out;
  std::vector<Weight> current(static_cast<std::size_t>(dims), 0);
  auto recurse = [&](auto&& self, int pos, Weight left) -> void {
    if (pos == dims - 1) {
      current[static_cast<std::size_t>(pos)] = left;
      out.push_back(current);
      return;
    }
    for (Weight x = 0; x <= left; ++x) {
      current[static_cast<std::size_t>(pos)] = x;
      self(self, pos + 1, left - x);
    }
  };
  recurse(recurse, 0, total);
  return out;
}

Weight sample_binomial(Weight n, double p, Rng& rng) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial probability outside [0,1]");
  if (n < 0) throw std::invalid_argument("negative trial count");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (n <= 64) {
    const double u = rng.uniform();
    double pmf = std::pow(1.0 - p, static_cast<double>(n));
    double cdf = pmf;
    Weight k = 0;
    while (cdf <= u && k < n) {
      pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * p / (1.0 - p);
      cdf += pmf;
      ++k;
    }
    return k;
  }
  Weight k = 0;
  for (Weight i = 0; i < n; ++i)
    if (rng.bernoulli(p)) ++k;
  return k;
}

Weight sample_binomial_truncated(Weight n, double p, Weight lo, Weight hi, Rng& rng) {
  lo = std::max<Weight>(lo, 0);
  hi = std::min(hi, n);
  if (lo > hi) throw std::invalid_argument("empty truncation range");
  if (lo == hi) return lo;
  std::vector<double> logp;
  logp.reserve(static_cast<std::size_t>(hi - lo + 1));
  double max_lp = kNegInf;
  for (Weight k = lo; k <= hi; ++k) {
    logp.push_back(binomial_logpmf(k, n, p));
    max_lp = std::max(max_lp, logp.back());
  }
  if (max_lp == kNegInf) throw std::invalid_argument("truncated binomial has empty support");
  std::vector<double> probs(logp.size());
  for (std::size_t i = 0; i < logp.size(); ++i) probs[i] = std::exp(logp[i] - max_lp);
  return lo + sample_categorical(probs, rng);
}

int sample_categorical(const std::vector<double>& probs, Rng& rng) {
  double norm = 0.0;
  for (double p : probs) {
    if (p < 0.0 || !std::isfinite(p)) throw std::invalid_argument("bad categorical weight");
    norm += p;
  }
  if (norm <= 0.0) throw std::invalid_argument("categorical weights sum to zero");
  const double u = rng.uniform() * norm;
  double cdf = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cdf += probs[i];
    if (u < cdf) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

std::vector<Weight> sample_multinomial(Weight total, const std::vector<double>& probs,
                                       Rng& rng) {
  std::vector<Weight> out(probs.size(), 0);
  for (Weight i = 0; i < total; ++i)
    out[static_cast<std::size_t>(sample_categorical(probs, rng))] += 1;
  return out;
}

std::vector<Weight> sample_multinomial_binary(Weight total, const std::vector<double>& probs,
                                              Rng& rng) {
  if (total > static_cast<Weight>(probs.size()))
    throw std::invalid_argument("binary multinomial needs total <= dims");
  std::vector<double> remaining = probs;
  std::vector<Weight> out(probs.size(), 0);
  for (Weight i = 0; i < total; ++i) {
    const int pick = sample_categorical(remaining, rng);
    out[static_cast<std::size_t>(pick)] = 1;
    remaining[static_cast<std::size_t>(pick)] = 0.0;
  }
  return out;
}

}  // namespace higen::dist
