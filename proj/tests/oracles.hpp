// Reference implementations used only by tests. Each solves the same problem
// as some production routine through a different route, so agreement is
// evidence, not tautology.
#pragma once

#include <span>
#include <vector>

#include "abm/objective.hpp"

namespace oracle {

// Exact minimizer of (1/2)||u - v||^2 + a*TV(u) + b*||u||_2 by brute force:
// enumerate every tie/sign pattern of the TV edges (3^(len-1) patterns),
// solve each pattern-restricted smooth problem with Newton, evaluate the true
// objective at every candidate and keep the best. The pattern of the true
// optimum is among the candidates and its restricted solve reproduces the
// optimum exactly, so the result is accurate to Newton precision. Practical
// for len <= 8.
std::vector<double> prox_composite(std::span<const double> v, double a, double b);

// Same objective value at an arbitrary point.
double composite_objective(std::span<const double> u, std::span<const double> v,
                           double a, double b);

// Nested golden-section search for len == 2 instances; cross-checks the
// pattern oracle with arithmetic that shares nothing with it.
std::vector<double> prox_composite_golden2(std::span<const double> v, double a, double b);

// Unpenalized logistic deviance minimum by damped Newton on the one-hot
// design (Eigen linear algebra). Returns the mean nll at the optimum.
double logistic_optimum_nll(const abm::EncodedDesign& design, std::span<const double> target);

// Central finite differences of the mean nll, h on each coordinate.
abm::Coefficients fd_gradient(const abm::EncodedDesign& design, std::span<const double> target,
                              const abm::Coefficients& beta, double h);

// O(n^2) pairwise AUC with half credit for ties.
double pairwise_auc(std::span<const double> scores, std::span<const double> target);

// Nearest-rank quantile of an unsorted sample: the ceil(n*k/m)-th order
// statistic, straight from the definition. Integer arguments keep the rank
// arithmetic exact.
double nearest_rank_quantile(std::vector<double> values, std::size_t k, std::size_t m);

// Largest violation of the subgradient optimality conditions of
// nll + penalty at beta. Exact zero groups are certified by minimizing
// ||grad_j + lambda1 * D^T s||_2 over the box |s| <= 1 (projected gradient)
// and comparing against lambda2 * w_j; nonzero groups by telescoping the
// per-edge dual variables. A point is optimal iff the result is ~0.
double kkt_violation(const abm::EncodedDesign& design, std::span<const double> target,
                     const abm::Coefficients& beta, const abm::PenaltyParams& params,
                     double tie_tol = 1e-9);

}  // namespace oracle
