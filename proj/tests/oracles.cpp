#include "oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>

namespace oracle {
namespace {

// Minimize 0.5*t'Nt - c't + l't + b*sqrt(t'Nt) over t in R^q, N = diag(n).
// Strictly convex; Newton with halving line search. The sqrt term is smooth
// away from t = 0, and the t = 0 case is handled by the caller's explicit
// zero candidate.
Eigen::VectorXd solve_pattern(const Eigen::VectorXd& n, const Eigen::VectorXd& c,
                              const Eigen::VectorXd& l, double b) {
    const auto q = n.size();
    Eigen::VectorXd t = ((c - l).array() / n.array()).matrix();
    if (b == 0.0) return t;
    if (q == 1) {
        double rb = b * std::sqrt(n[0]);
        double z = c[0];
        double mag = std::max(std::abs(z) - rb, 0.0);
        t[0] = (z >= 0.0 ? mag : -mag) / n[0];
        return t;
    }
    auto value = [&](const Eigen::VectorXd& x) {
        double quad = 0.5 * x.dot(n.asDiagonal() * x);
        return quad - c.dot(x) + l.dot(x) + b * std::sqrt(x.dot(n.asDiagonal() * x));
    };
    if (t.norm() == 0.0) return t;
    double f = value(t);
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::VectorXd nt = n.asDiagonal() * t;
        double rho = std::sqrt(t.dot(nt));
        if (rho < 1e-150) break;
        Eigen::VectorXd grad = nt - c + l + (b / rho) * nt;
        if (grad.lpNorm<Eigen::Infinity>() <=
            1e-13 * (1.0 + c.lpNorm<Eigen::Infinity>() + b)) {
            break;
        }
        Eigen::MatrixXd h = ((1.0 + b / rho) * n).asDiagonal();
        h -= (b / (rho * rho * rho)) * (nt * nt.transpose());
        Eigen::VectorXd step = h.ldlt().solve(grad);
        double scale = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 80; ++ls) {
            Eigen::VectorXd cand = t - scale * step;
            double fc = value(cand);
            if (fc < f) {
                t = cand;
                f = fc;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!moved) break;
    }
    return t;
}

double golden_min(double lo, double hi, const std::function<double(double)>& f) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < 120 && (b - a) > 1e-13; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

double stable_nll_term(double z, double y) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
}

}  // namespace

double composite_objective(std::span<const double> u, std::span<const double> v,
                           double a, double b) {
    double quad = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) quad += (u[i] - v[i]) * (u[i] - v[i]);
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) tv += std::abs(u[i + 1] - u[i]);
    double sq = 0.0;
    for (double x : u) sq += x * x;
    return 0.5 * quad + a * tv + b * std::sqrt(sq);
}

std::vector<double> prox_composite(std::span<const double> v, double a, double b) {
    const std::size_t len = v.size();
    if (len == 0) return {};
    if (len > 8) throw std::invalid_argument("prox_composite: len > 8");

    std::vector<double> best(len, 0.0);
    double best_val = composite_objective(best, v, a, b);

    const std::size_t edges = len - 1;
    std::size_t patterns = 1;
    for (std::size_t i = 0; i < edges; ++i) patterns *= 3;

    std::vector<int> state(edges);
    std::vector<double> u(len);
    for (std::size_t code = 0; code < patterns; ++code) {
        std::size_t rem = code;
        for (std::size_t k = 0; k < edges; ++k) {
            state[k] = static_cast<int>(rem % 3);  // 0 tie, 1 up, 2 down
            rem /= 3;
        }
        // Segment sizes, sums, and boundary signs.
        std::vector<double> sizes, sums, sigmas;
        sizes.push_back(1.0);
        sums.push_back(v[0]);
        for (std::size_t k = 0; k < edges; ++k) {
            if (state[k] == 0) {
                sizes.back() += 1.0;
                sums.back() += v[k + 1];
            } else {
                sigmas.push_back(state[k] == 1 ? 1.0 : -1.0);
                sizes.push_back(1.0);
                sums.push_back(v[k + 1]);
            }
        }
        const auto q = static_cast<Eigen::Index>(sizes.size());
        Eigen::VectorXd n(q), c(q), l(q);
        for (Eigen::Index s = 0; s < q; ++s) {
            n[s] = sizes[static_cast<std::size_t>(s)];
            c[s] = sums[static_cast<std::size_t>(s)];
            double prev = s > 0 ? sigmas[static_cast<std::size_t>(s - 1)] : 0.0;
            double next = s + 1 < q ? sigmas[static_cast<std::size_t>(s)] : 0.0;
            l[s] = a * (prev - next);
        }
        Eigen::VectorXd t = solve_pattern(n, c, l, b);
        std::size_t pos = 0;
        for (Eigen::Index s = 0; s < q; ++s) {
            for (double i = 0; i < n[s]; i += 1.0) u[pos++] = t[s];
        }
        double val = composite_objective(u, v, a, b);
        if (val < best_val) {
            best_val = val;
            best.assign(u.begin(), u.end());
        }
    }
    return best;
}

std::vector<double> prox_composite_golden2(std::span<const double> v, double a, double b) {
    if (v.size() != 2) throw std::invalid_argument("golden2 wants len == 2");
    double m = std::max(std::abs(v[0]), std::abs(v[1])) + a + b + 1.0;
    auto inner = [&](double t1) {
        auto g = [&](double t2) {
            double u[2] = {t1, t2};
            return composite_objective(u, v, a, b);
        };
        return golden_min(-m, m, g);
    };
    auto phi = [&](double t1) {
        double t2 = inner(t1);
        double u[2] = {t1, t2};
        return composite_objective(u, v, a, b);
    };
    double t1 = golden_min(-m, m, phi);
    double t2 = inner(t1);
    return {t1, t2};
}

double logistic_optimum_nll(const abm::EncodedDesign& design, std::span<const double> target) {
    const auto n = static_cast<Eigen::Index>(design.rows);
    const auto groups = design.layout.groups();
    const auto p = static_cast<Eigen::Index>(design.layout.total() + 1);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        for (std::size_t j = 0; j < groups; ++j) {
            auto bin = design.bins[j][static_cast<std::size_t>(i)];
            x(i, 1 + static_cast<Eigen::Index>(design.layout.offsets[j]) + bin) = 1.0;
        }
    }
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = target[static_cast<std::size_t>(i)];

    auto nll_at = [&](const Eigen::VectorXd& beta) {
        Eigen::VectorXd z = x * beta;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) acc += stable_nll_term(z[i], y[i]);
        return acc / static_cast<double>(n);
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    double f = nll_at(beta);
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::VectorXd z = x * beta;
        Eigen::VectorXd prob(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double e = std::exp(-std::abs(z[i]));
            prob[i] = z[i] >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
            w[i] = prob[i] * (1.0 - prob[i]);
        }
        Eigen::VectorXd grad = x.transpose() * (prob - y) / static_cast<double>(n);
        if (grad.lpNorm<Eigen::Infinity>() < 1e-12) break;
        Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x / static_cast<double>(n);
        h.diagonal().array() += 1e-12;
        Eigen::VectorXd step = h.ldlt().solve(grad);
        double scale = 1.0;
        for (int ls = 0; ls < 60; ++ls) {
            Eigen::VectorXd cand = beta - scale * step;
            double fc = nll_at(cand);
            if (fc < f) {
                beta = cand;
                f = fc;
                break;
            }
            scale *= 0.5;
        }
    }
    return f;
}

abm::Coefficients fd_gradient(const abm::EncodedDesign& design, std::span<const double> target,
                              const abm::Coefficients& beta, double h) {
    abm::Coefficients out = beta;
    abm::Coefficients work = beta;

    auto probe = [&](double* slot) {
        double saved = *slot;
        *slot = saved + h;
        double fp = abm::nll(design, target, work);
        *slot = saved - h;
        double fm = abm::nll(design, target, work);
        *slot = saved;
        return (fp - fm) / (2.0 * h);
    };

    out.intercept = probe(&work.intercept);
    for (std::size_t i = 0; i < work.values.size(); ++i) {
        out.values[i] = probe(&work.values[i]);
    }
    return out;
}

double pairwise_auc(std::span<const double> scores, std::span<const double> target) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (target[i] != 1.0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (target[j] != 0.0) continue;
            ++pairs;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    if (pairs == 0) throw std::invalid_argument("pairwise_auc: single class");
    return wins / static_cast<double>(pairs);
}

double nearest_rank_quantile(std::vector<double> values, std::size_t k, std::size_t m) {
    std::sort(values.begin(), values.end());
    std::size_t rank = (values.size() * k + m - 1) / m;
    if (rank == 0 || rank > values.size()) throw std::invalid_argument("rank out of range");
    return values[rank - 1];
}

double kkt_violation(const abm::EncodedDesign& design, std::span<const double> target,
                     const abm::Coefficients& beta, const abm::PenaltyParams& params,
                     double tie_tol) {
    abm::Coefficients grad = abm::nll_gradient(design, target, beta);
    double worst = std::abs(grad.intercept);
    const double a = params.lambda1;

    for (std::size_t j = 0; j < beta.layout.groups(); ++j) {
        auto g = grad.group(j);
        auto bj = beta.group(j);
        const std::size_t m = bj.size();
        const double bw = params.lambda2 * params.group_weights[j];

        double inf = 0.0, sq = 0.0;
        for (double x : bj) {
            inf = std::max(inf, std::abs(x));
            sq += x * x;
        }

        if (inf == 0.0) {
            // Zero group: certify min over |s|<=1 of ||g + a D's||_2 <= bw.
            if (a == 0.0 || m == 1) {
                double norm = 0.0;
                for (double x : g) norm += x * x;
                worst = std::max(worst, std::max(0.0, std::sqrt(norm) - bw));
                continue;
            }
            std::vector<double> s(m - 1, 0.0);
            auto resid = [&](std::size_t i) {
                double prev = i > 0 ? s[i - 1] : 0.0;
                double next = i < m - 1 ? s[i] : 0.0;
                return g[i] + a * (prev - next);
            };
            for (int sweep = 0; sweep < 5000; ++sweep) {
                double moved = 0.0;
                for (std::size_t k = 0; k + 1 < m; ++k) {
                    double alpha = g[k] + a * (k > 0 ? s[k - 1] : 0.0);
                    double gamma = g[k + 1] - a * (k + 2 < m ? s[k + 1] : 0.0);
                    double cand = std::clamp((alpha - gamma) / (2.0 * a), -1.0, 1.0);
                    moved = std::max(moved, std::abs(cand - s[k]));
                    s[k] = cand;
                }
                if (moved < 1e-15) break;
            }
            double norm = 0.0;
            for (std::size_t i = 0; i < m; ++i) norm += resid(i) * resid(i);
            worst = std::max(worst, std::max(0.0, std::sqrt(norm) - bw));
            continue;
        }

        double gnorm = std::sqrt(sq);
        std::vector<double> base(m);
        for (std::size_t i = 0; i < m; ++i) base[i] = g[i] + bw * bj[i] / gnorm;
        if (a == 0.0) {
            for (double x : base) worst = std::max(worst, std::abs(x));
            continue;
        }
        // Telescope the dual chain; the last partial sum must close at zero,
        // interior values must sit in the box and match signs at strict edges.
        double run = 0.0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            run += base[k] / a;
            double diff = bj[k + 1] - bj[k];
            if (std::abs(diff) > tie_tol) {
                double sigma = diff > 0.0 ? 1.0 : -1.0;
                worst = std::max(worst, a * std::abs(run - sigma));
            } else {
                worst = std::max(worst, a * std::max(0.0, std::abs(run) - 1.0));
            }
        }
        run += base[m - 1] / a;
        worst = std::max(worst, a * std::abs(run));
    }
    return worst;
}

}  // namespace oracle
