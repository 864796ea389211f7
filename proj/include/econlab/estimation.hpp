// Econometrics: piecewise-linear other-regarding utility with logit choice,
// the group-identity variant, and binary logistic regression via IRLS.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "econlab/core.hpp"

namespace econlab::estimation {

// ---------------------------------------------------------------------------
// Utility and choice probability

// B's utility over the payoff pair: weight rho on A's payoff when B is ahead,
// sigma when B is behind, and u = pi_b at exact equality (both branches agree
// there anyway).
inline double cr_utility(double pi_a, double pi_b, double rho, double sigma) {
    if (pi_b > pi_a) return rho * pi_a + (1.0 - rho) * pi_b;
    if (pi_b < pi_a) return sigma * pi_a + (1.0 - sigma) * pi_b;
    return pi_b;
}

// log(1 + e^x) without overflow
inline double log1pexp(double x) {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// P(option 1) = e^{g u1} / (e^{g u1} + e^{g u2}), in log space.
inline double logit_choice_prob(double u1, double u2, double gamma) {
    return 1.0 / (1.0 + std::exp(-gamma * (u1 - u2)));
}

inline double log_choice_prob(double u1, double u2, double gamma, bool chose_1) {
    double z = gamma * (u1 - u2);
    return chose_1 ? -log1pexp(-z) : -log1pexp(z);
}

// ---------------------------------------------------------------------------
// Datasets

struct DatasetRow {
    std::string game_id;
    GroupCondition condition = GroupCondition::NoGroup;
    BinaryChoice choice = BinaryChoice::B1;
    Payoff payoff_b1;
    Payoff payoff_b2;
};

struct PreferenceDataset {
    std::vector<DatasetRow> rows;
    std::vector<double> weights;  // empty = all 1

    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
};

struct DegenerateDatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RankDeficientDesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Generic maximizer: BFGS with backtracking line search, analytic gradient.

struct ObjectiveValue {
    double value;             // function value (log-likelihood)
    Eigen::VectorXd gradient;
};

using Objective = std::function<ObjectiveValue(const Eigen::VectorXd&)>;

struct MaximizeResult {
    Eigen::VectorXd x;
    double value = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

inline MaximizeResult bfgs_maximize(const Objective& f, Eigen::VectorXd x0,
                                    double grad_tol = 1e-9, int max_iter = 500) {
    const auto n = x0.size();
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
    MaximizeResult out;
    auto cur = f(x0);
    Eigen::VectorXd x = std::move(x0);
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        if (cur.gradient.lpNorm<Eigen::Infinity>() < grad_tol) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd dir = h_inv * cur.gradient;
        if (dir.dot(cur.gradient) <= 0) {  // not an ascent direction; reset
            h_inv = Eigen::MatrixXd::Identity(n, n);
            dir = cur.gradient;
        }
        double step = 1.0;
        ObjectiveValue next{};
        Eigen::VectorXd xn;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = x + step * dir;
            next = f(xn);
            if (std::isfinite(next.value) &&
                next.value >= cur.value + 1e-4 * step * dir.dot(cur.gradient)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        Eigen::VectorXd s = xn - x;
        Eigen::VectorXd y = cur.gradient - next.gradient;  // gradient of -f changes sign
        double sy = s.dot(y);
        if (sy > 1e-12) {
            Eigen::VectorXd hy = h_inv * y;
            h_inv += ((sy + y.dot(hy)) / (sy * sy)) * (s * s.transpose()) -
                     (hy * s.transpose() + s * hy.transpose()) / sy;
        }
        x = std::move(xn);
        cur = std::move(next);
    }
    out.x = x;
    out.value = cur.value;
    return out;
}

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double h);

// Damped Newton ascent with the Hessian taken by differencing the analytic
// gradient. Handles the badly scaled CR likelihood (curvature in gamma is
// ~1e4 times the curvature in rho/sigma) where identity-seeded BFGS stalls.
inline MaximizeResult newton_maximize(const Objective& f, Eigen::VectorXd x0,
                                      double grad_tol = 1e-9, int max_iter = 200) {
    MaximizeResult out;
    Eigen::VectorXd x = std::move(x0);
    auto cur = f(x);
    const auto n = x.size();
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        if (!std::isfinite(cur.value)) break;
        if (cur.gradient.lpNorm<Eigen::Infinity>() < grad_tol) {
            out.converged = true;
            break;
        }
        Eigen::MatrixXd neg_h = -numeric_hessian(f, x, 1e-6);
        Eigen::VectorXd dir;
        double ridge = 0.0;
        for (int k = 0; k < 40; ++k) {
            Eigen::MatrixXd m = neg_h;
            m.diagonal().array() += ridge;
            dir = m.ldlt().solve(cur.gradient);
            if (dir.allFinite() && dir.dot(cur.gradient) > 0) break;
            ridge = ridge == 0.0 ? 1e-8 * std::max(1.0, neg_h.diagonal().cwiseAbs().maxCoeff())
                                 : ridge * 10.0;
            dir.setZero();
        }
        if (dir.dot(cur.gradient) <= 0) dir = cur.gradient;
        double step = 1.0;
        bool accepted = false;
        ObjectiveValue next{};
        Eigen::VectorXd xn(n);
        for (int ls = 0; ls < 60; ++ls) {
            xn = x + step * dir;
            next = f(xn);
            if (std::isfinite(next.value) &&
                next.value >= cur.value + 1e-4 * step * dir.dot(cur.gradient)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        x = std::move(xn);
        cur = std::move(next);
    }
    out.x = x;
    out.value = cur.value;
    return out;
}

// Hessian of f by central differences of the analytic gradient.
inline Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x,
                                       double h = 1e-5) {
    const auto n = x.size();
    Eigen::MatrixXd hess(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        hess.col(j) = (f(xp).gradient - f(xm).gradient) / (2 * h);
    }
    return 0.5 * (hess + hess.transpose());
}

// Standard errors from the inverse observed information (-H)^{-1}.
inline Eigen::VectorXd std_errors_from_hessian(const Eigen::MatrixXd& hess) {
    Eigen::MatrixXd info = -hess;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    Eigen::VectorXd se = Eigen::VectorXd::Constant(hess.rows(),
                                                   std::numeric_limits<double>::quiet_NaN());
    if (!lu.isInvertible()) return se;
    Eigen::MatrixXd cov = lu.inverse();
    for (Eigen::Index i = 0; i < se.size(); ++i)
        se[i] = cov(i, i) > 0 ? std::sqrt(cov(i, i)) : std::numeric_limits<double>::quiet_NaN();
    return se;
}

// ---------------------------------------------------------------------------
// Charness-Rabin MLE

struct CREstimate {
    double rho = 0, sigma = 0, gamma = 0;
    double loglik = 0;
    std::array<double, 3> std_errors{};  // rho, sigma, gamma
    bool converged = false;
    int iterations = 0;
};

namespace detail {

inline void check_both_choices(const PreferenceDataset& data) {
    if (data.rows.empty()) throw DegenerateDatasetError("empty dataset");
    bool b1 = false, b2 = false;
    for (const auto& r : data.rows)
        (r.choice == BinaryChoice::B1 ? b1 : b2) = true;
    if (!b1 || !b2)
        throw DegenerateDatasetError("all observations share one choice; gamma unidentified");
}

// Log-likelihood and gradient for theta = (rho, sigma, gamma) on a row subset.
// `use_row` lets the group model reuse this with per-condition parameters.
inline ObjectiveValue cr_loglik(const PreferenceDataset& data, const Eigen::VectorXd& theta) {
    const double rho = theta[0], sigma = theta[1], gamma = theta[2];
    double ll = 0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(3);
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& r = data.rows[i];
        const double w = data.weight(i);
        auto u_parts = [&](const Payoff& p, double& du_drho, double& du_dsigma) {
            du_drho = p.b > p.a ? (p.a - p.b) : 0.0;
            du_dsigma = p.b < p.a ? (p.a - p.b) : 0.0;
            return cr_utility(p.a, p.b, rho, sigma);
        };
        double d1r, d1s, d2r, d2s;
        const double u1 = u_parts(r.payoff_b1, d1r, d1s);
        const double u2 = u_parts(r.payoff_b2, d2r, d2s);
        const bool y = r.choice == BinaryChoice::B1;
        const double du = u1 - u2;
        const double p1 = logit_choice_prob(u1, u2, gamma);
        ll += w * log_choice_prob(u1, u2, gamma, y);
        const double resid = (y ? 1.0 : 0.0) - p1;  // dll/dz
        grad[0] += w * resid * gamma * (d1r - d2r);
        grad[1] += w * resid * gamma * (d1s - d2s);
        grad[2] += w * resid * du;
    }
    return {ll, std::move(grad)};
}

// The CR likelihood depends on a row only through (payoff_b1, payoff_b2,
// choice), so large datasets collapse to a handful of weighted cells.
inline PreferenceDataset aggregate_cells(const PreferenceDataset& data) {
    std::vector<std::size_t> cell_of;
    PreferenceDataset out;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& r = data.rows[i];
        std::size_t j = 0;
        for (; j < out.rows.size(); ++j) {
            const auto& c = out.rows[j];
            if (c.choice == r.choice && c.payoff_b1 == r.payoff_b1 &&
                c.payoff_b2 == r.payoff_b2)
                break;
        }
        if (j == out.rows.size()) {
            out.rows.push_back(r);
            out.weights.push_back(0.0);
        }
        out.weights[j] += data.weight(i);
    }
    return out;
}

inline double total_weight(const PreferenceDataset& data) {
    if (data.weights.empty()) return double(data.rows.size());
    double w = 0;
    for (double v : data.weights) w += v;
    return w;
}

inline std::vector<Eigen::VectorXd> cr_grid_starts() {
    std::vector<Eigen::VectorXd> starts;
    for (double r : {-1.0, -0.5, 0.0, 0.5, 1.0})
        for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0})
            for (double g : {-0.1, -0.01, 0.01, 0.1}) {
                Eigen::VectorXd v(3);
                v << r, s, g;
                starts.push_back(v);
            }
    return starts;
}

}  // namespace detail

inline CREstimate fit_cr(const PreferenceDataset& data) {
    detail::check_both_choices(data);
    const PreferenceDataset cells = detail::aggregate_cells(data);
    const double grad_tol = 1e-8 * std::max(1.0, detail::total_weight(cells));
    Objective f = [&](const Eigen::VectorXd& t) { return detail::cr_loglik(cells, t); };
    MaximizeResult best, best_converged;
    for (const auto& start : detail::cr_grid_starts()) {
        auto res = newton_maximize(f, start, grad_tol);
        if (res.converged && res.value > best_converged.value) best_converged = res;
        if (res.value > best.value) best = std::move(res);
    }
    // converged runs at the optimum can trail a stalled run by a few ulps
    if (best_converged.converged &&
        best_converged.value >= best.value - 1e-7 * (1.0 + std::abs(best.value)))
        best = std::move(best_converged);
    if (!best.converged) throw NonConvergenceError("fit_cr did not converge from any start");
    CREstimate est;
    est.rho = best.x[0];
    est.sigma = best.x[1];
    est.gamma = best.x[2];
    est.loglik = best.value;
    est.converged = best.converged;
    est.iterations = best.iterations;
    Eigen::VectorXd se = std_errors_from_hessian(numeric_hessian(f, best.x));
    for (int i = 0; i < 3; ++i) est.std_errors[i] = se[i];
    return est;
}

// ---------------------------------------------------------------------------
// Group-identity variant: separate (rho, sigma) per condition, shared gamma.

struct GroupCREstimate {
    double rho_out = 0, sigma_out = 0, rho_in = 0, sigma_in = 0, gamma = 0;
    double a = 0, b = 0;  // (in - out) / out, per Table-style derived parameters
    double loglik = 0;
    std::array<double, 5> std_errors{};  // rho_out, sigma_out, rho_in, sigma_in, gamma
    bool converged = false;
    int iterations = 0;
};

inline GroupCREstimate fit_cr_group(const PreferenceDataset& data) {
    PreferenceDataset in_rows, out_rows;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& r = data.rows[i];
        if (r.condition == GroupCondition::Ingroup) {
            in_rows.rows.push_back(r);
            if (!data.weights.empty()) in_rows.weights.push_back(data.weights[i]);
        } else if (r.condition == GroupCondition::Outgroup) {
            out_rows.rows.push_back(r);
            if (!data.weights.empty()) out_rows.weights.push_back(data.weights[i]);
        }
    }
    if (in_rows.rows.empty() || out_rows.rows.empty())
        throw DegenerateDatasetError("group fit needs both ingroup and outgroup rows");
    detail::check_both_choices(data);
    const PreferenceDataset in_cells = detail::aggregate_cells(in_rows);
    const PreferenceDataset out_cells = detail::aggregate_cells(out_rows);
    const double grad_tol =
        1e-8 * std::max(1.0, detail::total_weight(in_cells) + detail::total_weight(out_cells));

    // theta = (rho_out, sigma_out, rho_in, sigma_in, gamma)
    Objective f = [&](const Eigen::VectorXd& t) {
        Eigen::VectorXd t_out(3), t_in(3);
        t_out << t[0], t[1], t[4];
        t_in << t[2], t[3], t[4];
        auto vo = detail::cr_loglik(out_cells, t_out);
        auto vi = detail::cr_loglik(in_cells, t_in);
        Eigen::VectorXd grad(5);
        grad << vo.gradient[0], vo.gradient[1], vi.gradient[0], vi.gradient[1],
            vo.gradient[2] + vi.gradient[2];
        return ObjectiveValue{vo.value + vi.value, std::move(grad)};
    };
    MaximizeResult best, best_converged;
    for (double r0 : {0.0, 0.4})
        for (double s0 : {-0.3, 0.0})
            for (double g0 : {-0.1, -0.01, 0.01, 0.1}) {
                Eigen::VectorXd start(5);
                start << r0, s0, r0, s0, g0;
                auto res = newton_maximize(f, start, grad_tol);
                if (res.converged && res.value > best_converged.value) best_converged = res;
                if (res.value > best.value) best = std::move(res);
            }
    if (best_converged.converged &&
        best_converged.value >= best.value - 1e-7 * (1.0 + std::abs(best.value)))
        best = std::move(best_converged);
    if (!best.converged) throw NonConvergenceError("fit_cr_group did not converge");
    GroupCREstimate est;
    est.rho_out = best.x[0];
    est.sigma_out = best.x[1];
    est.rho_in = best.x[2];
    est.sigma_in = best.x[3];
    est.gamma = best.x[4];
    est.a = (est.rho_in - est.rho_out) / est.rho_out;
    est.b = (est.sigma_in - est.sigma_out) / est.sigma_out;
    est.loglik = best.value;
    est.converged = best.converged;
    est.iterations = best.iterations;
    Eigen::VectorXd se = std_errors_from_hessian(numeric_hessian(f, best.x));
    for (int i = 0; i < 5; ++i) est.std_errors[i] = se[i];
    return est;
}

// ---------------------------------------------------------------------------
// Binary logistic regression (IRLS)

struct LogitRegressionResult {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;          // NaN where separated
    std::vector<bool> separation_flags;  // per coefficient
    double loglik = 0;
    double aic = 0;
    int n_obs = 0;
    bool converged = false;
    int iterations = 0;
};

inline LogitRegressionResult fit_logit_regression(const Eigen::MatrixXd& design,
                                                  std::vector<std::string> names,
                                                  const Eigen::VectorXd& outcomes,
                                                  int max_iter = 100, double tol = 1e-10) {
    const Eigen::Index n = design.rows(), k = design.cols();
    if (n != outcomes.size()) throw std::invalid_argument("design/outcome size mismatch");
    if (n <= k) throw RankDeficientDesignError("n_obs must exceed number of coefficients");
    Eigen::FullPivLU<Eigen::MatrixXd> rank_check(design.transpose() * design);
    if (rank_check.rank() < k) throw RankDeficientDesignError("design matrix is rank-deficient");

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    LogitRegressionResult out;
    out.names = std::move(names);
    out.n_obs = int(n);
    out.separation_flags.assign(std::size_t(k), false);

    constexpr double kSeparationBound = 15.0;  // |beta|*max|x_j| beyond this means
                                               // the MLE is diverging along x_j
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        Eigen::VectorXd eta = design * beta;
        Eigen::VectorXd mu = eta.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
        Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
        Eigen::VectorXd grad = design.transpose() * (outcomes - mu);
        double ll = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            ll += outcomes[i] > 0.5 ? -log1pexp(-eta[i]) : -log1pexp(eta[i]);
        out.loglik = ll;
        // separation: the likelihood is numerically stationary while some linear
        // predictors have saturated, i.e. beta is diverging along a direction
        // that perfectly predicts part of the sample; must be checked before the
        // gradient criterion or it masquerades as convergence
        if (eta.cwiseAbs().maxCoeff() > 20.0 && grad.lpNorm<Eigen::Infinity>() < 1e-6) {
            for (Eigen::Index j = 0; j < k; ++j)
                if (std::abs(beta[j]) > kSeparationBound / design.col(j).cwiseAbs().maxCoeff())
                    out.separation_flags[std::size_t(j)] = true;
            break;
        }
        if (grad.lpNorm<Eigen::Infinity>() < tol) {
            out.converged = true;
            break;
        }
        Eigen::MatrixXd xtwx = design.transpose() * w.asDiagonal() * design;
        xtwx.diagonal().array() += 1e-12;  // guard against zero weights
        beta += xtwx.ldlt().solve(grad);
    }
    out.coefficients = beta;
    const bool separated =
        std::any_of(out.separation_flags.begin(), out.separation_flags.end(),
                    [](bool f) { return f; });
    out.std_errors = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
    if (!separated && out.converged) {
        Eigen::VectorXd eta = design * beta;
        Eigen::VectorXd mu = eta.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
        Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
        Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
        if (lu.isInvertible()) {
            Eigen::MatrixXd cov = lu.inverse();
            for (Eigen::Index j = 0; j < k; ++j)
                out.std_errors[j] = std::sqrt(std::max(cov(j, j), 0.0));
        }
    } else if (!separated && !out.converged) {
        throw NonConvergenceError("logistic regression did not converge");
    }
    out.aic = 2.0 * double(k) - 2.0 * out.loglik;
    return out;
}

// ---------------------------------------------------------------------------
// Reciprocity design builders

struct DesignBundle {
    Eigen::MatrixXd design;
    std::vector<std::string> names;
    Eigen::VectorXd outcomes;
};

namespace detail {

inline const GameSpec& find_game(const std::vector<GameSpec>& games, const std::string& id) {
    for (const auto& g : games)
        if (g.game_id == id) return g;
    throw std::invalid_argument("unknown game_id: " + id);
}

}  // namespace detail

// Positive reciprocity: outcome = B rewards A (picks the option that is better
// for A) in good-intention response games. Model 1 uses {cost, benefit, gap};
// model 2 adds the ingroup indicator; model 3 adds ingroup interactions.
inline DesignBundle build_positive_reciprocity_design(const PreferenceDataset& data,
                                                      const std::vector<GameSpec>& games,
                                                      int model = 2) {
    if (model < 1 || model > 3) throw std::invalid_argument("model must be 1..3");
    std::vector<std::array<double, 4>> covs;  // ingroup, cost, benefit, gap
    std::vector<double> ys;
    for (const auto& row : data.rows) {
        const auto& g = detail::find_game(games, row.game_id);
        if (g.kind != GameKind::ResponseGoodIntention) continue;  // no A action to reward
        if (model == 1 && row.condition != GroupCondition::NoGroup) continue;
        if (model > 1 && row.condition == GroupCondition::NoGroup) continue;
        const bool reward_is_b1 = g.payoff_b1.a > g.payoff_b2.a;
        const Payoff& rw = reward_is_b1 ? g.payoff_b1 : g.payoff_b2;
        const Payoff& alt = reward_is_b1 ? g.payoff_b2 : g.payoff_b1;
        const double cost = double(alt.b - rw.b);      // B's cost to reward A
        const double benefit = double(rw.a - alt.a);   // A's benefit from reciprocation
        const double gap = std::max(0.0, double(rw.a - rw.b));  // B's shortfall vs A
        const double ingroup = row.condition == GroupCondition::Ingroup ? 1.0 : 0.0;
        covs.push_back({ingroup, cost, benefit, gap});
        const bool rewarded = (row.choice == BinaryChoice::B1) == reward_is_b1;
        ys.push_back(rewarded ? 1.0 : 0.0);
    }
    DesignBundle out;
    const int k = model == 1 ? 4 : (model == 2 ? 5 : 8);
    out.design.resize(Eigen::Index(covs.size()), k);
    out.outcomes.resize(Eigen::Index(ys.size()));
    out.names = model == 1
                    ? std::vector<std::string>{"intercept", "cost_to_reward", "a_benefit",
                                               "payoff_gap"}
                    : std::vector<std::string>{"intercept", "ingroup", "cost_to_reward",
                                               "a_benefit", "payoff_gap"};
    if (model == 3) {
        out.names.push_back("ingroup:cost_to_reward");
        out.names.push_back("ingroup:a_benefit");
        out.names.push_back("ingroup:payoff_gap");
    }
    for (std::size_t i = 0; i < covs.size(); ++i) {
        const auto& c = covs[i];
        Eigen::Index r = Eigen::Index(i);
        out.outcomes[r] = ys[i];
        int col = 0;
        out.design(r, col++) = 1.0;
        if (model > 1) out.design(r, col++) = c[0];
        out.design(r, col++) = c[1];
        out.design(r, col++) = c[2];
        out.design(r, col++) = c[3];
        if (model == 3) {
            out.design(r, col++) = c[0] * c[1];
            out.design(r, col++) = c[0] * c[2];
            out.design(r, col++) = c[0] * c[3];
        }
    }
    return out;
}

// Negative reciprocity: outcome = B punishes A (picks the option that is worse
// for A) in misbehave response games.
inline DesignBundle build_negative_reciprocity_design(const PreferenceDataset& data,
                                                      const std::vector<GameSpec>& games,
                                                      int model = 2) {
    if (model < 1 || model > 3) throw std::invalid_argument("model must be 1..3");
    std::vector<std::array<double, 4>> covs;  // ingroup, cost, damage, ahead
    std::vector<double> ys;
    for (const auto& row : data.rows) {
        const auto& g = detail::find_game(games, row.game_id);
        if (g.kind != GameKind::ResponseMisbehave) continue;
        if (model == 1 && row.condition != GroupCondition::NoGroup) continue;
        if (model > 1 && row.condition == GroupCondition::NoGroup) continue;
        const bool punish_is_b1 = g.payoff_b1.a < g.payoff_b2.a;
        const Payoff& pu = punish_is_b1 ? g.payoff_b1 : g.payoff_b2;
        const Payoff& alt = punish_is_b1 ? g.payoff_b2 : g.payoff_b1;
        const double cost = double(alt.b - pu.b);     // B's cost to punish A
        const double damage = double(alt.a - pu.a);   // A-payoff reduction
        const double ahead = std::max(0.0, double(pu.b - pu.a));  // B ahead of A
        const double ingroup = row.condition == GroupCondition::Ingroup ? 1.0 : 0.0;
        covs.push_back({ingroup, cost, damage, ahead});
        const bool punished = (row.choice == BinaryChoice::B1) == punish_is_b1;
        ys.push_back(punished ? 1.0 : 0.0);
    }
    DesignBundle out;
    const int k = model == 1 ? 4 : (model == 2 ? 5 : 8);
    out.design.resize(Eigen::Index(covs.size()), k);
    out.outcomes.resize(Eigen::Index(ys.size()));
    out.names = model == 1
                    ? std::vector<std::string>{"intercept", "cost_to_punish", "damage_to_a",
                                               "payoff_ahead"}
                    : std::vector<std::string>{"intercept", "ingroup", "cost_to_punish",
                                               "damage_to_a", "payoff_ahead"};
    if (model == 3) {
        out.names.push_back("ingroup:cost_to_punish");
        out.names.push_back("ingroup:damage_to_a");
        out.names.push_back("ingroup:payoff_ahead");
    }
    for (std::size_t i = 0; i < covs.size(); ++i) {
        const auto& c = covs[i];
        Eigen::Index r = Eigen::Index(i);
        out.outcomes[r] = ys[i];
        int col = 0;
        out.design(r, col++) = 1.0;
        if (model > 1) out.design(r, col++) = c[0];
        out.design(r, col++) = c[1];
        out.design(r, col++) = c[2];
        out.design(r, col++) = c[3];
        if (model == 3) {
            out.design(r, col++) = c[0] * c[1];
            out.design(r, col++) = c[0] * c[2];
            out.design(r, col++) = c[0] * c[3];
        }
    }
    return out;
}

}  // namespace econlab::estimation
