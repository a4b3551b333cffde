#include "qspec/optim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qspec::optim {

namespace {

std::string format_params(std::span<const double> p) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) os << ", ";
        os << p[i];
    }
    os << "]";
    return os.str();
}

// Weighted residuals r_i = (y_i - f(p, x_i)) / sigma_i.
Eigen::VectorXd residuals(const CurveModel& model, std::span<const double> p,
                          std::span<const double> x, std::span<const double> y,
                          std::span<const double> w_inv_sigma) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = model(p, x[i]);
        if (!std::isfinite(f)) {
            std::ostringstream os;
            os << "model returned non-finite value " << f << " at x=" << x[i]
               << " with parameters " << format_params(p);
            throw FitError(os.str());
        }
        double ri = y[i] - f;
        if (!w_inv_sigma.empty()) ri *= w_inv_sigma[i];
        r[static_cast<Eigen::Index>(i)] = ri;
    }
    return r;
}

} // namespace

std::size_t FitResult::index(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw std::out_of_range("FitResult: no parameter named '" + std::string(name) + "'");
}

Eigen::MatrixXd numeric_jacobian(const VectorModel& fn, std::span<const double> params,
                                 double rel_step, std::span<const double> lower,
                                 std::span<const double> upper) {
    if (!(rel_step > 0.0)) throw FitError("numeric_jacobian: rel_step must be > 0");
    const std::size_t n = params.size();
    std::vector<double> p(params.begin(), params.end());

    const std::vector<double> f0 = fn(p);
    for (std::size_t i = 0; i < f0.size(); ++i)
        if (!std::isfinite(f0[i]))
            throw FitError("numeric_jacobian: model non-finite at base point " + format_params(p));

    Eigen::MatrixXd jac(static_cast<Eigen::Index>(f0.size()), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        const double pj = p[j];
        const double h = std::max(rel_step * std::abs(pj), rel_step);
        double hi = pj + h;
        double lo = pj - h;
        if (!upper.empty()) hi = std::min(hi, upper[j]);
        if (!lower.empty()) lo = std::max(lo, lower[j]);
        const double span = hi - lo;
        if (span <= 0.0) {
            jac.col(static_cast<Eigen::Index>(j)).setZero();
            continue;
        }
        p[j] = hi;
        const std::vector<double> fp = fn(p);
        p[j] = lo;
        const std::vector<double> fm = fn(p);
        p[j] = pj;
        for (std::size_t i = 0; i < f0.size(); ++i) {
            const double d = (fp[i] - fm[i]) / span;
            if (!std::isfinite(d)) {
                std::ostringstream os;
                os << "numeric_jacobian: non-finite derivative for parameter " << j
                   << " at " << format_params(p);
                throw FitError(os.str());
            }
            jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
        }
    }
    return jac;
}

FitResult fit_least_squares(const CurveModel& model, const std::vector<ParamSpec>& specs,
                            std::span<const double> x, std::span<const double> y,
                            std::span<const double> y_sigma, const FitOptions& opt) {
    const std::size_t n_par = specs.size();
    const std::size_t m = x.size();
    if (y.size() != m) throw FitError("fit_least_squares: x and y length mismatch");
    if (!y_sigma.empty()) {
        if (y_sigma.size() != m) throw FitError("fit_least_squares: y_sigma length mismatch");
        for (double s : y_sigma)
            if (!(s > 0.0)) throw FitError("fit_least_squares: y_sigma entries must be > 0");
    }

    std::vector<std::size_t> free_idx;
    for (std::size_t j = 0; j < n_par; ++j) {
        const auto& s = specs[j];
        if (!(s.lower <= s.initial && s.initial <= s.upper))
            throw FitError("fit_least_squares: initial value of '" + s.name + "' outside bounds");
        if (!s.frozen) free_idx.push_back(j);
    }
    const std::size_t n_free = free_idx.size();
    if (m < n_free) throw FitError("fit_least_squares: fewer points than free parameters");

    std::vector<double> inv_sigma;
    if (!y_sigma.empty()) {
        inv_sigma.resize(m);
        for (std::size_t i = 0; i < m; ++i) inv_sigma[i] = 1.0 / y_sigma[i];
    }

    FitResult out;
    out.names.reserve(n_par);
    for (const auto& s : specs) out.names.push_back(s.name);
    out.values.resize(n_par);
    for (std::size_t j = 0; j < n_par; ++j) out.values[j] = specs[j].initial;
    out.sigmas.assign(n_par, 0.0);
    out.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_par),
                                           static_cast<Eigen::Index>(n_par));
    out.n_points = m;

    Eigen::VectorXd r = residuals(model, out.values, x, y, inv_sigma);
    double cost = r.squaredNorm();

    if (n_free == 0) {
        out.converged = true;
        out.chi2_reduced = m > 0 ? cost / static_cast<double>(m) : 0.0;
        return out;
    }

    std::vector<double> lo(n_free), hi(n_free);
    for (std::size_t k = 0; k < n_free; ++k) {
        lo[k] = specs[free_idx[k]].lower;
        hi[k] = specs[free_idx[k]].upper;
    }

    // residual vector as a function of the free parameters only
    std::vector<double> full = out.values;
    const auto free_residuals = [&](std::span<const double> pf) {
        std::vector<double> p = full;
        for (std::size_t k = 0; k < n_free; ++k) p[free_idx[k]] = pf[k];
        Eigen::VectorXd rr = residuals(model, p, x, y, inv_sigma);
        return std::vector<double>(rr.data(), rr.data() + rr.size());
    };

    std::vector<double> pf(n_free);
    for (std::size_t k = 0; k < n_free; ++k) pf[k] = out.values[free_idx[k]];

    double damping = opt.initial_damping;
    Eigen::MatrixXd jac = numeric_jacobian(free_residuals, pf, opt.jacobian_rel_step, lo, hi);
    bool jac_fresh = true;

    for (int it = 0; it < opt.max_iterations; ++it) {
        if (!jac_fresh) {
            jac = numeric_jacobian(free_residuals, pf, opt.jacobian_rel_step, lo, hi);
            jac_fresh = true;
        }
        // residuals are y - f, so the descent direction solves (A + lambda D) dp = J^T r
        // with J the Jacobian of the residual vector: dp = -(...)^{-1} J^T r.
        const Eigen::VectorXd g = jac.transpose() * r;
        out.n_iterations = it;
        if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) {
            out.converged = true;
            break;
        }

        Eigen::MatrixXd a = jac.transpose() * jac;
        Eigen::VectorXd diag = a.diagonal();
        for (Eigen::Index k = 0; k < diag.size(); ++k)
            if (diag[k] <= 0.0) diag[k] = 1.0;

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd a_damped = a;
            a_damped.diagonal() += damping * diag;
            const Eigen::VectorXd step = a_damped.ldlt().solve(-g);

            std::vector<double> pf_try(n_free);
            for (std::size_t k = 0; k < n_free; ++k)
                pf_try[k] = std::clamp(pf[k] + step[static_cast<Eigen::Index>(k)], lo[k], hi[k]);

            std::vector<double> p = full;
            for (std::size_t k = 0; k < n_free; ++k) p[free_idx[k]] = pf_try[k];
            const Eigen::VectorXd r_try = residuals(model, p, x, y, inv_sigma);
            const double cost_try = r_try.squaredNorm();

            if (cost_try < cost) {
                const double drop = cost - cost_try;
                pf = pf_try;
                r = r_try;
                cost = cost_try;
                damping = std::max(damping * opt.damping_decrease, 1e-14);
                jac_fresh = false;
                accepted = true;
                if (drop < opt.cost_tolerance * std::max(cost, 1e-300)) {
                    out.converged = true;
                    out.n_iterations = it + 1;
                }
            } else {
                // a rejected step that changes the cost by less than the
                // tolerance means the surface is flat here
                if (cost_try - cost < opt.cost_tolerance * std::max(cost, 1e-300)) {
                    out.converged = true;
                    out.n_iterations = it + 1;
                    break;
                }
                damping *= opt.damping_increase;
                if (damping > 1e14) break; // stalled; give up on this iteration
            }
        }
        if (!accepted) break;        // no acceptable step found
        if (out.converged) break;
        out.n_iterations = it + 1;
    }

    for (std::size_t k = 0; k < n_free; ++k) out.values[free_idx[k]] = pf[k];

    // covariance from the undamped normal matrix at the final point
    jac = numeric_jacobian(free_residuals, pf, opt.jacobian_rel_step, lo, hi);
    Eigen::MatrixXd a = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
        out.singular = true;
        out.converged = false;
        for (std::size_t k = 0; k < n_free; ++k) out.sigmas[free_idx[k]] = kInf;
        out.chi2_reduced = cost / static_cast<double>(std::max<std::size_t>(m - n_free, 1));
        return out;
    }
    Eigen::MatrixXd cov = lu.inverse();
    const double dof = static_cast<double>(std::max<std::size_t>(m > n_free ? m - n_free : 0, 1));
    out.chi2_reduced = cost / dof;
    if (y_sigma.empty()) cov *= cost / dof; // scale by residual variance

    for (std::size_t a_i = 0; a_i < n_free; ++a_i) {
        for (std::size_t b_i = 0; b_i < n_free; ++b_i)
            out.covariance(static_cast<Eigen::Index>(free_idx[a_i]),
                           static_cast<Eigen::Index>(free_idx[b_i])) =
                cov(static_cast<Eigen::Index>(a_i), static_cast<Eigen::Index>(b_i));
        out.sigmas[free_idx[a_i]] =
            std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(a_i),
                                        static_cast<Eigen::Index>(a_i))));
    }
    return out;
}

} // namespace qspec::optim
