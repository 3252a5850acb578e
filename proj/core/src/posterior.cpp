#include "credo/posterior.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "credo/errors.hpp"
#include "credo/stats.hpp"

namespace credo {

void validate_levels(const Levels& levels) {
    if (!(levels.alpha > 0.0 && levels.alpha < 1.0)) {
        throw Error("levels: alpha must lie strictly inside (0,1)");
    }
    if (!(levels.alpha0 > 0.0 && levels.alpha0 < 1.0)) {
        throw Error("levels: alpha0 must lie strictly inside (0,1)");
    }
}

namespace {

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& features) {
    Eigen::MatrixXd z(features.rows(), features.cols() + 1);
    z.col(0).setOnes();
    z.rightCols(features.cols()) = features;
    return z;
}

Eigen::VectorXd design_row(const Eigen::VectorXd& x) {
    Eigen::VectorXd z(x.size() + 1);
    z(0) = 1.0;
    z.tail(x.size()) = x;
    return z;
}

}  // namespace

// Draws (beta, sigma) pairs from the NIG posterior; pure in (params, seed, B).
void redraw_conjugate(ConjugateBlr& blr, int draw_count, std::uint64_t seed) {
    const auto p = blr.post_mean.size();
    const Eigen::LLT<Eigen::MatrixXd> llt(blr.post_precision);
    if (llt.info() != Eigen::Success) {
        throw Error("conjugate-blr: posterior precision is not positive definite");
    }
    // beta = m_n + sigma * solve(L', z) has covariance sigma^2 * Lambda_n^{-1}.
    const Eigen::MatrixXd lt = llt.matrixU();

    blr.beta_draws.resize(draw_count, p);
    blr.sigma_draws.resize(draw_count);
    Rng rng(seed);
    Eigen::VectorXd z(p);
    for (int b = 0; b < draw_count; ++b) {
        const double sigma2 = rng.inverse_gamma(blr.post_shape, blr.post_scale);
        const double sigma = std::sqrt(sigma2);
        for (Eigen::Index j = 0; j < p; ++j) z(j) = rng.normal();
        blr.beta_draws.row(b) =
            (blr.post_mean + sigma * lt.triangularView<Eigen::Upper>().solve(z)).transpose();
        blr.sigma_draws(b) = sigma;
    }
}

PosteriorModel fit_conjugate_blr(const Dataset& train, const BlrPrior& prior,
                                 int draw_count, std::uint64_t seed) {
    validate_dataset(train);
    const auto n = train.rows();
    const auto d = train.dim();
    if (n <= d) throw Error("conjugate-blr: insufficient rows (need n_train > d)");
    if (!(prior.precision > 0.0)) throw Error("conjugate-blr: prior precision must be positive");
    if (!(prior.ig_shape > 0.0 && prior.ig_scale > 0.0)) {
        throw Error("conjugate-blr: inverse-gamma prior parameters must be positive");
    }
    if (draw_count < 2) throw Error("conjugate-blr: draw count must be at least 2");

    const auto p = d + 1;
    Eigen::VectorXd prior_mean = prior.mean;
    if (prior_mean.size() == 0) prior_mean = Eigen::VectorXd::Zero(p);
    if (prior_mean.size() != p) {
        throw Error("conjugate-blr: prior mean must have length d+1");
    }

    const Eigen::MatrixXd z = design_matrix(train.features);
    const Eigen::MatrixXd prior_precision =
        prior.precision * Eigen::MatrixXd::Identity(p, p);

    ConjugateBlr blr;
    blr.post_precision = prior_precision + z.transpose() * z;
    const Eigen::LLT<Eigen::MatrixXd> llt(blr.post_precision);
    if (llt.info() != Eigen::Success) {
        throw Error("conjugate-blr: singular design after regularization");
    }
    blr.post_mean = llt.solve(prior_precision * prior_mean + z.transpose() * train.targets);
    blr.post_shape = prior.ig_shape + 0.5 * static_cast<double>(n);
    blr.post_scale = prior.ig_scale +
                     0.5 * (train.targets.squaredNorm() +
                            prior_mean.dot(prior_precision * prior_mean) -
                            blr.post_mean.dot(blr.post_precision * blr.post_mean));
    // Numerical floor: b_n is positive in exact arithmetic.
    blr.post_scale = std::max(blr.post_scale, 1e-12);

    redraw_conjugate(blr, draw_count, seed);

    PosteriorModel model;
    model.params = std::move(blr);
    model.draw_count = draw_count;
    model.dim = static_cast<int>(d);
    model.seed = seed;
    return model;
}

Eigen::VectorXd fit_linear_pinball(const Eigen::MatrixXd& features,
                                   const Eigen::VectorXd& targets, double level,
                                   const EnsembleFitConfig& config) {
    if (!(level > 0.0 && level < 1.0)) throw Error("pinball: level outside (0,1)");
    if (config.epochs < 1) throw Error("pinball: epochs must be >= 1");
    const auto n = features.rows();
    const auto p = features.cols() + 1;
    const Eigen::MatrixXd z = design_matrix(features);

    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    {
        std::vector<double> y(targets.data(), targets.data() + n);
        w(0) = linear_quantile(y, level);
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const Eigen::VectorXd pred = z * w;
        // d/dpred pinball(y - pred) = 1{y < pred} - level
        Eigen::VectorXd g(n);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = targets(i) - pred(i);
            g(i) = (r < 0.0 ? 1.0 : 0.0) - level;
            loss += r * (level - (r < 0.0 ? 1.0 : 0.0));
        }
        if (!std::isfinite(loss)) throw Error("pinball: NaN loss during fit");
        w -= config.learning_rate * inv_n * (z.transpose() * g);
    }
    return w;
}

PosteriorModel fit_bootstrap_quantile_ensemble(const Dataset& train, int draw_count,
                                               const Levels& levels,
                                               const EnsembleFitConfig& config) {
    validate_dataset(train);
    validate_levels(levels);
    if (draw_count < 2) throw Error("bootstrap-ensemble: B must be at least 2");

    const auto n = train.rows();
    BootstrapEnsemble ens;
    ens.alpha0 = levels.alpha0;
    ens.members.reserve(static_cast<std::size_t>(draw_count));

    Rng rng(config.seed);
    Eigen::MatrixXd rx(n, train.dim());
    Eigen::VectorXd ry(n);
    for (int b = 0; b < draw_count; ++b) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto j = static_cast<Eigen::Index>(
                rng.uniform_below(static_cast<std::uint64_t>(n)));
            rx.row(i) = train.features.row(j);
            ry(i) = train.targets(j);
        }
        QuantileMember member;
        member.lower_weights = fit_linear_pinball(rx, ry, levels.alpha0 / 2.0, config);
        member.upper_weights = fit_linear_pinball(rx, ry, 1.0 - levels.alpha0 / 2.0, config);
        ens.members.push_back(std::move(member));
    }

    PosteriorModel model;
    model.params = std::move(ens);
    model.draw_count = draw_count;
    model.dim = static_cast<int>(train.dim());
    model.seed = config.seed;
    return model;
}

EndpointDraws endpoint_draws(const PosteriorModel& model, const Eigen::VectorXd& x,
                             const Levels& levels) {
    validate_levels(levels);
    if (x.size() != model.dim) {
        throw Error("endpoint_draws: covariate dimension mismatch");
    }
    if (!x.allFinite()) throw Error("endpoint_draws: non-finite covariate");

    const int b_count = model.draw_count;
    EndpointDraws draws;
    draws.x = x;
    draws.q_lower.resize(b_count);
    draws.q_upper.resize(b_count);

    const Eigen::VectorXd z = design_row(x);
    if (model.is_conjugate()) {
        const auto& blr = model.conjugate();
        const double z_lo = normal_quantile(levels.alpha0 / 2.0);
        const double z_hi = normal_quantile(1.0 - levels.alpha0 / 2.0);
        const Eigen::VectorXd centers = blr.beta_draws * z;
        for (int b = 0; b < b_count; ++b) {
            draws.q_lower(b) = centers(b) + blr.sigma_draws(b) * z_lo;
            draws.q_upper(b) = centers(b) + blr.sigma_draws(b) * z_hi;
        }
    } else {
        const auto& ens = model.ensemble();
        if (std::abs(levels.alpha0 - ens.alpha0) > 1e-12) {
            throw Error("endpoint_draws: ensemble was fitted at alpha0 = " +
                        std::to_string(ens.alpha0) + ", cannot serve a different level");
        }
        for (int b = 0; b < b_count; ++b) {
            const auto& member = ens.members[static_cast<std::size_t>(b)];
            const double lo = member.lower_weights.dot(z);
            const double hi = member.upper_weights.dot(z);
            draws.q_lower(b) = std::min(lo, hi);
            draws.q_upper(b) = std::max(lo, hi);
        }
    }
    return draws;
}

MassEstimate predictive_interval_mass(const PosteriorModel& model,
                                      const Eigen::VectorXd& x, double lo, double hi,
                                      int n_draws, std::uint64_t seed) {
    if (!model.is_conjugate()) {
        throw Error("predictive_interval_mass: only defined for the conjugate backend");
    }
    if (n_draws < 2) throw Error("predictive_interval_mass: n_draws must be >= 2");
    if (!(lo <= hi)) throw Error("predictive_interval_mass: empty interval");

    const auto& blr = model.conjugate();
    const Eigen::VectorXd z = design_row(x);
    const Eigen::LLT<Eigen::MatrixXd> llt(blr.post_precision);
    const Eigen::MatrixXd lt = llt.matrixU();

    Rng rng(seed);
    Eigen::VectorXd noise(blr.post_mean.size());
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n_draws; ++i) {
        const double sigma2 = rng.inverse_gamma(blr.post_shape, blr.post_scale);
        const double sigma = std::sqrt(sigma2);
        for (Eigen::Index j = 0; j < noise.size(); ++j) noise(j) = rng.normal();
        const Eigen::VectorXd beta =
            blr.post_mean + sigma * lt.triangularView<Eigen::Upper>().solve(noise);
        const double mu = beta.dot(z);
        const double mass = normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma);
        sum += mass;
        sum_sq += mass * mass;
    }
    const double m = sum / n_draws;
    const double var = std::max(0.0, sum_sq / n_draws - m * m);
    return {m, std::sqrt(var / n_draws)};
}

}  // namespace credo
