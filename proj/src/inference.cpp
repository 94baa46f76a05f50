#include "flashsim/inference.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace flashsim {

namespace {

constexpr double kEigenResidualTol = 1e-10;
constexpr double kMergeTolPerSpread = 1e-9;
// below this exponent the direct Gaussian weight underflows; switch to the
// max-shifted (log-space) evaluation
constexpr double kLogSpaceThreshold = -700.0;

bool exactly_diagonal(const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) != Complex(0.0, 0.0)) return false;
    return true;
}

}  // namespace

NoisyObservationModel::NoisyObservationModel(LinearOp generator, double sigma)
    : generator_(std::move(generator)), sigma_(sigma) {
    if (sigma_ <= 0.0) throw ContractError("observation model: sigma must be positive");
    const double dev = hermiticity_deviation(generator_.entries);
    if (dev > kHermitianTol)
        throw ContractError("observation model: generator not Hermitian (deviation " +
                            std::to_string(dev) + ")");
    if (exactly_diagonal(generator_.entries)) {
        diagonal_ = true;
        eigenvalues_ = generator_.entries.diagonal().real();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(generator_.entries);
        if (es.info() != Eigen::Success)
            throw ContractError("observation model: eigendecomposition failed");
        eigenvalues_ = es.eigenvalues();
        eigenvectors_ = es.eigenvectors();
        for (Index k = 0; k < eigenvalues_.size(); ++k) {
            const double resid = (generator_.entries * eigenvectors_.col(k) -
                                  eigenvalues_(k) * eigenvectors_.col(k))
                                     .norm();
            if (resid > kEigenResidualTol)
                throw ContractError("observation model: eigenpair residual " +
                                    std::to_string(resid));
        }
    }
    // merge support points closer than 1e-9 * spread; Bayes updating is a
    // function of the eigenvalue, not the eigenvector label
    const double spread = eigenvalues_.maxCoeff() - eigenvalues_.minCoeff();
    const double tol = kMergeTolPerSpread * spread;
    merge_map_.resize(static_cast<std::size_t>(eigenvalues_.size()));
    std::vector<Index> sorted(static_cast<std::size_t>(eigenvalues_.size()));
    for (std::size_t k = 0; k < sorted.size(); ++k) sorted[k] = static_cast<Index>(k);
    std::sort(sorted.begin(), sorted.end(),
              [&](Index a, Index b) { return eigenvalues_(a) < eigenvalues_(b); });
    double group_start = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double v = eigenvalues_(sorted[k]);
        if (k == 0 || v - group_start > tol) {
            support_.push_back(v);
            group_start = v;
        }
        merge_map_[static_cast<std::size_t>(sorted[k])] = support_.size() - 1;
    }
}

Vector NoisyObservationModel::to_eigenbasis(const Vector& amplitudes) const {
    if (diagonal_) return amplitudes;
    return eigenvectors_.adjoint() * amplitudes;
}

EigenPosterior prior_from_state(const QuantumState& state, const NoisyObservationModel& obs) {
    if (state.basis != obs.generator().basis)
        throw SizeError("prior_from_state: basis mismatch");
    const double n2 = state.norm2();
    if (n2 == 0.0) throw DegenerateStateError("prior_from_state: zero-norm state");
    Vector c = obs.to_eigenbasis(state.amplitudes);
    EigenPosterior p;
    p.support = obs.support();
    p.probabilities.assign(p.support.size(), 0.0);
    for (Index k = 0; k < c.size(); ++k)
        p.probabilities[obs.merge_map()[static_cast<std::size_t>(k)]] += std::norm(c(k));
    for (double& w : p.probabilities) w /= n2;
    return p;
}

EigenPosterior bayes_posterior(const EigenPosterior& prior, double z, double sigma) {
    if (sigma <= 0.0) throw ContractError("bayes_posterior: sigma must be positive");
    EigenPosterior post;
    post.support = prior.support;
    post.probabilities.assign(prior.size(), 0.0);
    // likelihood exponents, shifted by the max when direct weights underflow
    double min_expo = 0.0;
    std::vector<double> expo(prior.size(), 0.0);
    for (std::size_t i = 0; i < prior.size(); ++i) {
        const double u = prior.support[i] - z;
        expo[i] = -u * u / (2.0 * sigma * sigma);
        if (prior.probabilities[i] > 0.0) min_expo = std::min(min_expo, expo[i]);
    }
    double shift = 0.0;
    if (min_expo < kLogSpaceThreshold) {
        shift = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < prior.size(); ++i)
            if (prior.probabilities[i] > 0.0)
                shift = std::max(shift, std::log(prior.probabilities[i]) + expo[i]);
        if (!std::isfinite(shift))
            throw UnderflowError("bayes_posterior: no support within reach of z");
        for (std::size_t i = 0; i < prior.size(); ++i)
            if (prior.probabilities[i] > 0.0)
                post.probabilities[i] =
                    std::exp(std::log(prior.probabilities[i]) + expo[i] - shift);
    } else {
        for (std::size_t i = 0; i < prior.size(); ++i)
            post.probabilities[i] = prior.probabilities[i] * std::exp(expo[i]);
    }
    double total = 0.0;
    for (double w : post.probabilities) total += w;
    if (total <= 0.0 || !std::isfinite(total))
        throw UnderflowError("bayes_posterior: posterior mass underflowed at z=" +
                             std::to_string(z));
    for (double& w : post.probabilities) w /= total;
    return post;
}

EigenPosterior collapse_posterior(const QuantumState& state, const NoisyObservationModel& obs,
                                  double z) {
    if (state.basis != obs.generator().basis)
        throw SizeError("collapse_posterior: basis mismatch");
    const double n2 = state.norm2();
    if (n2 == 0.0) throw DegenerateStateError("collapse_posterior: zero-norm state");
    Vector c = obs.to_eigenbasis(state.amplitudes);
    const double sigma = obs.sigma();
    // amplitude-level jump weights exp(-(A - z)^2 / (4 sigma^2)); a common
    // shift keeps extreme z from annihilating the state, and cancels in the
    // normalization
    double max_expo = -std::numeric_limits<double>::infinity();
    RealVector expo(c.size());
    for (Index k = 0; k < c.size(); ++k) {
        const double A = obs.support()[obs.merge_map()[static_cast<std::size_t>(k)]];
        const double u = A - z;
        expo(k) = -u * u / (4.0 * sigma * sigma);
        if (std::norm(c(k)) > 0.0) max_expo = std::max(max_expo, expo(k));
    }
    if (!std::isfinite(max_expo))
        throw DegenerateOutcomeError("collapse_posterior: state has no support");
    const double shift = (2.0 * expo.minCoeff() < kLogSpaceThreshold) ? max_expo : 0.0;
    EigenPosterior post;
    post.support = obs.support();
    post.probabilities.assign(post.support.size(), 0.0);
    for (Index k = 0; k < c.size(); ++k) {
        const Complex amp = c(k) * std::exp(expo(k) - shift);
        post.probabilities[obs.merge_map()[static_cast<std::size_t>(k)]] += std::norm(amp);
    }
    double total = 0.0;
    for (double w : post.probabilities) total += w;
    if (total <= 0.0 || !std::isfinite(total))
        throw DegenerateOutcomeError("collapse_posterior: jump annihilated the state at z=" +
                                     std::to_string(z));
    for (double& w : post.probabilities) w /= total;
    return post;
}

double marginal_density(const QuantumState& state, const NoisyObservationModel& obs, double z) {
    EigenPosterior prior = prior_from_state(state, obs);
    const double sigma = obs.sigma();
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    double density = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
        const double u = (prior.support[i] - z) / sigma;
        density += prior.probabilities[i] * norm * std::exp(-0.5 * u * u);
    }
    return density;
}

double total_variation(const EigenPosterior& a, const EigenPosterior& b) {
    if (a.size() != b.size()) throw SizeError("total_variation: support mismatch");
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        tv += std::abs(a.probabilities[i] - b.probabilities[i]);
    return 0.5 * tv;
}

}  // namespace flashsim
