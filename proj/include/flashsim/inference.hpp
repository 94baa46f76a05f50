#ifndef FLASHSIM_INFERENCE_HPP
#define FLASHSIM_INFERENCE_HPP

#include <vector>

#include "flashsim/qalg.hpp"

namespace flashsim {

// Observation z = A + B with B ~ Normal(0, sigma): a Hermitian generator A
// and Gaussian noise width, with the eigensystem cached.  Eigenvalues closer
// than 1e-9 * spread are merged into one support point.
class NoisyObservationModel {
public:
    NoisyObservationModel(LinearOp generator, double sigma);

    const LinearOp& generator() const { return generator_; }
    double sigma() const { return sigma_; }
    const std::vector<double>& support() const { return support_; }

    // amplitudes in the generator eigenbasis
    Vector to_eigenbasis(const Vector& amplitudes) const;
    // support index for each eigenvector
    const std::vector<std::size_t>& merge_map() const { return merge_map_; }

private:
    LinearOp generator_;
    double sigma_;
    RealVector eigenvalues_;
    Matrix eigenvectors_;
    bool diagonal_ = false;
    std::vector<double> support_;
    std::vector<std::size_t> merge_map_;
};

// Discrete distribution over merged generator eigenvalues.
struct EigenPosterior {
    std::vector<double> support;
    std::vector<double> probabilities;

    std::size_t size() const { return support.size(); }
};

// Born weights |<A|psi>|^2 / <psi|psi> with degeneracies merged
EigenPosterior prior_from_state(const QuantumState& state, const NoisyObservationModel& obs);

// P(A|z) propto P(A) exp(-(A - z)^2 / (2 sigma^2)); log-space when exponents
// would underflow
EigenPosterior bayes_posterior(const EigenPosterior& prior, double z, double sigma);

// Born weights of J(z)|psi> for the Gaussian jump of width sigma about the
// generator; must agree with the Bayes route to 1e-12 total variation
EigenPosterior collapse_posterior(const QuantumState& state, const NoisyObservationModel& obs,
                                  double z);

// sum_A P(A) Normal(z; A, sigma)
double marginal_density(const QuantumState& state, const NoisyObservationModel& obs, double z);

// 0.5 * sum |p_i - q_i| over a shared support
double total_variation(const EigenPosterior& a, const EigenPosterior& b);

}  // namespace flashsim

#endif
