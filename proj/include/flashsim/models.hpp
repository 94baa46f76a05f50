#ifndef FLASHSIM_MODELS_HPP
#define FLASHSIM_MODELS_HPP

#include <map>
#include <vector>

#include "flashsim/engine.hpp"
#include "flashsim/qalg.hpp"
#include "flashsim/rng.hpp"

namespace flashsim {

// --- GRW: distinguishable particles on a 1-D position grid -----------------

struct Grid1D {
    double x_min = -4.0;
    double x_max = 4.0;
    int n_sites = 32;

    // periodic convention: n_sites points on [x_min, x_max), wraparound hop
    double spacing() const { return (x_max - x_min) / n_sites; }
    double site_x(int i) const { return x_min + spacing() * i; }
};

// One-axis variant of the position-localization model: per-particle Gaussian
// jumps of strength alpha at Poisson times with rate lambda.  The 3-D jump
// factorizes over axes, (alpha/pi)^{3/4} e^{-alpha(x-z)^2/2} =
// prod_axis (alpha/pi)^{1/4} e^{-alpha(x_i-z_i)^2/2}; this is one factor.
struct GrwModel {
    int n_particles = 1;
    Grid1D grid;
    double alpha = 10.0;        // localization strength (length^-2)
    double lambda_rate = 1.0;   // collapse rate per particle (time^-1)
    double mass = 1.0;
    bool periodic = true;

    BasisTag basis() const { return BasisTag::uniform(n_particles, grid.n_sites); }
    double jump_sigma() const;  // width of the outcome noise, (2 alpha)^{-1/2}
    void validate() const;
};

// kinetic Hamiltonian, discrete Laplacian -(1/2m) d2/dx2 summed over particles
LinearOp grw_hamiltonian(const GrwModel& model);

// position operator of one particle on the product space
LinearOp grw_position_op(const GrwModel& model, int particle);

// (alpha/pi)^{1/4} exp(-alpha(x - z)^2 / 2) on the particle's factor
LinearOp grw_jump(const GrwModel& model, int particle, double z);

JumpFamily grw_family(const GrwModel& model, int particle);

CollapseModel grw_collapse_model(const GrwModel& model);

// Gaussian packet amplitudes exp(-(x - center)^2 / (2 w^2)) on the grid;
// w is the amplitude width parameter
QuantumState grw_gaussian_packet(const GrwModel& model, double center, double w);

// --- discrete CSL: lattice Fock space, smeared number density --------------

struct SmearingKernel {
    std::map<int, double> weights;  // site offset -> nonnegative weight

    static SmearingKernel delta();
    // exp(-offset^2 / (2 width^2)) normalized to unit sum, |offset| <= truncation
    static SmearingKernel discrete_gaussian(double width, int truncation);
    double weight_sum() const;
    void validate() const;
};

struct CslDiscreteModel {
    int n_sites = 3;
    int max_occupation = 3;     // Fock truncation per site
    double beta = 1.0;          // collapse strength
    double mu_density = 4.0;    // sprinkled events per unit spacetime volume
    SmearingKernel kernel = SmearingKernel::discrete_gaussian(2.0, 2);
    double hopping = 1.0;
    double onsite = 0.0;
    bool periodic = true;

    BasisTag basis() const { return BasisTag::uniform(n_sites, max_occupation + 1); }
    double gamma_derived() const { return mu_density * beta / 2.0; }
    double jump_sigma() const;
    void validate() const;
};

// truncated annihilation operator on one Fock register
Matrix ladder_lower(Index dim);
Matrix number_op(Index dim);

// smeared number density N(x) = sum_y kernel(x - y) n_y, periodic wrap
LinearOp csl_smeared_density(const CslDiscreteModel& model, int site);

// (beta/pi)^{1/4} exp(-beta(N(x) - z)^2 / 2)
LinearOp csl_jump(const CslDiscreteModel& model, int site, double z);

JumpFamily csl_family(const CslDiscreteModel& model, int site);

// boson hopping plus optional on-site term
LinearOp csl_hamiltonian(const CslDiscreteModel& model);

CollapseModel csl_collapse_model(const CslDiscreteModel& model);

// population threshold above which the truncation guard trips
inline constexpr double kFockLeakageTol = 1e-6;

// throws TruncationLeakageError when any site's top occupation level carries
// more than kFockLeakageTol of the population
std::function<void(const QuantumState&, double)> fock_leakage_monitor(
    const CslDiscreteModel& model);

// --- relativistic scalar-field site ----------------------------------------

// Single lattice site of a complex scalar field, truncated particle and
// antiparticle registers.  phi = (a + b^dagger) / sqrt(2 omega spacing), so
// the discreteness scale enters through the field normalization.
struct RelativisticFieldSite {
    int fock_dim = 8;           // truncation per register
    double beta = 0.05;         // collapse strength
    double lattice_spacing = 1.0;
    double omega = 1.0;         // mode frequency

    BasisTag basis() const { return BasisTag({fock_dim, fock_dim}); }
    double jump_sigma() const;
    void validate() const;

    LinearOp phi_dag_phi() const;
    LinearOp free_hamiltonian() const;  // omega (n_a + n_b)
};

// (beta/pi)^{1/4} exp(-beta(phi^dag phi - z)^2 / 2) on the truncated basis
LinearOp relativistic_jump(const RelativisticFieldSite& site, double z);

JumpFamily relativistic_family(const RelativisticFieldSite& site,
                               int n_grid_points = kDefaultGridPoints);

// --- event-time process -----------------------------------------------------

// exponential-gap sampling; strictly increasing times in (0, horizon]
std::vector<double> poisson_event_times(double rate, double horizon, Rng& rng);

}  // namespace flashsim

#endif
