#include "flashsim/models.hpp"

#include <cmath>

namespace flashsim {

// --- GRW ---------------------------------------------------------------

double GrwModel::jump_sigma() const { return 1.0 / std::sqrt(2.0 * alpha); }

void GrwModel::validate() const {
    if (n_particles < 1) throw ContractError("grw: need at least one particle");
    if (alpha <= 0.0) throw ContractError("grw: alpha must be positive");
    if (lambda_rate < 0.0) throw ContractError("grw: lambda must be nonnegative");
    if (mass <= 0.0) throw ContractError("grw: mass must be positive");
    if (grid.n_sites < 2) throw ContractError("grw: need at least two grid sites");
    if (grid.x_max <= grid.x_min) throw ContractError("grw: empty grid span");
    double dim = 1.0;
    for (int i = 0; i < n_particles; ++i) dim *= grid.n_sites;
    if (dim > static_cast<double>(kMaxDimension))
        throw SizeError("grw: total dimension exceeds cap");
}

LinearOp grw_hamiltonian(const GrwModel& model) {
    model.validate();
    const int n = model.grid.n_sites;
    const double h = model.grid.spacing();
    const double hop = 1.0 / (2.0 * model.mass * h * h);
    Matrix kin = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        kin(i, i) = 2.0 * hop;
        if (i + 1 < n) {
            kin(i, i + 1) = -hop;
            kin(i + 1, i) = -hop;
        }
    }
    if (model.periodic && n > 2) {
        kin(0, n - 1) = -hop;
        kin(n - 1, 0) = -hop;
    }
    const BasisTag basis = model.basis();
    Matrix total = Matrix::Zero(basis.total(), basis.total());
    for (int p = 0; p < model.n_particles; ++p)
        total += embed_at(kin, basis, static_cast<std::size_t>(p)).entries;
    return {std::move(total), basis};
}

LinearOp grw_position_op(const GrwModel& model, int particle) {
    model.validate();
    if (particle < 0 || particle >= model.n_particles)
        throw SizeError("grw: particle index out of range");
    const int n = model.grid.n_sites;
    Matrix x = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) x(i, i) = model.grid.site_x(i);
    return embed_at(x, model.basis(), static_cast<std::size_t>(particle));
}

JumpFamily grw_family(const GrwModel& model, int particle) {
    LinearOp pos = grw_position_op(model, particle);
    JumpFamily f = JumpFamily::gaussian_auto(pos, model.jump_sigma(),
                                             "particle" + std::to_string(particle));
    f.mark_z_as_position();
    return f;
}

LinearOp grw_jump(const GrwModel& model, int particle, double z) {
    if (z < model.grid.x_min || z > model.grid.x_max)
        throw ContractError("grw_jump: z outside the grid span");
    return grw_family(model, particle).jump_at(z);
}

CollapseModel grw_collapse_model(const GrwModel& model) {
    std::vector<JumpFamily> families;
    families.reserve(static_cast<std::size_t>(model.n_particles));
    for (int p = 0; p < model.n_particles; ++p) families.push_back(grw_family(model, p));
    return CollapseModel(grw_hamiltonian(model), std::move(families));
}

QuantumState grw_gaussian_packet(const GrwModel& model, double center, double w) {
    if (w <= 0.0) throw ContractError("packet width must be positive");
    const int n = model.grid.n_sites;
    Vector amp(n);
    for (int i = 0; i < n; ++i) {
        const double u = model.grid.site_x(i) - center;
        amp(i) = std::exp(-u * u / (2.0 * w * w));
    }
    return make_state(std::move(amp), BasisTag::single(n));
}

// --- discrete CSL --------------------------------------------------------

SmearingKernel SmearingKernel::delta() { return {{{0, 1.0}}}; }

SmearingKernel SmearingKernel::discrete_gaussian(double width, int truncation) {
    if (width <= 0.0 || truncation < 0) throw ContractError("kernel: bad parameters");
    SmearingKernel k;
    double sum = 0.0;
    for (int d = -truncation; d <= truncation; ++d)
        sum += std::exp(-0.5 * d * d / (width * width));
    for (int d = -truncation; d <= truncation; ++d)
        k.weights[d] = std::exp(-0.5 * d * d / (width * width)) / sum;
    return k;
}

double SmearingKernel::weight_sum() const {
    double s = 0.0;
    for (const auto& [off, w] : weights) s += w;
    return s;
}

void SmearingKernel::validate() const {
    if (weights.empty()) throw ContractError("kernel: empty");
    for (const auto& [off, w] : weights)
        if (w < 0.0 || !std::isfinite(w)) throw ContractError("kernel: bad weight");
}

double CslDiscreteModel::jump_sigma() const { return 1.0 / std::sqrt(2.0 * beta); }

void CslDiscreteModel::validate() const {
    if (n_sites < 1) throw ContractError("csl: need at least one site");
    if (max_occupation < 1) throw ContractError("csl: max_occupation must be >= 1");
    if (beta <= 0.0) throw ContractError("csl: beta must be positive");
    if (mu_density < 0.0) throw ContractError("csl: mu must be nonnegative");
    kernel.validate();
    for (const auto& [off, w] : kernel.weights)
        if (std::abs(off) >= n_sites && n_sites > 1)
            throw ContractError("csl: kernel support exceeds lattice");
    double dim = 1.0;
    for (int i = 0; i < n_sites; ++i) dim *= max_occupation + 1;
    if (dim > static_cast<double>(kMaxDimension))
        throw SizeError("csl: total dimension exceeds cap");
}

Matrix ladder_lower(Index dim) {
    Matrix a = Matrix::Zero(dim, dim);
    for (Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Matrix number_op(Index dim) {
    Matrix n = Matrix::Zero(dim, dim);
    for (Index k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

LinearOp csl_smeared_density(const CslDiscreteModel& model, int site) {
    model.validate();
    if (site < 0 || site >= model.n_sites) throw SizeError("csl: site index out of range");
    const BasisTag basis = model.basis();
    const Matrix n_local = number_op(model.max_occupation + 1);
    Matrix total = Matrix::Zero(basis.total(), basis.total());
    for (const auto& [offset, w] : model.kernel.weights) {
        int y = (site - offset) % model.n_sites;
        if (y < 0) y += model.n_sites;
        total += w * embed_at(n_local, basis, static_cast<std::size_t>(y)).entries;
    }
    return {std::move(total), basis};
}

JumpFamily csl_family(const CslDiscreteModel& model, int site) {
    JumpFamily f = JumpFamily::gaussian_auto(csl_smeared_density(model, site),
                                             model.jump_sigma(), "site" + std::to_string(site));
    f.set_site_position(static_cast<double>(site));
    return f;
}

LinearOp csl_jump(const CslDiscreteModel& model, int site, double z) {
    return csl_family(model, site).jump_at(z);
}

LinearOp csl_hamiltonian(const CslDiscreteModel& model) {
    model.validate();
    const BasisTag basis = model.basis();
    const Index q = model.max_occupation + 1;
    Matrix total = Matrix::Zero(basis.total(), basis.total());
    if (model.onsite != 0.0) {
        const Matrix n_local = number_op(q);
        for (int x = 0; x < model.n_sites; ++x)
            total += model.onsite * embed_at(n_local, basis, static_cast<std::size_t>(x)).entries;
    }
    if (model.hopping != 0.0 && model.n_sites > 1) {
        const Matrix a = ladder_lower(q);
        const int last = model.periodic ? model.n_sites : model.n_sites - 1;
        for (int x = 0; x < last; ++x) {
            const int y = (x + 1) % model.n_sites;
            if (y == x) continue;
            Matrix bx_dag = embed_at(a.adjoint(), basis, static_cast<std::size_t>(x)).entries;
            Matrix by = embed_at(a, basis, static_cast<std::size_t>(y)).entries;
            Matrix hop = bx_dag * by;
            total += -model.hopping * (hop + hop.adjoint());
        }
    }
    return {std::move(total), basis};
}

CollapseModel csl_collapse_model(const CslDiscreteModel& model) {
    std::vector<JumpFamily> families;
    families.reserve(static_cast<std::size_t>(model.n_sites));
    for (int x = 0; x < model.n_sites; ++x) families.push_back(csl_family(model, x));
    CollapseModel cm(csl_hamiltonian(model), std::move(families));
    cm.set_monitor(fock_leakage_monitor(model));
    return cm;
}

std::function<void(const QuantumState&, double)> fock_leakage_monitor(
    const CslDiscreteModel& model) {
    const int n_sites = model.n_sites;
    const int q = model.max_occupation + 1;
    return [n_sites, q](const QuantumState& state, double t) {
        const double n2 = state.norm2();
        if (n2 == 0.0) return;
        double top = 0.0;
        for (Index idx = 0; idx < state.dim(); ++idx) {
            Index rem = idx;
            bool at_top = false;
            for (int s = n_sites - 1; s >= 0; --s) {
                if (rem % q == q - 1) {
                    at_top = true;
                    break;
                }
                rem /= q;
            }
            if (at_top) top += std::norm(state.amplitudes(idx));
        }
        if (top / n2 > kFockLeakageTol)
            throw TruncationLeakageError(
                "Fock truncation leakage " + std::to_string(top / n2) + " at t=" +
                std::to_string(t) + "; raise max_occupation");
    };
}

// --- relativistic field site ---------------------------------------------

double RelativisticFieldSite::jump_sigma() const { return 1.0 / std::sqrt(2.0 * beta); }

void RelativisticFieldSite::validate() const {
    if (fock_dim < 2) throw ContractError("field site: fock_dim must be >= 2");
    if (beta <= 0.0) throw ContractError("field site: beta must be positive");
    if (lattice_spacing <= 0.0) throw ContractError("field site: spacing must be positive");
    if (omega <= 0.0) throw ContractError("field site: omega must be positive");
}

LinearOp RelativisticFieldSite::phi_dag_phi() const {
    validate();
    const BasisTag tag = basis();
    const Matrix a = ladder_lower(fock_dim);
    // phi = (a + b^dagger) / sqrt(2 omega spacing); 1-D delta(0) ~ 1/spacing
    Matrix c = embed_at(a, tag, 0).entries + embed_at(a.adjoint(), tag, 1).entries;
    Matrix m = (c.adjoint() * c) / (2.0 * omega * lattice_spacing);
    return {std::move(m), tag};
}

LinearOp RelativisticFieldSite::free_hamiltonian() const {
    validate();
    const BasisTag tag = basis();
    const Matrix n = number_op(fock_dim);
    Matrix h = omega * (embed_at(n, tag, 0).entries + embed_at(n, tag, 1).entries);
    return {std::move(h), tag};
}

JumpFamily relativistic_family(const RelativisticFieldSite& site, int n_grid_points) {
    return JumpFamily::gaussian_auto(site.phi_dag_phi(), site.jump_sigma(), "field",
                                     n_grid_points);
}

LinearOp relativistic_jump(const RelativisticFieldSite& site, double z) {
    return relativistic_family(site).jump_at(z);
}

// --- event times -----------------------------------------------------------

std::vector<double> poisson_event_times(double rate, double horizon, Rng& rng) {
    if (rate < 0.0) throw ContractError("poisson_event_times: negative rate");
    if (horizon <= 0.0) throw ContractError("poisson_event_times: horizon must be positive");
    std::vector<double> times;
    if (rate == 0.0) return times;
    double t = 0.0;
    for (;;) {
        const double gap = rng.exponential(rate);
        if (gap <= 0.0) continue;  // zero gap has measure zero; keep order strict
        t += gap;
        if (t > horizon) break;
        times.push_back(t);
    }
    return times;
}

}  // namespace flashsim
