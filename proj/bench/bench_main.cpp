// Benchmark of the parallel kernels against their serial reference
// implementations.  The two paths must agree bit for bit; the table reports
// wall times and speedup at the current thread count.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "flashsim/ensemble.hpp"
#include "flashsim/models.hpp"
#include "flashsim/parallel.hpp"
#include "flashsim/spacetime.hpp"
#include "flashsim/timesym.hpp"

using namespace flashsim;

namespace {

double time_once(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const std::string& name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %5.2fx   %s\n", name.c_str(),
                serial_s, parallel_s, serial_s / parallel_s,
                identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
    std::printf("threads: %d\n", par::max_threads());

    // trajectory ensemble: one-particle localization on a 64-site grid
    {
        GrwModel model;
        model.grid = {-4.0, 4.0, 64};
        CollapseModel cm = grw_collapse_model(model);
        QuantumState packet = grw_gaussian_packet(model, 0.0, 0.5);
        EventSchedule sched = EventSchedule::poisson(2.0, 10.0);
        std::vector<Trajectory> a, b;
        const double ts = time_once([&] { a = run_ensemble_serial(cm, packet, sched, 7, 400); });
        const double tp = time_once([&] { b = run_ensemble(cm, packet, sched, 7, 400); });
        bool same = a.size() == b.size();
        for (std::size_t k = 0; same && k < a.size(); ++k)
            same = a[k].final_state.amplitudes == b[k].final_state.amplitudes &&
                   a[k].flashes.size() == b[k].flashes.size();
        report("grw_ensemble_400", ts, tp, same);
    }

    // exhaustive outcome-grid sweep of the boundary-conditioned chain
    {
        Rng rng(13);
        const Index d = 3;
        Matrix h(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) h(i, j) = rng.normal();
        h = (0.5 * (h + h.transpose())).eval();
        RealVector diag(d);
        diag << 0.0, 1.0, 2.0;
        SequenceSpec spec;
        spec.hamiltonian = {h, BasisTag::single(d)};
        spec.families.assign(3, JumpFamily::gaussian_auto(
                                    diagonal_op(diag, BasisTag::single(d)), 1.0, {}, 41));
        spec.outcomes.assign(3, 0.0);
        spec.intervals = {0.4, 0.7, 0.3, 0.5};
        Matrix g(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
        Matrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        BoundaryConditions bc = BoundaryConditions::make(rho, Matrix::Identity(d, d));
        std::vector<double> ta, tb;
        const double ts = time_once([&] { ta = sequence_numerator_table_serial(spec, bc); });
        const double tp = time_once([&] { tb = sequence_numerator_table(spec, bc); });
        report("sequence_table_41^3", ts, tp, ta == tb);
    }

    // foliation replay sweep on a 3-site x 2-step lattice (90 foliations)
    {
        const LatticeRegion region{3, 2, 1.0, 1.0};
        Matrix h_local(2, 2);
        h_local << Complex(0.2), Complex(0.5), Complex(0.5), Complex(-0.1);
        RealVector d01(2);
        d01 << 0.0, 1.0;
        JumpFamily f = JumpFamily::gaussian_auto(diagonal_op(d01, BasisTag::single(2)), 0.6);
        LocalDynamics dyn(region, BasisTag::uniform(3, 2), {h_local, h_local, h_local},
                          {f, f, f});
        Rng rng(17);
        CausalSprinkling events = sprinkle(region, 2.0, rng);
        Vector amp(8);
        for (Index i = 0; i < 8; ++i) amp(i) = Complex(rng.normal(), rng.normal());
        QuantumState psi = make_state(amp, dyn.basis());
        const Cut start = Cut::level(3, 0), end = Cut::level(3, 2);
        const auto foliations = enumerate_foliations(start, end, region, std::nullopt, 1000);
        Rng sampler(23);
        EvolutionMode sim;
        sim.rng = &sampler;
        FoliationRun run = evolve_along_foliation(psi, foliations[0], dyn, events, sim);
        FoliationComparison ca, cb;
        const double ts = time_once(
            [&] { ca = compare_foliations_serial(psi, start, end, dyn, events, run.outcomes, 1000); });
        const double tp = time_once(
            [&] { cb = compare_foliations(psi, start, end, dyn, events, run.outcomes, 1000); });
        report("foliation_replay_90", ts, tp,
               ca.max_state_deviation == cb.max_state_deviation &&
                   ca.max_probability_spread == cb.max_probability_spread);
    }

    return 0;
}
