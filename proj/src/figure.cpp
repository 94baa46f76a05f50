#include "flashsim/figure.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "flashsim/rng.hpp"

namespace flashsim {

void FigureSpec::validate() const {
    region.validate();
    if (width <= 0.0) throw ContractError("figure: width must be positive");
    if (mu < 0.0) throw ContractError("figure: mu must be nonnegative");
    if (beta <= 0.0) throw ContractError("figure: beta must be positive");
    if (panel1_nx < 2 || panel1_nt < 2) throw ContractError("figure: panel-1 grid too small");
}

double FigureSpec::density_at(double t, double x) const {
    const double u = (x - velocity * t) / width;
    return rho0 * std::exp(-0.5 * u * u);
}

double FigureSpec::noise_sigma() const {
    if (std::isinf(beta)) return 0.0;
    return 1.0 / std::sqrt(2.0 * beta);
}

std::vector<FigurePoint> emit_figure_data(const FigureSpec& spec) {
    spec.validate();
    std::vector<FigurePoint> out;

    const double t_span = spec.region.duration();
    const double x_span = spec.region.width();
    for (int it = 0; it < spec.panel1_nt; ++it)
        for (int ix = 0; ix < spec.panel1_nx; ++ix) {
            const double t = t_span * it / (spec.panel1_nt - 1);
            const double x = x_span * ix / (spec.panel1_nx - 1);
            out.push_back({1, t, x, spec.density_at(t, x)});
        }

    Rng sprinkle_rng = Rng::substream(spec.seed, 0);
    CausalSprinkling s = sprinkle(spec.region, spec.mu, sprinkle_rng);
    for (const auto& e : s.events) out.push_back({2, e.t, e.x, spec.density_at(e.t, e.x)});

    Rng noise_rng = Rng::substream(spec.seed, 1);
    const double sigma = spec.noise_sigma();
    for (const auto& e : s.events) {
        const double noise = sigma == 0.0 ? 0.0 : noise_rng.normal(0.0, sigma);
        out.push_back({3, e.t, e.x, spec.density_at(e.t, e.x) + noise});
    }
    return out;
}

void figure_to_csv(const std::vector<FigurePoint>& points, std::ostream& os) {
    os << "panel,t,x,z\n";
    char buf[128];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", p.panel, p.t, p.x, p.z);
        os << buf;
    }
}

}  // namespace flashsim
