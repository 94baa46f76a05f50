#ifndef FLASHSIM_FIGURE_HPP
#define FLASHSIM_FIGURE_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "flashsim/spacetime.hpp"

namespace flashsim {

// Three-panel pointillist dataset of a moving Gaussian matter-density blob
// A(x,t) = rho0 exp(-(x - v t)^2 / (2 w^2)):
//   panel 1: dense grid samples of A
//   panel 2: Poisson-sprinkled points with exact z = A(point)
//   panel 3: the same points with z = A + Normal(0, (2 beta)^{-1/2})
// beta = +infinity turns the panel-3 noise off exactly.
struct FigureSpec {
    double rho0 = 1.0;
    double width = 1.5;
    double velocity = 0.5;
    LatticeRegion region{10, 10, 1.0, 1.0};
    double mu = 100.0;
    double beta = 1.0;
    std::uint64_t seed = 0;
    int panel1_nx = 64;
    int panel1_nt = 64;

    void validate() const;
    double density_at(double t, double x) const;
    double noise_sigma() const;  // (2 beta)^{-1/2}; 0 when beta is infinite
};

struct FigurePoint {
    int panel = 1;
    double t = 0.0;
    double x = 0.0;
    double z = 0.0;
};

std::vector<FigurePoint> emit_figure_data(const FigureSpec& spec);

// header `panel,t,x,z`
void figure_to_csv(const std::vector<FigurePoint>& points, std::ostream& os);

}  // namespace flashsim

#endif
