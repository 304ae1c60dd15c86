#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace kdvstab {

// Composite Simpson on uniformly spaced samples; an odd number of intervals is
// closed with a 3/8 panel at the end. Needs at least 3 samples.
double simpson(const Eigen::Ref<const Eigen::VectorXd>& f, double h);
std::complex<double> simpson(const Eigen::Ref<const Eigen::VectorXcd>& f, double h);

// Simpson weights (times h) for n uniformly spaced samples.
Eigen::VectorXd simpson_weights(int n, double h);

} // namespace kdvstab

namespace kdvstab {

// Composite Simpson (even interval count) of exp(i delta t) over [0, T],
// evaluated in closed form through geometric sums of the sample phases.
std::complex<double> simpson_exponential(double delta, double T, int intervals);

} // namespace kdvstab
