#include "kdvstab/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "kdvstab/errors.hpp"

namespace kdvstab {

Eigen::VectorXd simpson_weights(int n, double h)
{
    if (n < 3)
        fail(ErrorKind::invalid_argument, "Simpson rule needs at least 3 samples");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    int intervals = n - 1;
    int simpson_end = (intervals % 2 == 0) ? intervals : intervals - 3;
    for (int k = 0; k < simpson_end; k += 2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if (simpson_end != intervals) {
        int k = simpson_end;
        w[k] += 3.0 * h / 8.0;
        w[k + 1] += 9.0 * h / 8.0;
        w[k + 2] += 9.0 * h / 8.0;
        w[k + 3] += 3.0 * h / 8.0;
    }
    return w;
}

double simpson(const Eigen::Ref<const Eigen::VectorXd>& f, double h)
{
    return simpson_weights(static_cast<int>(f.size()), h).dot(f);
}

std::complex<double> simpson(const Eigen::Ref<const Eigen::VectorXcd>& f, double h)
{
    Eigen::VectorXd w = simpson_weights(static_cast<int>(f.size()), h);
    return (f.array() * w.array().cast<std::complex<double>>()).sum();
}

} // namespace kdvstab

namespace kdvstab {

namespace {

// sum_{k=0}^{count-1} exp(i theta k), stable for small theta.
std::complex<double> geometric_phase_sum(double theta, long count)
{
    // the sum is 2 pi periodic in theta; reducing first keeps the ratio below
    // well conditioned near multiples of 2 pi
    double half = 0.5 * std::remainder(theta, 2.0 * std::numbers::pi);
    double s = std::sin(half);
    if (s == 0.0)
        return static_cast<double>(count);
    double ratio = std::sin(count * half) / s;
    return std::polar(ratio, (count - 1) * half);
}

} // namespace

std::complex<double> simpson_exponential(double delta, double T, int intervals)
{
    if (intervals < 2 || intervals % 2 != 0)
        fail(ErrorKind::invalid_argument, "closed-form Simpson needs an even interval count");
    const double h = T / intervals;
    const double theta = delta * h;
    std::complex<double> all = geometric_phase_sum(theta, intervals + 1L);
    std::complex<double> odd = std::polar(1.0, theta) * geometric_phase_sum(2.0 * theta, intervals / 2);
    std::complex<double> ends = 1.0 + std::polar(1.0, theta * intervals);
    return h / 3.0 * (2.0 * all + 2.0 * odd - ends);
}

} // namespace kdvstab
