#include "kdvstab/quadrature_oracle.hpp"

#include <cmath>
#include <memory>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "kdvstab/errors.hpp"

namespace kdvstab {

namespace {

constexpr std::size_t workspace_size = 2000;

struct Damping {
    double rate;
};

double damped(double t, void* params)
{
    return std::exp(-static_cast<Damping*>(params)->rate * t);
}

double qawo(double omega, double delta, double T, enum gsl_integration_qawo_enum kind)
{
    gsl_set_error_handler_off();
    std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
        gsl_integration_workspace_alloc(workspace_size), gsl_integration_workspace_free);
    std::unique_ptr<gsl_integration_qawo_table, decltype(&gsl_integration_qawo_table_free)> table(
        gsl_integration_qawo_table_alloc(delta, T, kind, 50), gsl_integration_qawo_table_free);
    if (!ws || !table)
        fail(ErrorKind::convergence_failure, "cannot allocate quadrature workspace");
    Damping p{2.0 * omega};
    gsl_function f{&damped, &p};
    double result = 0.0, abserr = 0.0;
    int status = gsl_integration_qawo(&f, 0.0, 1e-13, 1e-12, workspace_size, ws.get(), table.get(), &result,
                                      &abserr);
    // Roundoff status means the requested tolerance could not be tightened further; the
    // estimate is still usable when its own error bound is small.
    if (status == GSL_EROUND && abserr < 1e-11)
        return result;
    if (status != GSL_SUCCESS)
        fail(ErrorKind::convergence_failure, std::string("oscillatory quadrature failed: ") + gsl_strerror(status));
    return result;
}

} // namespace

std::complex<double> damped_oscillation_integral(double omega, double delta, double T)
{
    return {qawo(omega, delta, T, GSL_INTEG_COSINE), qawo(omega, delta, T, GSL_INTEG_SINE)};
}

std::complex<double> gramian_entry_quadrature(std::complex<double> b_m, std::complex<double> b_k,
                                              double mu_m, double mu_k, double omega, double T)
{
    return std::conj(b_m) * b_k * damped_oscillation_integral(omega, mu_k - mu_m, T);
}

} // namespace kdvstab
