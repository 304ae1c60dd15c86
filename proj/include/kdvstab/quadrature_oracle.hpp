#pragma once

#include <complex>

namespace kdvstab {

// int_0^T exp(-2 omega t) exp(i delta t) dt by adaptive oscillatory quadrature
// (GSL QAWO on the cosine and sine parts).  Independent of any closed form.
std::complex<double> damped_oscillation_integral(double omega, double delta, double T);

// Gramian entry conj(b_m) b_k int_0^T e^{-2 omega t} e^{i (mu_k - mu_m) t} dt.
std::complex<double> gramian_entry_quadrature(std::complex<double> b_m, std::complex<double> b_k,
                                              double mu_m, double mu_k, double omega, double T);

} // namespace kdvstab
