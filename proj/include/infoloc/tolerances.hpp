#pragma once

// Numerical thresholds shared by every module. Checks reference these by name
// so that a single table governs validation, clamping and acceptance.
namespace infoloc::tol {

inline constexpr double hermitian = 1e-12;
inline constexpr double unit_trace = 1e-10;
inline constexpr double min_eigenvalue = -1e-10;
inline constexpr double unitary = 1e-10;
inline constexpr double projector = 1e-10;
inline constexpr double pure = 1e-9;

// eigenvalues below this are treated as zero before taking logarithms
inline constexpr double log_clamp = 1e-12;
// relative entropy: sigma eigenvalue counted as zero / rho weight counted as present
inline constexpr double support_sigma = 1e-12;
inline constexpr double support_rho = 1e-10;

inline constexpr double jacobi_offdiag = 1e-14;
inline constexpr int jacobi_max_sweeps = 100;

inline constexpr double pmm = 1e-10;
inline constexpr double degenerate_gap = 1e-8;
inline constexpr double optimizer_noise = 2e-4;

// largest total dimension the basis optimizer accepts (k copies included)
inline constexpr int optimizer_dim_cap = 64;

}  // namespace infoloc::tol
