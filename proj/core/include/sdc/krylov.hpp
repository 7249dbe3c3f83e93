/// @file krylov.hpp
/// @brief Iterative solvers: restarted GMRES with adaptive restart length,
/// Bi-CGSTAB, Richardson iteration, and power iteration.

#ifndef SDC_KRYLOV_HPP
#define SDC_KRYLOV_HPP

#include "sdc/operator.hpp"

namespace sdc {

struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history; // 2-norms, nonempty after any solve
    bool converged = false;
    double wall_time = 0.0; // seconds
    double final_residual = 0.0;
};

/// Restart-length controller. After each restart cycle the length is moved by
/// a proportional-derivative rule on the log10 residual reduction rate and
/// clamped to [m_min, m_max].
struct RestartController {
    int m_init = 3;
    int m_min = 3;
    int m_step = 5;
    int m_max = 53; // m_init + 10 * m_step
    int current_m = 3;
    double previous_rate = 0.0;
    bool has_rate_sample = false;

    double alpha_p = -3.0;
    double alpha_d = 5.0;
    // a cycle reducing the residual by less than this many decades counts as
    // stalled and widens the restart length by m_step
    double stall_threshold = 0.05;

    static RestartController defaults() { return RestartController{}; }

    void reset() {
        current_m = m_init;
        previous_rate = 0.0;
        has_rate_sample = false;
    }
    /// rate = log10(||res_j|| / ||res_{j-1}||) of the finished cycle.
    void update(double rate);
};

struct GmresResult {
    std::vector<double> x;
    SolveReport report;
};

/// Right-preconditioned restarted GMRES. Modified Gram-Schmidt with one
/// reorthogonalization pass. Stops on ||b - A x||_2 <= tol_abs. Happy
/// breakdown counts as convergence; a singular Hessenberg block throws.
GmresResult pd_gmres(const LinearOperator& op, const Preconditioner* precond,
                     std::span<const double> b, double tol_abs, int max_restarts,
                     RestartController ctrl);

/// Right-preconditioned Bi-CGSTAB with absolute residual stopping rule.
/// On a rho/omega breakdown the method restarts once from the current
/// iterate and throws if the breakdown recurs.
GmresResult bicgstab(const LinearOperator& op, const Preconditioner* precond,
                     std::span<const double> b, double tol_abs, int max_iters);

/// x_{k+1} = x_k + omega * P (b - A x_k), n_steps times.
std::vector<double> richardson(const LinearOperator& op, const Preconditioner* precond,
                               std::span<const double> b, double omega, int n_steps,
                               std::span<const double> x0);

struct PowerIterationResult {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Rayleigh quotient estimate of the dominant eigenvalue; stops when the
/// relative change drops below tol_rel. Deterministic for a fixed seed.
PowerIterationResult power_iteration(const LinearOperator& op, double tol_rel,
                                     int max_iters, unsigned seed);

} // namespace sdc

#endif
