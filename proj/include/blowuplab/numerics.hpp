#pragma once
#include <cstddef>
#include <functional>
#include <vector>

namespace blowup {

// Finite-difference weights (Fornberg) for derivatives 0..m at x0 on the given nodes.
// Result is w[d][j], derivative d, node j.
std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& nodes, int m);

// 20-point Gauss-Legendre on [a,b].
double gauss20(const std::function<double(double)>& f, double a, double b);

// Composite Gauss-Legendre: every interval between consecutive breakpoints is split
// into `panels` equal pieces.
double gauss_composite(const std::function<double(double)>& f, const std::vector<double>& breaks, int panels = 1);

// Panels geometrically refined towards `a`: [a, a+ε(b-a)], ... , with `levels` pieces.
double gauss_graded(const std::function<double(double)>& f, double a, double b, int levels, double ratio = 0.5);

// Thomas algorithm; sub[0] and sup[n-1] ignored.
std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                                      std::vector<double> rhs);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;  // root-mean-square residual
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Least squares for y ≈ Σ c_j x^j, j = 0..degree. Returns coefficients and the condition number.
struct PolyFit {
    std::vector<double> coeffs;
    double condition = 0.0;
    double rms = 0.0;
};
PolyFit fit_poly(const std::vector<double>& x, const std::vector<double>& y, int degree);

// Least squares for y ≈ Σ c_j x^{p_j} with arbitrary real powers; columns are
// normalized internally.
std::vector<double> fit_powers(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& powers);

// Worker count: BLOWUPLAB_THREADS if set, else hardware concurrency.
unsigned worker_count();
// Runs fn(i) for i in [0,n). Results must be written to disjoint slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace blowup
