#pragma once
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "blowuplab/grid.hpp"

namespace blowup {

struct ProfileSample {
    double y = 0.0;
    double value = 0.0;
    double derivative = 0.0;
    bool bridged = false;  // quadrature switched to the local ODE bridge around y=1
};

// bubble 3^{1/4}(1+y^2)^{-1/2} and its radial derivatives
double bubble_w(double y);
double bubble_w_d1(double y);
double bubble_w_d2(double y);

// dilation kernel (3^{1/4}/2)(y^2-1)(1+y^2)^{-3/2}
double kernel_Z0(double y);
double kernel_Z0_d1(double y);
double kernel_Z0_d2(double y);

enum class JMethod { ode, quadrature };

// Radial solution of ΔJ + 5w⁴J = Z0/2 with J(0)=J'(0)=0.
ProfileSample corrector_J(double y, JMethod method = JMethod::ode);

// Taylor coefficients at the origin, J = c2 y^2 + c4 y^4 + ...
inline constexpr double kJTaylorC2 = -1.3160740129524924608 / 24.0;
inline constexpr double kJTaylorC4 = 1.3160740129524924608 / 16.0;
// far-field slope, J ~ 3^{1/4} y / 8
inline constexpr double kJSlope = 1.3160740129524924608 / 8.0;

// Precomputed J table (ODE route) with cubic Hermite interpolation; the
// linear far-field tail is used past the last node.
class CorrectorTable {
public:
    explicit CorrectorTable(double y_max = 1e10);
    static const CorrectorTable& shared();

    double value(double y) const;
    double d1(double y) const;
    // from the equation itself: J'' = Z0/2 - 5w⁴J - 2J'/y
    double d2(double y) const;
    ProfileSample sample(double y) const;

private:
    std::vector<double> y_, j_, dj_;
    double tail_b_ = 0.0;
};

// Hermite H_n by the three-term recurrence (physicists' normalization)
double hermite_h(int n, double x);
double hermite_even(int k, double x);

struct HermiteProfile {
    int k = 1;
    double A = 1.0;
    std::vector<double> coeffs;  // monomial coefficients of H_{2k}, degree 2k
};
HermiteProfile make_hermite_profile(int k, double A);

// C_k = (-1)^k k! √3 / (2k)!
double hermite_constant(int k);

// m(z) = A^{1/2} C_k H_{2k}(z/2)/z and its first two derivatives
double outer_profile_m(double z, int k, double A);
double outer_profile_m_d1(double z, int k, double A);
double outer_profile_m_d2(double z, int k, double A);

struct EigenResidualOptions {
    int order = 2;  // 2 or 4 (the latter needs uniform spacing)
};
// sup over interior nodes of m'' + (2/z - z/2)m' - (γ+1/4)m with finite differences
NormReport eigen_residual(const std::function<double(double)>& m, double gamma, const RadialGrid& grid,
                          EigenResidualOptions opts = {});

struct NegativeEigenpair {
    double lambda_minus = 0.0;
    double next_eigenvalue = 0.0;  // gap = next_eigenvalue - lambda_minus
    FieldSnapshot z_minus;
};
NegativeEigenpair negative_eigenpair(const RadialGrid& grid);

// sup over the interior nodes of a uniform grid on [0, y_max] of the three-point
// residuals of Δw + w⁵, ΔZ0 + 5w⁴Z0 and ΔJ + 5w⁴J - Z0/2
struct ProfileResiduals {
    double h = 0.0;
    double bubble = 0.0, kernel = 0.0, corrector = 0.0;
};
ProfileResiduals profile_residuals(double h, double y_max = 50.0);

// y,value,derivative rows at 17 significant digits
std::string profile_csv(const std::vector<ProfileSample>& samples);

}  // namespace blowup
