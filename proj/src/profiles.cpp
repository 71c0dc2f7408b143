#include "blowuplab/profiles.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <stdexcept>

#include "blowuplab/errors.hpp"
#include "blowuplab/format.hpp"
#include "blowuplab/numerics.hpp"

namespace blowup {

namespace {

const double kC = std::pow(3.0, 0.25);

void require_radius(double y) {
    if (!(y >= 0.0)) throw std::domain_error("radius must be nonnegative");
}

using State = std::array<double, 2>;

// J'' = Z0/2 - 5w^4 J - 2J'/y
void j_rhs(const State& s, State& ds, double y) {
    const double w = bubble_w(y);
    ds[0] = s[1];
    ds[1] = 0.5 * kernel_Z0(y) - 5.0 * w * w * w * w * s[0] - 2.0 * s[1] / y;
}

constexpr double kTaylorEnd = 1e-3;

State taylor_state(double y) {
    return {kJTaylorC2 * y * y + kJTaylorC4 * y * y * y * y, 2.0 * kJTaylorC2 * y + 4.0 * kJTaylorC4 * y * y * y};
}

// integrate from y0 (with state s) through the sorted targets, recording the state at each
void integrate_to(State s, double y0, const std::vector<double>& targets, std::vector<State>& out) {
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
    std::vector<double> times;
    times.reserve(targets.size() + 1);
    times.push_back(y0);
    for (double t : targets) times.push_back(t);
    out.clear();
    bool first = true;
    ode::integrate_times(stepper, j_rhs, s, times.begin(), times.end(), 1e-3, [&](const State& st, double) {
        if (first) {
            first = false;
            return;
        }
        out.push_back(st);
    });
}

State ode_state(double y) {
    if (y <= kTaylorEnd) return taylor_state(y);
    std::vector<State> out;
    integrate_to(taylor_state(kTaylorEnd), kTaylorEnd, {y}, out);
    return out.back();
}

// F(s) = ∫_0^s u² Z0(u)²/2 du; closed form away from the origin, where it cancels badly
double quad_F(double s) {
    auto integrand = [](double u) {
        const double z = kernel_Z0(u);
        return 0.5 * u * u * z * z;
    };
    if (s <= 0.5) return gauss20(integrand, 0.0, s);
    const double q = 1.0 + s * s;
    const double e = s - 2.5 * std::atan(s) + (5.0 * s * s * s + 3.0 * s) / (2.0 * q * q);
    return std::sqrt(3.0) / 8.0 * e;
}

double quad_vprime(double s) {
    if (s == 0.0) return 0.0;
    const double z = kernel_Z0(s);
    return quad_F(s) / (s * s * z * z);
}

// ∫_a^b v' ds with panels no wider than 0.05
double quad_v_increment(double a, double b) {
    if (b <= a) return 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 0.05)));
    return gauss_composite(quad_vprime, {a, b}, panels);
}

constexpr double kBridge = 1e-2;

ProfileSample quadrature_J(double y) {
    ProfileSample p{y, 0.0, 0.0, false};
    if (y == 0.0) return p;
    const double left = 1.0 - kBridge, right = 1.0 + kBridge;
    if (y <= left) {
        const double v = quad_v_increment(0.0, y);
        p.value = kernel_Z0(y) * v;
        p.derivative = kernel_Z0_d1(y) * v + kernel_Z0(y) * quad_vprime(y);
        return p;
    }
    // local ODE bridge across the zero of Z0, started from quadrature data at 1-δ
    const double v_left = quad_v_increment(0.0, left);
    State s{kernel_Z0(left) * v_left, kernel_Z0_d1(left) * v_left + kernel_Z0(left) * quad_vprime(left)};
    std::vector<State> out;
    integrate_to(s, left, {std::min(y, right)}, out);
    p.bridged = true;
    if (y <= right) {
        p.value = out.back()[0];
        p.derivative = out.back()[1];
        return p;
    }
    const double v = out.back()[0] / kernel_Z0(right) + quad_v_increment(right, y);
    p.value = kernel_Z0(y) * v;
    p.derivative = kernel_Z0_d1(y) * v + kernel_Z0(y) * quad_vprime(y);
    return p;
}

}  // namespace

double bubble_w(double y) {
    require_radius(y);
    return kC / std::sqrt(1.0 + y * y);
}

double bubble_w_d1(double y) {
    require_radius(y);
    return -kC * y * std::pow(1.0 + y * y, -1.5);
}

double bubble_w_d2(double y) {
    require_radius(y);
    return kC * (2.0 * y * y - 1.0) * std::pow(1.0 + y * y, -2.5);
}

double kernel_Z0(double y) {
    require_radius(y);
    return 0.5 * kC * (y * y - 1.0) * std::pow(1.0 + y * y, -1.5);
}

double kernel_Z0_d1(double y) {
    require_radius(y);
    return 0.5 * kC * y * (5.0 - y * y) * std::pow(1.0 + y * y, -2.5);
}

double kernel_Z0_d2(double y) {
    require_radius(y);
    const double y2 = y * y;
    return 0.5 * kC * (2.0 * y2 * y2 - 23.0 * y2 + 5.0) * std::pow(1.0 + y2, -3.5);
}

ProfileSample corrector_J(double y, JMethod method) {
    require_radius(y);
    if (method == JMethod::quadrature) return quadrature_J(y);
    const State s = ode_state(y);
    return {y, s[0], s[1], false};
}

CorrectorTable::CorrectorTable(double y_max) {
    y_.push_back(0.0);
    for (double y = 0.005; y < 10.0; y += 0.005) y_.push_back(y);
    for (double y = 10.0; y < y_max; y *= 1.005) y_.push_back(y);
    y_.push_back(y_max);
    std::vector<double> targets;
    for (double y : y_)
        if (y > kTaylorEnd) targets.push_back(y);
    std::vector<State> out;
    integrate_to(taylor_state(kTaylorEnd), kTaylorEnd, targets, out);
    j_.assign(y_.size(), 0.0);
    dj_.assign(y_.size(), 0.0);
    std::size_t k = 0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
        const State s = (y_[i] > kTaylorEnd) ? out[k++] : taylor_state(y_[i]);
        j_[i] = s[0];
        dj_[i] = s[1];
    }
    tail_b_ = j_.back() - kJSlope * y_.back();
}

const CorrectorTable& CorrectorTable::shared() {
    static const CorrectorTable table;
    return table;
}

namespace {
// cubic Hermite on [y0,y1]; returns value and derivative
std::pair<double, double> hermite_interp(double y, double y0, double y1, double f0, double f1, double d0, double d1) {
    const double h = y1 - y0, t = (y - y0) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double v = (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * d1;
    const double dv = ((6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * f1 + (3 * t2 - 2 * t) * h * d1) / h;
    return {v, dv};
}
}  // namespace

ProfileSample CorrectorTable::sample(double y) const {
    require_radius(y);
    if (y <= kTaylorEnd) {
        const State s = taylor_state(y);
        return {y, s[0], s[1], false};
    }
    if (y >= y_.back()) return {y, kJSlope * y + tail_b_, kJSlope, false};
    const std::size_t i = static_cast<std::size_t>(std::upper_bound(y_.begin(), y_.end(), y) - y_.begin()) - 1;
    const auto [v, dv] = hermite_interp(y, y_[i], y_[i + 1], j_[i], j_[i + 1], dj_[i], dj_[i + 1]);
    return {y, v, dv, false};
}

double CorrectorTable::value(double y) const { return sample(y).value; }
double CorrectorTable::d1(double y) const { return sample(y).derivative; }

double CorrectorTable::d2(double y) const {
    if (y <= kTaylorEnd) return 2.0 * kJTaylorC2 + 12.0 * kJTaylorC4 * y * y;
    const ProfileSample s = sample(y);
    const double w = bubble_w(y);
    return 0.5 * kernel_Z0(y) - 5.0 * w * w * w * w * s.value - 2.0 * s.derivative / y;
}

double hermite_h(int n, double x) {
    if (n < 0) throw std::invalid_argument("Hermite degree must be nonnegative");
    if (n == 0) return 1.0;
    double hm = 1.0, h = 2.0 * x;
    for (int j = 1; j < n; ++j) {
        const double hp = 2.0 * x * h - 2.0 * j * hm;
        hm = h;
        h = hp;
    }
    return h;
}

double hermite_even(int k, double x) {
    if (k < 1 || k > 12) throw std::invalid_argument("hermite_even needs 1 <= k <= 12");
    return hermite_h(2 * k, x);
}

HermiteProfile make_hermite_profile(int k, double A) {
    if (k < 1 || k > 12) throw std::invalid_argument("hermite profile needs 1 <= k <= 12");
    std::vector<double> hm{1.0}, h{0.0, 2.0};
    for (int j = 1; j < 2 * k; ++j) {
        std::vector<double> hp(j + 2, 0.0);
        for (std::size_t i = 0; i < h.size(); ++i) hp[i + 1] += 2.0 * h[i];
        for (std::size_t i = 0; i < hm.size(); ++i) hp[i] -= 2.0 * j * hm[i];
        hm = std::move(h);
        h = std::move(hp);
    }
    return {k, A, h};
}

double hermite_constant(int k) {
    if (k < 1 || k > 12) throw std::invalid_argument("hermite constant needs 1 <= k <= 12");
    double kf = 1.0, k2f = 1.0;
    for (int i = 2; i <= k; ++i) kf *= i;
    for (int i = 2; i <= 2 * k; ++i) k2f *= i;
    return ((k % 2) ? -1.0 : 1.0) * kf * std::sqrt(3.0) / k2f;
}

namespace {
void require_positive_z(double z) {
    if (!(z > 0.0)) throw std::domain_error("outer profile has a pole at z=0");
}
}  // namespace

// with P(z) = H_{2k}(z/2): P' = (1/2)·2n H_{n-1}, P'' = (1/4)·4n(n-1) H_{n-2}
double outer_profile_m(double z, int k, double A) {
    require_positive_z(z);
    return std::sqrt(A) * hermite_constant(k) * hermite_even(k, 0.5 * z) / z;
}

double outer_profile_m_d1(double z, int k, double A) {
    require_positive_z(z);
    const int n = 2 * k;
    const double P = hermite_h(n, 0.5 * z), P1 = n * hermite_h(n - 1, 0.5 * z);
    return std::sqrt(A) * hermite_constant(k) * (P1 / z - P / (z * z));
}

double outer_profile_m_d2(double z, int k, double A) {
    require_positive_z(z);
    const int n = 2 * k;
    const double P = hermite_h(n, 0.5 * z), P1 = n * hermite_h(n - 1, 0.5 * z);
    const double P2 = n * (n - 1) * hermite_h(n - 2, 0.5 * z);
    return std::sqrt(A) * hermite_constant(k) * (P2 / z - 2.0 * P1 / (z * z) + 2.0 * P / (z * z * z));
}

NormReport eigen_residual(const std::function<double(double)>& m, double gamma, const RadialGrid& grid,
                          EigenResidualOptions opts) {
    const auto& z = grid.nodes();
    const int half = (opts.order == 4) ? 2 : 1;
    if (opts.order != 2 && opts.order != 4) throw std::invalid_argument("eigen_residual order must be 2 or 4");
    if (opts.order == 4 && grid.stretching() != RadialGrid::Stretching::uniform)
        throw std::invalid_argument("fourth-order residual needs a uniform grid");
    std::vector<double> mv(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) mv[i] = m(z[i]);
    NormReport rep{"eigen_residual", 0.0, 0.0, 0.0};
    const bool uniform = grid.stretching() == RadialGrid::Stretching::uniform;
    const std::size_t lo = static_cast<std::size_t>(half) + (z.front() == 0.0 ? 1 : 0);
    for (std::size_t i = lo; i + half < z.size(); ++i) {
        double d1 = 0, d2 = 0;
        if (uniform) {
            // integer stencils so constants give exactly zero
            const double h = z[i + 1] - z[i];
            if (half == 1) {
                d1 = (mv[i + 1] - mv[i - 1]) / (2.0 * h);
                d2 = (mv[i + 1] - 2.0 * mv[i] + mv[i - 1]) / (h * h);
            } else {
                d1 = (-mv[i + 2] + 8.0 * mv[i + 1] - 8.0 * mv[i - 1] + mv[i - 2]) / (12.0 * h);
                d2 = (-mv[i + 2] + 16.0 * mv[i + 1] - 30.0 * mv[i] + 16.0 * mv[i - 1] - mv[i - 2]) / (12.0 * h * h);
            }
        } else {
            std::vector<double> st(z.begin() + (i - half), z.begin() + (i + half + 1));
            const auto w = fd_weights(z[i], st, 2);
            for (int j = 0; j < 2 * half + 1; ++j) d1 += w[1][j] * mv[i - half + j], d2 += w[2][j] * mv[i - half + j];
        }
        const double res = std::abs(d2 + (2.0 / z[i] - 0.5 * z[i]) * d1 - (gamma + 0.25) * mv[i]);
        if (res > rep.value) rep.value = res, rep.arg_x = z[i];
    }
    return rep;
}

NegativeEigenpair negative_eigenpair(const RadialGrid& grid) {
    const auto& y = grid.nodes();
    if (!grid.starts_at_origin()) throw std::invalid_argument("eigen grid must start at the origin");
    if (grid.r_max() < 30.0) throw std::invalid_argument("eigen grid must reach y_max >= 30");
    // u = yφ turns -Δ-5w⁴ into -u''-5w⁴u with u(0)=u(y_max)=0; symmetrized with the lumped mass
    const std::size_t n = y.size() - 2;
    Eigen::VectorXd diag(n), sub(n - 1), mass(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double hm = y[i] - y[i - 1], hp = y[i + 1] - y[i];
        const double w = bubble_w(y[i]);
        mass(i - 1) = 0.5 * (hm + hp);
        diag(i - 1) = (1.0 / hm + 1.0 / hp) / mass(i - 1) - 5.0 * w * w * w * w;
    }
    for (std::size_t i = 1; i < n; ++i) sub(i - 1) = -1.0 / ((y[i + 1] - y[i]) * std::sqrt(mass(i - 1) * mass(i)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigen solve did not converge");
    const double lam0 = es.eigenvalues()(0), lam1 = es.eigenvalues()(1);

    // inverse iteration for the ground state vector
    const double shift = lam0 - 1e-10 * std::max(1.0, std::abs(lam0));
    std::vector<double> a(n, 0.0), b(n), c(n, 0.0), x(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) b[i] = diag(i) - shift;
    for (std::size_t i = 0; i + 1 < n; ++i) c[i] = sub(i), a[i + 1] = sub(i);
    double change = 1.0;
    for (int it = 0; it < 50 && change > 1e-13; ++it) {
        std::vector<double> xn = solve_tridiagonal(a, b, c, x);
        double nrm = 0;
        for (double v : xn) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (xn[n / 4] < 0) nrm = -nrm;
        change = 0;
        for (std::size_t i = 0; i < n; ++i) {
            xn[i] /= nrm;
            change = std::max(change, std::abs(xn[i] - x[i]));
        }
        x = std::move(xn);
    }
    if (change > 1e-9) throw NumericalError("inverse iteration for the negative eigenvector did not converge");

    std::vector<double> phi(y.size(), 0.0);
    for (std::size_t i = 1; i <= n; ++i) phi[i] = x[i - 1] / std::sqrt(mass(i - 1)) / y[i];
    // even extension at the origin: φ ≈ a + b y² through the first two nodes
    const double y1 = y[1] * y[1], y2 = y[2] * y[2];
    phi[0] = (y2 * phi[1] - y1 * phi[2]) / (y2 - y1);
    double top = 0;
    for (double v : phi) top = std::max(top, std::abs(v));
    for (double& v : phi) v /= top;
    for (std::size_t i = 0; i + 1 < phi.size(); ++i)
        if (!(phi[i] > 0.0)) throw NumericalError("negative eigenvector is not positive");

    FieldSnapshot snap(grid, phi);
    snap.derivative.assign(y.size(), 0.0);
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        const auto w = fd_weights(y[i], {y[i - 1], y[i], y[i + 1]}, 1);
        snap.derivative[i] = w[1][0] * phi[i - 1] + w[1][1] * phi[i] + w[1][2] * phi[i + 1];
    }
    return {lam0, lam1, std::move(snap)};
}

ProfileResiduals profile_residuals(double h, double y_max) {
    const long n = std::lround(y_max / h);
    if (!(h > 0) || n < 16) throw ConfigError("profile residuals need at least 16 intervals");
    const auto& tab = CorrectorTable::shared();
    const auto J = [&](double y) { return tab.value(y); };
    const auto lap = [h](const auto& f, double y) {
        return (f(y + h) - 2 * f(y) + f(y - h)) / (h * h) + (f(y + h) - f(y - h)) / (h * y);
    };
    ProfileResiduals r;
    r.h = h;
    for (long i = 1; i < n; ++i) {
        const double y = i * h, w = bubble_w(y), w4 = w * w * w * w;
        r.bubble = std::max(r.bubble, std::abs(lap(bubble_w, y) + w4 * w));
        r.kernel = std::max(r.kernel, std::abs(lap(kernel_Z0, y) + 5 * w4 * kernel_Z0(y)));
        r.corrector = std::max(r.corrector, std::abs(lap(J, y) + 5 * w4 * J(y) - 0.5 * kernel_Z0(y)));
    }
    return r;
}

std::string profile_csv(const std::vector<ProfileSample>& samples) {
    std::string out = "y,value,derivative\n";
    for (const auto& s : samples) out += fmt17(s.y) + "," + fmt17(s.value) + "," + fmt17(s.derivative) + "\n";
    return out;
}

}  // namespace blowup
