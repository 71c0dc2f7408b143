#include "blowuplab/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace blowup {

std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

double gauss20(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

double gauss_composite(const std::function<double(double)>& f, const std::vector<double>& breaks, int panels) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i], b = breaks[i + 1];
        if (!(b > a)) continue;
        const double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p) s += gauss20(f, a + p * h, (p + 1 == panels) ? b : a + (p + 1) * h);
    }
    return s;
}

double gauss_graded(const std::function<double(double)>& f, double a, double b, int levels, double ratio) {
    // breakpoints a + (b-a) ratio^j, j = levels..0, plus the innermost piece [a, a+(b-a)ratio^levels]
    std::vector<double> br;
    br.push_back(a);
    for (int j = levels; j >= 1; --j) br.push_back(a + (b - a) * std::pow(ratio, j));
    br.push_back(b);
    return gauss_composite(f, br, 1);
}

std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                      std::vector<double> d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("line fit needs two or more points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double r2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - f.intercept - f.slope * x[i];
        r2 += e * e;
    }
    f.rms = std::sqrt(r2 / n);
    return f;
}

PolyFit fit_poly(const std::vector<double>& x, const std::vector<double>& y, int degree) {
    const int n = static_cast<int>(x.size());
    if (n <= degree) throw std::invalid_argument("polynomial fit needs more points than unknowns");
    // scale the abscissa to [-1,1]-ish so the Vandermonde matrix stays tame
    double s = 0;
    for (double v : x) s = std::max(s, std::abs(v));
    if (s == 0) s = 1;
    Eigen::MatrixXd V(n, degree + 1);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        double p = 1;
        for (int j = 0; j <= degree; ++j) V(i, j) = p, p *= x[i] / s;
        b(i) = y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
    Eigen::VectorXd c = qr.solve(b);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
    const auto& sv = svd.singularValues();
    PolyFit out;
    out.condition = sv(0) / sv(sv.size() - 1);
    out.coeffs.resize(degree + 1);
    for (int j = 0; j <= degree; ++j) out.coeffs[j] = c(j) / std::pow(s, j);
    out.rms = std::sqrt((V * c - b).squaredNorm() / n);
    return out;
}

std::vector<double> fit_powers(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& powers) {
    const int n = static_cast<int>(x.size()), m = static_cast<int>(powers.size());
    if (n < m) throw std::invalid_argument("power fit needs at least as many points as unknowns");
    Eigen::MatrixXd V(n, m);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) V(i, j) = std::pow(x[i], powers[j]);
        b(i) = y[i];
    }
    Eigen::VectorXd scale = V.colwise().norm().transpose();
    for (int j = 0; j < m; ++j) V.col(j) /= scale(j);
    Eigen::VectorXd c = V.colPivHouseholderQr().solve(b);
    std::vector<double> out(m);
    for (int j = 0; j < m; ++j) out[j] = c(j) / scale(j);
    return out;
}

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BLOWUPLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                if (failed) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace blowup
