#include "ccr/quadrature.hpp"

#include <cmath>

#include "ccr/rng.hpp"

namespace ccr {

namespace {

struct Budget {
    std::size_t left;
    void spend(std::size_t k) {
        if (k > left) throw QuadratureFailure("quadrature evaluation budget exhausted");
        left -= k;
    }
};

double simpson(double h, double fa, double fm, double fb) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double m, double b,
             double fa, double fm, double fb, double whole, double tol, int depth,
             Budget& budget) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    budget.spend(2);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(m - a, fa, flm, fm);
    const double right = simpson(b - m, fm, frm, fb);
    const double err = left + right - whole;
    if (depth <= 0) throw QuadratureFailure("quadrature recursion depth exhausted");
    if (std::abs(err) <= 15.0 * tol) {
        return left + right + err / 15.0;
    }
    return adapt(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget) +
           adapt(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget);
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opt) {
    if (!(b > a)) return 0.0;
    Budget budget{opt.max_evals};

    // Coarse pass over a few panels to set the tolerance scale, then refine
    // each panel adaptively against it.
    const int n_panels = 8;
    const double h = (b - a) / n_panels;
    double fx[2 * n_panels + 1];
    budget.spend(2 * n_panels + 1);
    for (int i = 0; i <= 2 * n_panels; ++i) fx[i] = f(a + 0.5 * h * i);
    double coarse = 0.0;
    for (int i = 0; i < n_panels; ++i) {
        coarse += simpson(h, fx[2 * i], fx[2 * i + 1], fx[2 * i + 2]);
    }
    const double scale = std::max(std::abs(coarse), opt.abs_floor / opt.rel_tol);
    const double tol = opt.rel_tol * scale;

    double total = 0.0;
    for (int i = 0; i < n_panels; ++i) {
        const double pa = a + h * i;
        const double pm = pa + 0.5 * h;
        const double pb = pa + h;
        const double whole = simpson(h, fx[2 * i], fx[2 * i + 1], fx[2 * i + 2]);
        total += adapt(f, pa, pm, pb, fx[2 * i], fx[2 * i + 1], fx[2 * i + 2], whole,
                       tol / n_panels, 60, budget);
    }
    return total;
}

double integrate_sqrt_time(const std::function<double(double)>& f, double b,
                           const QuadratureOptions& opt) {
    if (!(b > 0.0)) return 0.0;
    const double vb = std::sqrt(b);
    return integrate_adaptive([&f](double v) { return 2.0 * v * f(v * v); }, 0.0, vb, opt);
}

double gauss_expectation(const std::function<double(double)>& g,
                         const QuadratureOptions& opt, double z_max) {
    return integrate_adaptive([&g](double z) { return g(z) * norm_pdf(z); }, -z_max, z_max,
                              opt);
}

} // namespace ccr
