#include "oscnorm/local_poly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oscnorm/error.hpp"

namespace oscnorm {

namespace {

// Univariate polynomial in monomial form, degree <= 4.
using Poly1 = std::array<double, 5>;

constexpr double kIrlsResidualFloor = 1e-12;
constexpr double kIrlsRelativeTol = 1e-10;
constexpr int kIrlsMaxIterations = 200;

// Gauss-Legendre rules on [-1,1].
constexpr std::array<double, 3> kGauss3Nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGauss3Weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
constexpr std::array<double, 4> kGauss4Nodes{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                             0.8611363115940526};
constexpr std::array<double, 4> kGauss4Weights{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                               0.3478548451374538};

Poly1 legendre_poly(int a) {
    switch (a) {
        case 0: return {1, 0, 0, 0, 0};
        case 1: return {0, 1, 0, 0, 0};
        case 2: return {-0.5, 0, 1.5, 0, 0};
        default: throw Error("Legendre degree above 2 is not supported");
    }
}

double legendre_at(int a, double t) {
    switch (a) {
        case 0: return 1.0;
        case 1: return t;
        default: return 1.5 * t * t - 0.5;
    }
}

double eval(const Poly1& p, double t) {
    double r = 0.0;
    for (int i = 4; i >= 0; --i) r = r * t + p[static_cast<std::size_t>(i)];
    return r;
}

double antiderivative(const Poly1& p, double t) {
    double r = 0.0;
    for (int i = 4; i >= 0; --i) r = r * t + p[static_cast<std::size_t>(i)] / (i + 1);
    return r * t;
}

double integrate(const Poly1& p, double lo, double hi) { return antiderivative(p, hi) - antiderivative(p, lo); }

// Sorted roots of a polynomial of degree <= 2 strictly inside (lo, hi).
std::vector<double> roots_inside(const Poly1& p, double lo, double hi) {
    const double a = p[2], b = p[1], c = p[0];
    std::vector<double> roots;
    if (a == 0.0) {
        if (b != 0.0) roots.push_back(-c / b);
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            const double qv = -0.5 * (b + (b >= 0.0 ? s : -s));
            if (qv != 0.0) {
                roots.push_back(qv / a);
                roots.push_back(c / qv);
            } else {
                roots.push_back(0.0);
            }
        }
    }
    std::vector<double> out;
    for (double r : roots)
        if (r > lo && r < hi) out.push_back(r);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> pieces(const Poly1& r, double lo, double hi) {
    std::vector<double> pts{lo};
    for (double x : roots_inside(r, lo, hi)) pts.push_back(x);
    pts.push_back(hi);
    return pts;
}

double abs_integral(const Poly1& r, double lo, double hi) {
    const auto pts = pieces(r, lo, hi);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) acc += std::abs(integrate(r, pts[i], pts[i + 1]));
    return acc;
}

// int sign(r) w over [lo, hi]
double sign_integral(const Poly1& r, const Poly1& w, double lo, double hi) {
    const auto pts = pieces(r, lo, hi);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double mid = eval(r, 0.5 * (pts[i] + pts[i + 1]));
        if (mid > 0.0) acc += integrate(w, pts[i], pts[i + 1]);
        else if (mid < 0.0) acc -= integrate(w, pts[i], pts[i + 1]);
    }
    return acc;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// A finest cell in the local coordinates of the fitted cube.
struct LocalCell {
    std::array<double, 2> lo{-1.0, -1.0};
    std::array<double, 2> hi{1.0, 1.0};
    double value = 0.0;
};

// Polynomial sum_j c_j P_{a_j}(t0) P_{b_j}(t1) on a cube with half-side h.
struct LocalModel {
    int n = 1;
    std::vector<MultiIndex> basis;
    std::vector<double> coef;
    double jacobian = 1.0;  // h^n

    double at(double t0, double t1) const {
        double s = 0.0;
        for (std::size_t j = 0; j < basis.size(); ++j)
            s += coef[j] * legendre_at(basis[j][0], t0) * (n == 2 ? legendre_at(basis[j][1], t1) : 1.0);
        return s;
    }

    // v - m(t) for n = 1
    Poly1 residual_1d(double v) const {
        Poly1 r{};
        r[0] = v;
        for (std::size_t j = 0; j < basis.size(); ++j) {
            const Poly1 pa = legendre_poly(basis[j][0]);
            for (std::size_t i = 0; i < 5; ++i) r[i] -= coef[j] * pa[i];
        }
        return r;
    }

    // v - m(t0, .) as a polynomial in t1
    Poly1 slice_t1(double v, double t0) const {
        Poly1 r{};
        r[0] = v;
        for (std::size_t j = 0; j < basis.size(); ++j) {
            const double w = coef[j] * legendre_at(basis[j][0], t0);
            const Poly1 pb = legendre_poly(basis[j][1]);
            for (std::size_t i = 0; i < 5; ++i) r[i] -= w * pb[i];
        }
        return r;
    }

    // v - m(., t1) as a polynomial in t0
    Poly1 slice_t0(double v, double t1) const {
        Poly1 r{};
        r[0] = v;
        for (std::size_t j = 0; j < basis.size(); ++j) {
            const double w = coef[j] * legendre_at(basis[j][1], t1);
            const Poly1 pa = legendre_poly(basis[j][0]);
            for (std::size_t i = 0; i < 5; ++i) r[i] -= w * pa[i];
        }
        return r;
    }
};

double outer_integral(const std::function<double(double)>& g, const LocalModel& m, const LocalCell& cell) {
    std::vector<double> pts{cell.lo[0], cell.hi[0]};
    for (double t1 : {cell.lo[1], cell.hi[1]})
        for (double x : roots_inside(m.slice_t0(cell.value, t1), cell.lo[0], cell.hi[0])) pts.push_back(x);
    bool quadratic = false;
    for (std::size_t j = 0; j < m.basis.size(); ++j) quadratic |= m.basis[j][1] >= 2 && m.coef[j] != 0.0;
    if (quadratic) {
        // Tangency points of the t1-slices: zeros of the discriminant, a quadratic in t0.
        auto disc = [&](double t0) {
            const Poly1 r = m.slice_t1(cell.value, t0);
            return r[1] * r[1] - 4.0 * r[2] * r[0];
        };
        const double dm = disc(-1.0), d0 = disc(0.0), dp = disc(1.0);
        for (double x : roots_inside(Poly1{d0, 0.5 * (dp - dm), 0.5 * (dp + dm) - d0, 0, 0}, cell.lo[0], cell.hi[0]))
            pts.push_back(x);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] <= pts[i]) continue;
        if (!quadratic) {
            // Between breakpoints g is a polynomial of degree <= 5 in t0.
            const double r = 0.5 * (pts[i + 1] - pts[i]), c = 0.5 * (pts[i + 1] + pts[i]);
            for (std::size_t q = 0; q < 3; ++q) acc += kGauss3Weights[q] * g(c + r * kGauss3Nodes[q]) * r;
            continue;
        }
        acc += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, pts[i], pts[i + 1], 6, 1e-10);
    }
    return acc;
}

// int_cell |f - m| dx
double cell_abs(const LocalModel& m, const LocalCell& cell) {
    if (m.n == 1) return abs_integral(m.residual_1d(cell.value), cell.lo[0], cell.hi[0]) * m.jacobian;
    auto g = [&](double t0) { return abs_integral(m.slice_t1(cell.value, t0), cell.lo[1], cell.hi[1]); };
    return outer_integral(g, m, cell) * m.jacobian;
}

// int_cell sign(f - m) phi_j dx
double cell_sign_basis(const LocalModel& m, const LocalCell& cell, std::size_t j) {
    const auto& a = m.basis[j];
    if (m.n == 1) return sign_integral(m.residual_1d(cell.value), legendre_poly(a[0]), cell.lo[0], cell.hi[0]) * m.jacobian;
    const Poly1 pb = legendre_poly(a[1]);
    auto g = [&](double t0) {
        return legendre_at(a[0], t0) * sign_integral(m.slice_t1(cell.value, t0), pb, cell.lo[1], cell.hi[1]);
    };
    return outer_integral(g, m, cell) * m.jacobian;
}

// Exact tensor Gauss integral of h(t0, t1) over the cell, h of degree <= 5 per variable.
template <class Fn>
double cell_gauss(const LocalModel& m, const LocalCell& cell, Fn&& h) {
    const double r0 = 0.5 * (cell.hi[0] - cell.lo[0]), c0 = 0.5 * (cell.hi[0] + cell.lo[0]);
    const double r1 = 0.5 * (cell.hi[1] - cell.lo[1]), c1 = 0.5 * (cell.hi[1] + cell.lo[1]);
    double acc = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double t0 = c0 + r0 * kGauss3Nodes[i];
        if (m.n == 1) {
            acc += kGauss3Weights[i] * h(t0, 0.0);
            continue;
        }
        for (std::size_t j = 0; j < 3; ++j)
            acc += kGauss3Weights[i] * kGauss3Weights[j] * h(t0, c1 + r1 * kGauss3Nodes[j]);
    }
    return acc * r0 * (m.n == 2 ? r1 : 1.0) * m.jacobian;
}

double cell_square(const LocalModel& m, const LocalCell& cell) {
    return cell_gauss(m, cell, [&](double t0, double t1) {
        const double r = cell.value - m.at(t0, t1);
        return r * r;
    });
}

std::vector<LocalCell> local_cells(const GridFunction& f, const CubeId& c) {
    const int n = f.dimension();
    const double cube_side = side(c);
    const double h = cube_side / 2.0;
    const double cell_side = std::ldexp(1.0, -f.depth());
    std::array<double, 2> center{(static_cast<double>(c.coords[0]) + 0.5) * cube_side,
                                 (static_cast<double>(c.coords[1]) + 0.5) * cube_side};
    std::vector<LocalCell> out;
    for (auto idx : cells_in(c, n, f.depth())) {
        const CubeId cell = f.cell(idx);
        LocalCell lc;
        for (int d = 0; d < n; ++d) {
            const double x0 = static_cast<double>(cell.coords[static_cast<std::size_t>(d)]) * cell_side;
            lc.lo[static_cast<std::size_t>(d)] = (x0 - center[static_cast<std::size_t>(d)]) / h;
            lc.hi[static_cast<std::size_t>(d)] = (x0 + cell_side - center[static_cast<std::size_t>(d)]) / h;
        }
        lc.value = f[idx];
        out.push_back(lc);
    }
    return out;
}

double l1_objective(const LocalModel& m, const std::vector<LocalCell>& cells) {
    double acc = 0.0;
    for (const auto& cell : cells) acc += cell_abs(m, cell);
    return acc;
}

LocalModel make_model(int n, const CubeId& c, int k) {
    LocalModel m;
    m.n = n;
    m.basis = monomial_indices(n, k - 1);
    m.coef.assign(m.basis.size(), 0.0);
    m.jacobian = std::pow(side(c) / 2.0, n);
    return m;
}

// L2 projection coefficients from the local moments of the table.
std::vector<double> project_l2(const MomentTable& table, const CubeId& c, const LocalModel& m) {
    std::vector<double> coef(m.basis.size());
    for (std::size_t j = 0; j < m.basis.size(); ++j) {
        const auto& ab = m.basis[j];
        const Poly1 pa = legendre_poly(ab[0]);
        const Poly1 pb = m.n == 2 ? legendre_poly(ab[1]) : Poly1{1, 0, 0, 0, 0};
        double inner = 0.0;
        for (int i = 0; i <= ab[0]; ++i)
            for (int l = 0; l <= ab[1]; ++l) {
                const double w = pa[static_cast<std::size_t>(i)] * pb[static_cast<std::size_t>(l)];
                if (w != 0.0) inner += w * table.local_moment(c, {i, l});
            }
        double norm2 = m.jacobian * 2.0 / (2 * ab[0] + 1);
        if (m.n == 2) norm2 *= 2.0 / (2 * ab[1] + 1);
        coef[j] = inner / norm2;
    }
    return coef;
}

std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                                std::vector<double> start, double step, int max_evals) {
    const std::size_t d = start.size();
    double best_val = fn(start);
    for (int restart = 0; restart < 8; ++restart) {
        std::vector<std::vector<double>> simplex{start};
        for (std::size_t i = 0; i < d; ++i) {
            auto p = start;
            p[i] += step;
            simplex.push_back(p);
        }
        std::vector<double> vals;
        for (const auto& p : simplex) vals.push_back(fn(p));
        int evals = static_cast<int>(d + 1);
        while (evals < max_evals) {
            std::vector<std::size_t> order(d + 1);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
            const std::size_t lo = order.front(), hi = order.back(), second = order[d - 1];
            if (std::abs(vals[hi] - vals[lo]) <= 1e-16 * std::max(1.0, std::abs(vals[lo]))) break;
            std::vector<double> centroid(d, 0.0);
            for (std::size_t i = 0; i <= d; ++i)
                if (i != hi)
                    for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / static_cast<double>(d);
            auto along = [&](double t) {
                std::vector<double> p(d);
                for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + t * (simplex[hi][k] - centroid[k]);
                return p;
            };
            auto xr = along(-1.0);
            const double fr = fn(xr);
            ++evals;
            if (fr < vals[lo]) {
                auto xe = along(-2.0);
                const double fe = fn(xe);
                ++evals;
                if (fe < fr) simplex[hi] = xe, vals[hi] = fe;
                else simplex[hi] = xr, vals[hi] = fr;
            } else if (fr < vals[second]) {
                simplex[hi] = xr, vals[hi] = fr;
            } else {
                auto xc = fr < vals[hi] ? along(-0.5) : along(0.5);
                const double fc = fn(xc);
                ++evals;
                if (fc < std::min(fr, vals[hi])) {
                    simplex[hi] = xc, vals[hi] = fc;
                } else {
                    for (std::size_t i = 0; i <= d; ++i) {
                        if (i == lo) continue;
                        for (std::size_t k = 0; k < d; ++k)
                            simplex[i][k] = simplex[lo][k] + 0.5 * (simplex[i][k] - simplex[lo][k]);
                        vals[i] = fn(simplex[i]);
                        ++evals;
                    }
                }
            }
        }
        const auto it = std::min_element(vals.begin(), vals.end());
        const double improved = *it;
        const auto candidate = simplex[static_cast<std::size_t>(it - vals.begin())];
        const bool progress = improved < best_val - 1e-15 * std::max(1.0, std::abs(best_val));
        if (improved <= best_val) {
            best_val = improved;
            start = candidate;
        }
        if (!progress) break;
        step *= 0.25;
    }
    return start;
}

// Weighted least squares re-fit on Gauss sample points: IRLS for the L1 objective.
struct IrlsResult {
    std::vector<double> coef;
    bool converged = false;
};

IrlsResult irls(const LocalModel& model, const std::vector<LocalCell>& cells, std::vector<double> coef) {
    struct Sample {
        double t0, t1, w, v;
    };
    std::vector<Sample> samples;
    for (const auto& cell : cells) {
        const double r0 = 0.5 * (cell.hi[0] - cell.lo[0]), c0 = 0.5 * (cell.hi[0] + cell.lo[0]);
        const double r1 = 0.5 * (cell.hi[1] - cell.lo[1]), c1 = 0.5 * (cell.hi[1] + cell.lo[1]);
        for (std::size_t i = 0; i < 4; ++i) {
            if (model.n == 1) {
                samples.push_back({c0 + r0 * kGauss4Nodes[i], 0.0, kGauss4Weights[i] * r0, cell.value});
                continue;
            }
            for (std::size_t j = 0; j < 4; ++j)
                samples.push_back({c0 + r0 * kGauss4Nodes[i], c1 + r1 * kGauss4Nodes[j],
                                   kGauss4Weights[i] * kGauss4Weights[j] * r0 * r1, cell.value});
        }
    }
    const std::size_t d = model.basis.size();
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(d));
    for (std::size_t s = 0; s < samples.size(); ++s)
        for (std::size_t j = 0; j < d; ++j)
            phi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) =
                legendre_at(model.basis[j][0], samples[s].t0) *
                (model.n == 2 ? legendre_at(model.basis[j][1], samples[s].t1) : 1.0);

    LocalModel m = model;
    m.coef = coef;
    double prev = l1_objective(m, cells);
    IrlsResult best{coef, false};
    double best_val = prev;
    for (int it = 0; it < kIrlsMaxIterations; ++it) {
        Eigen::VectorXd w(static_cast<Eigen::Index>(samples.size()));
        Eigen::VectorXd v(static_cast<Eigen::Index>(samples.size()));
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const double r = samples[s].v - m.at(samples[s].t0, samples[s].t1);
            w(static_cast<Eigen::Index>(s)) = samples[s].w / std::max(std::abs(r), kIrlsResidualFloor);
            v(static_cast<Eigen::Index>(s)) = samples[s].v;
        }
        const Eigen::MatrixXd normal = phi.transpose() * w.asDiagonal() * phi;
        const Eigen::VectorXd rhs = phi.transpose() * w.asDiagonal() * v;
        const Eigen::VectorXd sol = normal.ldlt().solve(rhs);
        for (std::size_t j = 0; j < d; ++j) m.coef[j] = sol(static_cast<Eigen::Index>(j));
        const double cur = l1_objective(m, cells);
        if (cur < best_val) {
            best_val = cur;
            best.coef = m.coef;
        }
        if (prev - cur < kIrlsRelativeTol * prev) {
            best.converged = true;
            break;
        }
        prev = cur;
    }
    return best;
}

PolyFit to_fit(const LocalModel& m, int dimension, const CubeId& c, int k, int q) {
    PolyFit fit;
    fit.dimension = dimension;
    fit.cube = c;
    fit.degree_bound = k;
    fit.q = q;
    fit.basis = m.basis;
    fit.legendre = m.coef;
    fit.coeffs.assign(m.basis.size(), 0.0);

    const double h = side(c) / 2.0;
    const std::array<double, 2> center{(static_cast<double>(c.coords[0]) + 0.5) * side(c),
                                       (static_cast<double>(c.coords[1]) + 0.5) * side(c)};
    // P_a((x - center)/h) expanded in powers of x.
    auto expand = [&](int a, double cen) {
        const Poly1 p = legendre_poly(a);
        Poly1 out{};
        for (int i = 0; i <= a; ++i)
            for (int l = 0; l <= i; ++l)
                out[static_cast<std::size_t>(l)] +=
                    p[static_cast<std::size_t>(i)] * std::pow(h, -i) * binomial(i, l) * std::pow(-cen, i - l);
        return out;
    };
    for (std::size_t j = 0; j < m.basis.size(); ++j) {
        const Poly1 ax = expand(m.basis[j][0], center[0]);
        const Poly1 bx = dimension == 2 ? expand(m.basis[j][1], center[1]) : Poly1{1, 0, 0, 0, 0};
        for (std::size_t s = 0; s < m.basis.size(); ++s) {
            const auto& target = m.basis[s];
            fit.coeffs[s] += m.coef[j] * ax[static_cast<std::size_t>(target[0])] *
                             bx[static_cast<std::size_t>(target[1])];
        }
    }
    return fit;
}

LocalModel model_of(const PolyFit& fit) {
    LocalModel m = make_model(fit.dimension, fit.cube, fit.degree_bound);
    m.basis = fit.basis;
    m.coef = fit.legendre;
    return m;
}

void check_order(int k, int q) {
    if (k < 1 || k > 3) throw Error("polynomial order k must lie in [1,3], got " + std::to_string(k));
    if (q != 1 && q != 2) throw Error("error exponent q must be 1 or 2, got " + std::to_string(q));
}

PolyFit fit_median(const GridFunction& f, const CubeId& c) {
    const auto idx = cells_in(c, f.dimension(), f.depth());
    std::vector<double> vals;
    vals.reserve(idx.size());
    for (auto i : idx) vals.push_back(f[i]);
    std::sort(vals.begin(), vals.end());
    const double med = vals[(vals.size() - 1) / 2];
    double err = 0.0;
    for (double v : vals) err += std::abs(v - med);
    PolyFit fit = constant_fit(f.dimension(), c, med, 1);
    fit.error = err * f.cell_measure();
    return fit;
}

PolyFit fit_l1(const MomentTable& table, const CubeId& c, int k) {
    const GridFunction& f = table.function();
    const int n = f.dimension();
    const auto cells = local_cells(f, c);
    LocalModel model = make_model(n, c, k);

    // Candidates: the lower-order optimum (embedded) and the L2 projection.
    const PolyFit lower = k == 2 ? fit_median(f, c) : fit_l1(table, c, k - 1);
    std::vector<double> from_lower(model.basis.size(), 0.0);
    for (std::size_t j = 0; j < lower.basis.size(); ++j) from_lower[j] = lower.legendre[j];
    const auto l2 = project_l2(table, c, model);

    const IrlsResult iter = irls(model, cells, l2);

    auto objective = [&](const std::vector<double>& coef) {
        LocalModel m = model;
        m.coef = coef;
        return l1_objective(m, cells);
    };
    std::vector<double> start = iter.coef;
    double start_val = objective(start);
    for (const std::vector<double>* cand : std::array<const std::vector<double>*, 2>{&from_lower, &l2}) {
        const double v = objective(*cand);
        if (v < start_val) start_val = v, start = *cand;
    }

    double lo = cells.front().value, hi = lo;
    for (const auto& cell : cells) lo = std::min(lo, cell.value), hi = std::max(hi, cell.value);
    const double step = 0.1 * std::max(hi - lo, 1e-9 * std::max(1.0, std::abs(hi)));
    if (start_val > 0.0) start = nelder_mead(objective, start, step, 4000 * static_cast<int>(model.basis.size()));

    model.coef = start;
    PolyFit fit = to_fit(model, n, c, k, 1);
    fit.error = objective(start);
    fit.approximate = !iter.converged;

    // Dual certificate: h = sign(r) - sum a_j phi_j is orthogonal to the polynomials,
    // so int f h / ||h||_inf bounds E_k from below.
    if (fit.error == 0.0) {
        fit.near_best_factor = 1.0;
        return fit;
    }
    double correction = 0.0, sup_h = 1.0;
    for (std::size_t j = 0; j < model.basis.size(); ++j) {
        double b = 0.0, rphi = 0.0;
        const auto& ab = model.basis[j];
        for (const auto& cell : cells) {
            b += cell_sign_basis(model, cell, j);
            rphi += cell_gauss(model, cell, [&](double t0, double t1) {
                return (cell.value - model.at(t0, t1)) * legendre_at(ab[0], t0) * (n == 2 ? legendre_at(ab[1], t1) : 1.0);
            });
        }
        double norm2 = model.jacobian * 2.0 / (2 * ab[0] + 1);
        if (n == 2) norm2 *= 2.0 / (2 * ab[1] + 1);
        const double a = b / norm2;
        correction += a * rphi;
        sup_h += std::abs(a);
    }
    const double lower_bound = (fit.error - correction) / sup_h;
    fit.near_best_factor =
        lower_bound > 0.0 ? std::max(1.0, fit.error / lower_bound) : std::numeric_limits<double>::infinity();
    if (!std::isfinite(fit.near_best_factor)) fit.approximate = true;
    return fit;
}

}  // namespace

double PolyFit::evaluate(double x0, double x1) const {
    const double h = side(cube) / 2.0;
    const double t0 = (x0 - (static_cast<double>(cube.coords[0]) + 0.5) * side(cube)) / h;
    const double t1 = (x1 - (static_cast<double>(cube.coords[1]) + 0.5) * side(cube)) / h;
    double s = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j)
        s += legendre[j] * legendre_at(basis[j][0], t0) * (dimension == 2 ? legendre_at(basis[j][1], t1) : 1.0);
    return s;
}

PolyFit constant_fit(int dimension, const CubeId& c, double value, int q) {
    PolyFit fit;
    fit.dimension = dimension;
    fit.cube = c;
    fit.degree_bound = 1;
    fit.q = q;
    fit.basis = {MultiIndex{0, 0}};
    fit.legendre = {value};
    fit.coeffs = {value};
    return fit;
}

PolyFit best_fit(const MomentTable& table, const CubeId& c, int k, int q) {
    check_order(k, q);
    const GridFunction& f = table.function();
    require_valid(c, f.dimension(), f.depth());
    if (q == 1 && k == 1) return fit_median(f, c);
    if (q == 1) return fit_l1(table, c, k);

    LocalModel model = make_model(f.dimension(), c, k);
    model.coef = project_l2(table, c, model);
    PolyFit fit = to_fit(model, f.dimension(), c, k, 2);
    double sq = 0.0;
    for (const auto& cell : local_cells(f, c)) sq += cell_square(model, cell);
    fit.error = std::sqrt(sq);
    return fit;
}

PolyFit best_fit(const GridFunction& f, const CubeId& c, int k, int q) {
    return best_fit(MomentTable(f, 4), c, k, q);
}

double local_error(const MomentTable& table, const CubeId& c, int k, int q) {
    if (k == 0) {
        if (q != 1 && q != 2) throw Error("error exponent q must be 1 or 2");
        const double v = table.abs_power_integral(c, q);
        return q == 1 ? v : std::sqrt(v);
    }
    return best_fit(table, c, k, q).error;
}

double scale_exponent(int dimension, int q, double lambda, ExponentConvention convention) {
    const double n = dimension;
    return convention == ExponentConvention::V ? lambda / n - 1.0 / q : lambda / (n * q) - 1.0 / q;
}

double scaled_error(const MomentTable& table, const CubeId& c, int k, int q, double lambda,
                    ExponentConvention convention) {
    const int n = table.function().dimension();
    return std::pow(measure(c, n), scale_exponent(n, q, lambda, convention)) * local_error(table, c, k, q);
}

double scaled_error(const GridFunction& f, const CubeId& c, int k, int q, double lambda,
                    ExponentConvention convention) {
    return scaled_error(MomentTable(f, 4), c, k, q, lambda, convention);
}

std::vector<double> residual_cell_integrals(const GridFunction& f, const PolyFit& m, int q) {
    if (q != 1 && q != 2) throw Error("error exponent q must be 1 or 2");
    if (m.dimension != f.dimension()) throw Error("polynomial and grid dimensions differ");
    require_valid(m.cube, f.dimension(), f.depth());
    const LocalModel model = model_of(m);
    std::vector<double> out;
    for (const auto& cell : local_cells(f, m.cube))
        out.push_back(q == 1 ? cell_abs(model, cell) : cell_square(model, cell));
    return out;
}

double residual_norm(const GridFunction& f, const PolyFit& m, int q) {
    const auto parts = residual_cell_integrals(f, m, q);
    const double total = std::accumulate(parts.begin(), parts.end(), 0.0);
    return q == 1 ? total : std::sqrt(total);
}

}  // namespace oscnorm
