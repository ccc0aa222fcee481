#include "fpl/norms.hpp"

#include "fpl/errors.hpp"
#include "fpl/format.hpp"
#include "fpl/rng.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

namespace fpl {

namespace {

constexpr std::uint64_t kSupSeed = 0x7a62c1d54e9f03b1ULL;

// ---------------------------------------------------------------- smoothing

inline double soft_abs(double u, double d) {
    if (d == 0.0)
        return std::fabs(u);
    return std::sqrt(u * u + d * d) - d;
}

inline double soft_abs_d(double u, double d) {
    if (d == 0.0)
        return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    return u / std::sqrt(u * u + d * d);
}

inline std::uint32_t all_bits(int n) {
    return n >= 32 ? 0xffffffffu : ((1u << n) - 1u);
}

// ------------------------------------------------------------------- eval

double eval_rec(const NormSpec& s, const double* z, double d);

double qnorm_eval(double q, const double* z, int n, double d) {
    if (q == 1.0) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            s += soft_abs(z[i], d);
        return s;
    }
    if (q == 2.0) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = soft_abs(z[i], d);
            s += a * a;
        }
        return std::sqrt(s);
    }
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        s += std::pow(soft_abs(z[i], d), q);
    return std::pow(s, 1.0 / q);
}

double combine2(double q, double a, double b) {
    // (a^q + b^q)^(1/q) for a,b >= 0
    if (q == 1.0)
        return a + b;
    if (q == 2.0)
        return std::sqrt(a * a + b * b);
    return std::pow(std::pow(a, q) + std::pow(b, q), 1.0 / q);
}

double eval_rec(const NormSpec& s, const double* z, double d) {
    const int n = s.dimension;
    if (const auto* f = std::get_if<QNormFamily>(&s.family))
        return qnorm_eval(f->q, z, n, d);
    if (const auto* f = std::get_if<MatrixQNormFamily>(&s.family)) {
        std::array<double, kMaxDim> y{};
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                acc += f->a[static_cast<std::size_t>(i) * n + j] * z[j];
            y[static_cast<std::size_t>(i)] = acc;
        }
        return qnorm_eval(f->q, y.data(), n, d);
    }
    if (const auto* f = std::get_if<BlockNormFamily>(&s.family)) {
        double acc = 0.0;
        int off = 0;
        for (std::size_t b = 0; b < f->sizes.size(); ++b) {
            const int m = f->sizes[b];
            const double bn = qnorm_eval(f->inner_exps[b], z + off, m, d);
            acc += f->weights[b] * (f->q == 1.0 ? bn : std::pow(bn, f->q));
            off += m;
        }
        return f->q == 1.0 ? acc : std::pow(acc, 1.0 / f->q);
    }
    if (const auto* f = std::get_if<SplitNormFamily>(&s.family)) {
        const int r = f->axis->dimension;
        const double a = eval_rec(*f->axis, z, d);
        const double b = eval_rec(*f->cross, z + r, d);
        return combine2(f->q, a, b);
    }
    if (const auto* f = std::get_if<ScaledEuclideanFamily>(&s.family))
        return f->t * qnorm_eval(2.0, z, n, d);
    if (const auto* f = std::get_if<CrossSliceFamily>(&s.family)) {
        std::array<double, kMaxDim> lift{};
        for (int i = 0; i < f->skip; ++i)
            lift[static_cast<std::size_t>(i)] = 0.0;
        for (int i = 0; i < n; ++i)
            lift[static_cast<std::size_t>(f->skip + i)] = z[i];
        return eval_rec(*f->inner, lift.data(), d);
    }
    const auto& f = std::get<CrossEuclideanFamily>(s.family);
    return qnorm_eval(2.0, z + f.from, n - f.from, d);
}

// ------------------------------------------------------------------- grad
//
// `sing` collects, in exact mode, the components whose partial derivative is
// undefined at z (sign of a zero site under an effective exponent of one).
// Components not marked are valid partial derivatives even when others are
// marked; cross-section restrictions rely on that.

void grad_rec(const NormSpec& s, const double* z, double d, double* out, std::uint32_t& sing);

void qnorm_grad(double q, const double* z, int n, double d, double h, double* out,
                std::uint32_t& sing) {
    if (h == 0.0) {
        for (int i = 0; i < n; ++i)
            out[i] = 0.0;
        if (d == 0.0)
            sing |= all_bits(n);
        return;
    }
    if (q == 1.0) {
        for (int i = 0; i < n; ++i) {
            out[i] = soft_abs_d(z[i], d);
            if (d == 0.0 && z[i] == 0.0)
                sing |= (1u << i);
        }
        return;
    }
    for (int i = 0; i < n; ++i) {
        const double a = soft_abs(z[i], d);
        const double r = a / h;
        out[i] = (a == 0.0 ? 0.0 : std::pow(r, q - 1.0)) * soft_abs_d(z[i], d);
    }
}

void grad_rec(const NormSpec& s, const double* z, double d, double* out, std::uint32_t& sing) {
    const int n = s.dimension;
    if (const auto* f = std::get_if<QNormFamily>(&s.family)) {
        qnorm_grad(f->q, z, n, d, qnorm_eval(f->q, z, n, d), out, sing);
        return;
    }
    if (const auto* f = std::get_if<MatrixQNormFamily>(&s.family)) {
        std::array<double, kMaxDim> y{}, gy{};
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                acc += f->a[static_cast<std::size_t>(i) * n + j] * z[j];
            y[static_cast<std::size_t>(i)] = acc;
        }
        std::uint32_t sy = 0;
        qnorm_grad(f->q, y.data(), n, d, qnorm_eval(f->q, y.data(), n, d), gy.data(), sy);
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += f->a[static_cast<std::size_t>(i) * n + j] * gy[static_cast<std::size_t>(i)];
            out[j] = acc;
        }
        if (sy != 0 && d == 0.0) {
            for (int i = 0; i < n; ++i) {
                if (!(sy & (1u << i)))
                    continue;
                for (int j = 0; j < n; ++j)
                    if (f->a[static_cast<std::size_t>(i) * n + j] != 0.0)
                        sing |= (1u << j);
            }
        }
        return;
    }
    if (const auto* f = std::get_if<BlockNormFamily>(&s.family)) {
        const double h = eval_rec(s, z, d);
        if (h == 0.0) {
            for (int i = 0; i < n; ++i)
                out[i] = 0.0;
            if (d == 0.0)
                sing |= all_bits(n);
            return;
        }
        int off = 0;
        for (std::size_t b = 0; b < f->sizes.size(); ++b) {
            const int m = f->sizes[b];
            const double e = f->inner_exps[b];
            const double bn = qnorm_eval(e, z + off, m, d);
            if (bn == 0.0) {
                // whole block at the smoothed origin: contribution vanishes,
                // but for q = 1 the exact norm keeps a kink there
                for (int j = 0; j < m; ++j)
                    out[off + j] = 0.0;
                if (d == 0.0 && f->q == 1.0)
                    for (int j = 0; j < m; ++j)
                        sing |= (1u << (off + j));
                off += m;
                continue;
            }
            const double coef =
                f->weights[b] * (f->q == 1.0 ? 1.0 : std::pow(bn / h, f->q - 1.0));
            for (int j = 0; j < m; ++j) {
                const double a = soft_abs(z[off + j], d);
                const double rj = (e == 1.0 ? 1.0 : (a == 0.0 ? 0.0 : std::pow(a / bn, e - 1.0)));
                out[off + j] = coef * rj * soft_abs_d(z[off + j], d);
                if (d == 0.0 && e == 1.0 && z[off + j] == 0.0)
                    sing |= (1u << (off + j));
            }
            off += m;
        }
        return;
    }
    if (const auto* f = std::get_if<SplitNormFamily>(&s.family)) {
        const int r = f->axis->dimension;
        const int c = f->cross->dimension;
        const double a = eval_rec(*f->axis, z, d);
        const double b = eval_rec(*f->cross, z + r, d);
        const double h = combine2(f->q, a, b);
        if (h == 0.0) {
            for (int i = 0; i < n; ++i)
                out[i] = 0.0;
            if (d == 0.0)
                sing |= all_bits(n);
            return;
        }
        if (a == 0.0) {
            for (int i = 0; i < r; ++i)
                out[i] = 0.0;
            if (d == 0.0 && f->q == 1.0)
                sing |= all_bits(r);
        } else {
            const double coef = f->q == 1.0 ? 1.0 : std::pow(a / h, f->q - 1.0);
            std::uint32_t sa = 0;
            grad_rec(*f->axis, z, d, out, sa);
            for (int i = 0; i < r; ++i)
                out[i] *= coef;
            sing |= sa & all_bits(r);
        }
        if (b == 0.0) {
            for (int i = 0; i < c; ++i)
                out[r + i] = 0.0;
            if (d == 0.0 && f->q == 1.0)
                sing |= all_bits(c) << r;
        } else {
            const double coef = f->q == 1.0 ? 1.0 : std::pow(b / h, f->q - 1.0);
            std::array<double, kMaxDim> gc{};
            std::uint32_t sc = 0;
            grad_rec(*f->cross, z + r, d, gc.data(), sc);
            for (int i = 0; i < c; ++i)
                out[r + i] = coef * gc[static_cast<std::size_t>(i)];
            sing |= (sc & all_bits(c)) << r;
        }
        return;
    }
    if (const auto* f = std::get_if<ScaledEuclideanFamily>(&s.family)) {
        const double h = qnorm_eval(2.0, z, n, d);
        qnorm_grad(2.0, z, n, d, h, out, sing);
        for (int i = 0; i < n; ++i)
            out[i] *= f->t;
        return;
    }
    if (const auto* f = std::get_if<CrossSliceFamily>(&s.family)) {
        std::array<double, kMaxDim> lift{}, gfull{};
        for (int i = 0; i < n; ++i)
            lift[static_cast<std::size_t>(f->skip + i)] = z[i];
        std::uint32_t sf = 0;
        grad_rec(*f->inner, lift.data(), d, gfull.data(), sf);
        for (int i = 0; i < n; ++i)
            out[i] = gfull[static_cast<std::size_t>(f->skip + i)];
        sing |= (sf >> f->skip) & all_bits(n);
        return;
    }
    const auto& f = std::get<CrossEuclideanFamily>(s.family);
    const int tail = n - f.from;
    for (int i = 0; i < f.from; ++i)
        out[i] = 0.0;
    std::uint32_t st = 0;
    qnorm_grad(2.0, z + f.from, tail, d, qnorm_eval(2.0, z + f.from, tail, d), out + f.from, st);
    sing |= (st & all_bits(tail)) << f.from;
}

// ------------------------------------------------------------ sphere search

// Greedy maximization of `obj` over the unit sphere: fixed candidate sweep,
// then a spherical cap shrinking by the golden ratio around the incumbent.
double sphere_maximize(const std::function<double(const double*)>& obj, int n, int base_samples,
                       int refine_steps, std::uint64_t seed,
                       const std::vector<std::vector<double>>& extra) {
    Rng rng(seed);
    std::vector<double> best(static_cast<std::size_t>(n), 0.0);
    best[0] = 1.0;
    double best_val = obj(best.data());

    auto consider = [&](const double* x) {
        const double v = obj(x);
        if (v > best_val) {
            best_val = v;
            std::copy(x, x + n, best.begin());
        }
    };

    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::fill(x.begin(), x.end(), 0.0);
        x[static_cast<std::size_t>(i)] = 1.0;
        consider(x.data());
        x[static_cast<std::size_t>(i)] = -1.0;
        consider(x.data());
    }
    for (const auto& c : extra)
        if (static_cast<int>(c.size()) == n)
            consider(c.data());
    for (int s = 0; s < base_samples; ++s) {
        const auto u = rng.unit_vector(n);
        consider(u.data());
    }

    const int cap_samples = 64;
    double alpha = 0.35;
    for (int step = 0; step < refine_steps; ++step) {
        for (int k = 0; k < cap_samples; ++k) {
            const auto v = rng.normal_vec(n);
            // tangent component at the incumbent
            double dot = 0.0;
            for (int i = 0; i < n; ++i)
                dot += v[static_cast<std::size_t>(i)] * best[static_cast<std::size_t>(i)];
            double tn = 0.0;
            for (int i = 0; i < n; ++i) {
                x[static_cast<std::size_t>(i)] =
                    v[static_cast<std::size_t>(i)] - dot * best[static_cast<std::size_t>(i)];
                tn += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            }
            if (tn < 1e-280)
                continue;
            const double theta = alpha * rng.uniform01();
            const double ct = std::cos(theta), st = std::sin(theta) / std::sqrt(tn);
            double xn = 0.0;
            for (int i = 0; i < n; ++i) {
                x[static_cast<std::size_t>(i)] =
                    ct * best[static_cast<std::size_t>(i)] + st * x[static_cast<std::size_t>(i)];
                xn += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            }
            // keep candidates exactly on the sphere: for objectives that are
            // not scale-invariant a tiny radial drift would otherwise be
            // amplified by the greedy acceptance
            const double inv = 1.0 / std::sqrt(xn);
            for (int i = 0; i < n; ++i)
                x[static_cast<std::size_t>(i)] *= inv;
            consider(x.data());
        }
        alpha *= 0.6180339887498949;
    }
    return best_val;
}

bool has_analytic_dual(const NormSpec& s) {
    return std::holds_alternative<QNormFamily>(s.family) ||
           std::holds_alternative<MatrixQNormFamily>(s.family) ||
           std::holds_alternative<ScaledEuclideanFamily>(s.family);
}

double conjugate_qnorm(double q, const double* y, int n) {
    if (q == 1.0) {
        double m = 0.0;
        for (int i = 0; i < n; ++i)
            m = std::max(m, std::fabs(y[i]));
        return m;
    }
    return qnorm_eval(q / (q - 1.0), y, n, 0.0);
}

double dual_eval_impl(const NormSpec& spec, const double* xi) {
    const int n = spec.dimension;
    if (const auto* f = std::get_if<QNormFamily>(&spec.family))
        return conjugate_qnorm(f->q, xi, n);
    if (const auto* f = std::get_if<MatrixQNormFamily>(&spec.family)) {
        std::array<double, kMaxDim> y{};
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                acc += f->a_inv_t[static_cast<std::size_t>(i) * n + j] * xi[j];
            y[static_cast<std::size_t>(i)] = acc;
        }
        return conjugate_qnorm(f->q, y.data(), n);
    }
    if (const auto* f = std::get_if<ScaledEuclideanFamily>(&spec.family))
        return qnorm_eval(2.0, xi, n, 0.0) / f->t;
    if (std::holds_alternative<CrossEuclideanFamily>(spec.family))
        throw input_error("dual_eval: cross-gradient gauge has no finite dual");

    // generic: sup <xi,x>/H(x) with the exact gauge
    NormSpec exact = spec.with_smoothing(0.0);
    double xin = 0.0;
    for (int i = 0; i < n; ++i)
        xin += xi[i] * xi[i];
    if (xin == 0.0)
        return 0.0;
    std::vector<std::vector<double>> extra(1, std::vector<double>(static_cast<std::size_t>(n)));
    const double inv = 1.0 / std::sqrt(xin);
    for (int i = 0; i < n; ++i)
        extra[0][static_cast<std::size_t>(i)] = xi[i] * inv;
    auto obj = [&exact, xi, n](const double* x) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i)
            dot += xi[i] * x[i];
        return dot / eval_rec(exact, x, 0.0);
    };
    return sphere_maximize(obj, n, 10000 * n, 20, kSupSeed, extra);
}

// --------------------------------------------------------------- utilities

std::vector<double> invert_dense(const std::vector<double>& a, int n) {
    std::vector<double> m = a;
    std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        inv[static_cast<std::size_t>(i) * n + i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m[static_cast<std::size_t>(r) * n + col]) >
                std::fabs(m[static_cast<std::size_t>(piv) * n + col]))
                piv = r;
        if (std::fabs(m[static_cast<std::size_t>(piv) * n + col]) < 1e-14)
            throw input_error("matrix norm: matrix is singular");
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(m[static_cast<std::size_t>(piv) * n + j],
                          m[static_cast<std::size_t>(col) * n + j]);
                std::swap(inv[static_cast<std::size_t>(piv) * n + j],
                          inv[static_cast<std::size_t>(col) * n + j]);
            }
        const double d = m[static_cast<std::size_t>(col) * n + col];
        for (int j = 0; j < n; ++j) {
            m[static_cast<std::size_t>(col) * n + j] /= d;
            inv[static_cast<std::size_t>(col) * n + j] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col)
                continue;
            const double f = m[static_cast<std::size_t>(r) * n + col];
            if (f == 0.0)
                continue;
            for (int j = 0; j < n; ++j) {
                m[static_cast<std::size_t>(r) * n + j] -=
                    f * m[static_cast<std::size_t>(col) * n + j];
                inv[static_cast<std::size_t>(r) * n + j] -=
                    f * inv[static_cast<std::size_t>(col) * n + j];
            }
        }
    }
    return inv;
}

void check_dim(const NormSpec& s, std::size_t got, const char* who) {
    if (static_cast<int>(got) != s.dimension)
        throw input_error(std::string(who) + ": vector has " + std::to_string(got) +
                          " entries, gauge dimension is " + std::to_string(s.dimension));
}

void check_exponent(double q, const char* who) {
    if (!(q >= 1.0) || !std::isfinite(q))
        throw parameter_error(std::string(who) + ": exponent must lie in [1, inf)");
}

} // namespace

// ---------------------------------------------------------------- NormSpec

NormSpec NormSpec::with_smoothing(double eps, double scale) const {
    if (eps < 0.0 || scale < 0.0)
        throw parameter_error("with_smoothing: eps and scale must be nonnegative");
    NormSpec c = *this;
    c.smoothing_eps = eps;
    c.smoothing_scale = scale;
    return c;
}

double NormSpec::min_exponent() const {
    if (const auto* f = std::get_if<QNormFamily>(&family))
        return f->q;
    if (const auto* f = std::get_if<MatrixQNormFamily>(&family))
        return f->q;
    if (const auto* f = std::get_if<BlockNormFamily>(&family)) {
        double m = f->q;
        for (double e : f->inner_exps)
            m = std::min(m, e);
        return m;
    }
    if (const auto* f = std::get_if<SplitNormFamily>(&family))
        return std::min({f->q, f->axis->min_exponent(), f->cross->min_exponent()});
    if (std::holds_alternative<ScaledEuclideanFamily>(family))
        return 2.0;
    if (const auto* f = std::get_if<CrossSliceFamily>(&family))
        return f->inner->min_exponent();
    return 2.0;
}

bool NormSpec::has_unit_exponent() const { return min_exponent() == 1.0; }

// --------------------------------------------------------------- factories

NormSpec make_qnorm(double q, int n) {
    check_exponent(q, "qnorm");
    if (n < 1 || n > kMaxDim)
        throw input_error("qnorm: dimension out of range");
    return NormSpec{QNormFamily{q}, n};
}

NormSpec make_matq(double q, int n, std::vector<double> a_rowmajor) {
    check_exponent(q, "matq");
    if (n < 1 || n > kMaxDim)
        throw input_error("matq: dimension out of range");
    if (a_rowmajor.size() != static_cast<std::size_t>(n) * n)
        throw input_error("matq: matrix must be n x n");
    auto inv = invert_dense(a_rowmajor, n);
    std::vector<double> inv_t(inv.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            inv_t[static_cast<std::size_t>(i) * n + j] = inv[static_cast<std::size_t>(j) * n + i];
    return NormSpec{MatrixQNormFamily{q, n, std::move(a_rowmajor), std::move(inv_t)}, n};
}

NormSpec make_block(double q, std::vector<int> sizes, std::vector<double> inner_exps,
                    std::vector<double> weights) {
    check_exponent(q, "block");
    if (sizes.empty() || sizes.size() != inner_exps.size() || sizes.size() != weights.size())
        throw input_error("block: sizes, exponents and weights must have equal count");
    int n = 0;
    for (int m : sizes) {
        if (m < 1)
            throw input_error("block: block sizes must be positive");
        n += m;
    }
    if (n > kMaxDim)
        throw input_error("block: dimension out of range");
    for (double e : inner_exps)
        check_exponent(e, "block");
    for (double w : weights)
        if (!(w > 0.0))
            throw parameter_error("block: weights must be positive");
    return NormSpec{BlockNormFamily{q, std::move(sizes), std::move(inner_exps),
                                    std::move(weights)},
                    n};
}

NormSpec make_split(double q, NormSpec axis, NormSpec cross) {
    check_exponent(q, "split");
    const int n = axis.dimension + cross.dimension;
    if (n > kMaxDim)
        throw input_error("split: dimension out of range");
    // sub-gauges are stored exact; the top-level smoothing drives all sites
    axis.smoothing_eps = 0.0;
    cross.smoothing_eps = 0.0;
    return NormSpec{SplitNormFamily{q, std::make_shared<const NormSpec>(std::move(axis)),
                                    std::make_shared<const NormSpec>(std::move(cross))},
                    n};
}

NormSpec make_eucl(double t, int n) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw parameter_error("eucl: scale must be positive");
    if (n < 1 || n > kMaxDim)
        throw input_error("eucl: dimension out of range");
    return NormSpec{ScaledEuclideanFamily{t}, n};
}

NormSpec cross_restriction(const NormSpec& spec, int axis_dim) {
    if (axis_dim < 1 || axis_dim >= spec.dimension)
        throw input_error("cross_restriction: axis dimension out of range");
    const int nc = spec.dimension - axis_dim;
    if (const auto* f = std::get_if<QNormFamily>(&spec.family)) {
        NormSpec r = make_qnorm(f->q, nc);
        return r.with_smoothing(spec.smoothing_eps, spec.smoothing_scale);
    }
    if (const auto* f = std::get_if<ScaledEuclideanFamily>(&spec.family)) {
        NormSpec r = make_eucl(f->t, nc);
        return r.with_smoothing(spec.smoothing_eps, spec.smoothing_scale);
    }
    if (const auto* f = std::get_if<SplitNormFamily>(&spec.family)) {
        if (f->axis->dimension == axis_dim) {
            NormSpec r = *f->cross;
            return r.with_smoothing(spec.smoothing_eps, spec.smoothing_scale);
        }
    }
    NormSpec inner = spec.with_smoothing(0.0);
    NormSpec r{CrossSliceFamily{std::make_shared<const NormSpec>(std::move(inner)), axis_dim}, nc,
               spec.smoothing_eps, spec.smoothing_scale};
    return r;
}

NormSpec make_cross_euclidean(int axis_dim, int total_dim) {
    if (axis_dim < 1 || axis_dim >= total_dim || total_dim > kMaxDim)
        throw input_error("cross gauge: dimensions out of range");
    return NormSpec{CrossEuclideanFamily{axis_dim}, total_dim};
}

// --------------------------------------------------------------- core ops

double norm_eval(const NormSpec& spec, std::span<const double> z) {
    check_dim(spec, z.size(), "norm_eval");
    return eval_rec(spec, z.data(), spec.delta());
}

bool try_norm_grad(const NormSpec& spec, const double* z, double* out) {
    std::uint32_t sing = 0;
    grad_rec(spec, z, spec.delta(), out, sing);
    return !(spec.exact() && sing != 0);
}

void norm_grad(const NormSpec& spec, std::span<const double> z, std::span<double> out) {
    check_dim(spec, z.size(), "norm_grad");
    check_dim(spec, out.size(), "norm_grad(out)");
    if (!try_norm_grad(spec, z.data(), out.data()))
        throw singular_point_error("norm_grad: gauge not differentiable here in exact mode");
}

bool try_flux(const NormSpec& spec, double p, const double* z, double* out) {
    const double d = spec.delta();
    const double h = eval_rec(spec, z, d);
    const int n = spec.dimension;
    if (h == 0.0) { // continuous extension by zero (valid for p > 1)
        for (int i = 0; i < n; ++i)
            out[i] = 0.0;
        return true;
    }
    std::uint32_t sing = 0;
    grad_rec(spec, z, d, out, sing);
    if (spec.exact() && sing != 0)
        return false;
    const double scale = p == 2.0 ? h : std::pow(h, p - 1.0);
    for (int i = 0; i < n; ++i)
        out[i] *= scale;
    return true;
}

void flux(const NormSpec& spec, double p, std::span<const double> z, std::span<double> out) {
    if (!(p > 1.0))
        throw parameter_error("flux: requires p > 1");
    check_dim(spec, z.size(), "flux");
    check_dim(spec, out.size(), "flux(out)");
    if (!try_flux(spec, p, z.data(), out.data()))
        throw singular_point_error("flux: gauge not differentiable here in exact mode");
}

double dual_eval(const NormSpec& spec, std::span<const double> xi) {
    check_dim(spec, xi.size(), "dual_eval");
    return dual_eval_impl(spec, xi.data());
}

double sup_linear_ratio(const std::function<double(std::span<const double>)>& gauge, int n,
                        std::span<const double> xi, int base_samples, int refine_steps,
                        std::uint64_t seed) {
    if (static_cast<int>(xi.size()) != n)
        throw input_error("sup_linear_ratio: dimension mismatch");
    double xin = 0.0;
    for (double v : xi)
        xin += v * v;
    if (xin == 0.0)
        return 0.0;
    std::vector<std::vector<double>> extra(1, std::vector<double>(xi.begin(), xi.end()));
    const double inv = 1.0 / std::sqrt(xin);
    for (auto& v : extra[0])
        v *= inv;
    auto obj = [&gauge, &xi, n](const double* x) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i)
            dot += xi[static_cast<std::size_t>(i)] * x[i];
        return dot / gauge(std::span<const double>(x, static_cast<std::size_t>(n)));
    };
    return sphere_maximize(obj, n, base_samples, refine_steps, seed, extra);
}

// ------------------------------------------------------------ theta bounds

ThetaBounds theta_bounds(const NormSpec& spec, int probe_count) {
    const int n = spec.dimension;
    if (probe_count < 2 * n)
        throw input_error("theta_bounds: probe_count must be at least 2*dim");
    NormSpec exact = spec.with_smoothing(0.0);

    double c2 = 0.0;
    {
        std::array<double, kMaxDim> e{};
        for (int i = 0; i < n; ++i) {
            std::fill(e.begin(), e.end(), 0.0);
            e[static_cast<std::size_t>(i)] = 1.0;
            const double h = eval_rec(exact, e.data(), 0.0);
            c2 += h * h;
        }
    }

    ThetaBounds tb{};
    tb.grad_bound_c = std::sqrt(c2);
    if (const auto* f = std::get_if<QNormFamily>(&exact.family)) {
        const double v = std::pow(static_cast<double>(n), 1.0 / f->q - 0.5);
        tb.theta1 = std::min(1.0, v);
        tb.theta2 = std::max(1.0, v);
        return tb;
    }
    if (const auto* f = std::get_if<ScaledEuclideanFamily>(&exact.family)) {
        tb.theta1 = tb.theta2 = f->t;
        return tb;
    }
    std::vector<std::vector<double>> extra(1, std::vector<double>(static_cast<std::size_t>(n),
                                                                  1.0 / std::sqrt(double(n))));
    auto hi = [&exact](const double* x) { return eval_rec(exact, x, 0.0); };
    auto lo = [&exact](const double* x) { return -eval_rec(exact, x, 0.0); };
    tb.theta2 = sphere_maximize(hi, n, probe_count, 20, kSupSeed ^ 0x11, extra);
    tb.theta1 = -sphere_maximize(lo, n, probe_count, 20, kSupSeed ^ 0x22, extra);
    return tb;
}

// ------------------------------------------------------------ axiom checks

double AxiomReport::max_violation() const {
    return std::max({homogeneity, subadditivity, euler, hoelder, dual_identity});
}

namespace {

// Shared base direction set so one axiom sweep does not re-derive the dual
// search lattice for every sample (the gauge values on it are fixed).
struct DualSampler {
    const NormSpec spec; // exact
    int n;
    std::vector<double> dirs;  // base_samples x n
    std::vector<double> hvals; // gauge on each base direction

    DualSampler(const NormSpec& s, int base_samples, std::uint64_t seed)
        : spec(s.with_smoothing(0.0)), n(s.dimension) {
        Rng rng(seed);
        const int extra = 2 * n; // signed coordinate directions
        dirs.resize(static_cast<std::size_t>(base_samples + extra) * n, 0.0);
        for (int i = 0; i < n; ++i) {
            dirs[static_cast<std::size_t>(2 * i) * n + i] = 1.0;
            dirs[static_cast<std::size_t>(2 * i + 1) * n + i] = -1.0;
        }
        for (int s2 = 0; s2 < base_samples; ++s2) {
            const auto u = rng.unit_vector(n);
            std::copy(u.begin(), u.end(),
                      dirs.begin() + static_cast<std::ptrdiff_t>(extra + s2) * n);
        }
        const std::size_t count = dirs.size() / static_cast<std::size_t>(n);
        hvals.resize(count);
        for (std::size_t k = 0; k < count; ++k)
            hvals[k] = eval_rec(spec, dirs.data() + k * static_cast<std::size_t>(n), 0.0);
    }

    double eval(const double* xi, int refine_steps, std::uint64_t refine_seed) const {
        const std::size_t count = hvals.size();
        double best_val = -1e300;
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < count; ++k) {
            double dot = 0.0;
            const double* x = dirs.data() + k * static_cast<std::size_t>(n);
            for (int i = 0; i < n; ++i)
                dot += xi[i] * x[i];
            const double v = dot / hvals[k];
            if (v > best_val) {
                best_val = v;
                best_k = k;
            }
        }
        std::vector<double> best(dirs.begin() + static_cast<std::ptrdiff_t>(best_k) * n,
                                 dirs.begin() + static_cast<std::ptrdiff_t>(best_k + 1) * n);
        // candidate xi-hat, then cap refinement around the incumbent
        auto ratio = [this, xi](const double* x) {
            double dot = 0.0;
            for (int i = 0; i < n; ++i)
                dot += xi[i] * x[i];
            return dot / eval_rec(spec, x, 0.0);
        };
        double xin = 0.0;
        for (int i = 0; i < n; ++i)
            xin += xi[i] * xi[i];
        std::vector<double> x(static_cast<std::size_t>(n));
        if (xin > 0.0) {
            const double inv = 1.0 / std::sqrt(xin);
            for (int i = 0; i < n; ++i)
                x[static_cast<std::size_t>(i)] = xi[i] * inv;
            const double v = ratio(x.data());
            if (v > best_val) {
                best_val = v;
                best = x;
            }
        }
        Rng rng(refine_seed);
        double alpha = 0.35;
        for (int step = 0; step < refine_steps; ++step) {
            for (int k = 0; k < 64; ++k) {
                const auto v = rng.normal_vec(n);
                double dot = 0.0;
                for (int i = 0; i < n; ++i)
                    dot += v[static_cast<std::size_t>(i)] * best[static_cast<std::size_t>(i)];
                double tn = 0.0;
                for (int i = 0; i < n; ++i) {
                    x[static_cast<std::size_t>(i)] =
                        v[static_cast<std::size_t>(i)] - dot * best[static_cast<std::size_t>(i)];
                    tn += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
                }
                if (tn < 1e-280)
                    continue;
                const double theta = alpha * rng.uniform01();
                const double ct = std::cos(theta), st = std::sin(theta) / std::sqrt(tn);
                double xn = 0.0;
                for (int i = 0; i < n; ++i) {
                    x[static_cast<std::size_t>(i)] = ct * best[static_cast<std::size_t>(i)] +
                                                     st * x[static_cast<std::size_t>(i)];
                    xn += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
                }
                const double inv = 1.0 / std::sqrt(xn);
                for (int i = 0; i < n; ++i)
                    x[static_cast<std::size_t>(i)] *= inv;
                const double val = ratio(x.data());
                if (val > best_val) {
                    best_val = val;
                    best = x;
                }
            }
            alpha *= 0.6180339887498949;
        }
        return best_val;
    }
};

} // namespace

AxiomReport check_norm_axioms(const NormSpec& spec, int samples, std::uint64_t seed) {
    if (!spec.exact())
        throw input_error("check_norm_axioms: exact mode required");
    if (samples < 1)
        throw input_error("check_norm_axioms: need at least one sample");
    const int n = spec.dimension;

    const bool analytic = has_analytic_dual(spec);
    std::unique_ptr<DualSampler> sampler;
    if (!analytic)
        sampler = std::make_unique<DualSampler>(spec, 10000 * n, kSupSeed);
    auto dual_of = [&](const double* xi) {
        if (analytic)
            return dual_eval_impl(spec, xi);
        return sampler->eval(xi, 20, kSupSeed ^ 0x5a5a5a5aULL);
    };

    std::vector<double> vh(static_cast<std::size_t>(samples), 0.0), vs = vh, ve = vh, vo = vh,
                        vd = vh;

#pragma omp parallel for schedule(static)
    for (int s = 0; s < samples; ++s) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
        auto draw = [&rng, n]() {
            auto v = rng.unit_vector(n);
            const double r = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
            for (auto& x : v)
                x *= r;
            return v;
        };
        const auto z = draw(), w = draw(), xi = draw();
        const double hz = eval_rec(spec, z.data(), 0.0);
        const double hw = eval_rec(spec, w.data(), 0.0);

        double worst_hom = 0.0;
        for (const double t : {-2.0, -1.0, 0.5, 3.0}) {
            std::array<double, kMaxDim> tz{};
            for (int i = 0; i < n; ++i)
                tz[static_cast<std::size_t>(i)] = t * z[static_cast<std::size_t>(i)];
            const double lhs = eval_rec(spec, tz.data(), 0.0);
            worst_hom = std::max(worst_hom,
                                 std::fabs(lhs - std::fabs(t) * hz) / (std::fabs(t) * hz));
        }
        vh[static_cast<std::size_t>(s)] = worst_hom;

        {
            std::array<double, kMaxDim> zw{};
            for (int i = 0; i < n; ++i)
                zw[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] +
                                                  w[static_cast<std::size_t>(i)];
            const double lhs = eval_rec(spec, zw.data(), 0.0);
            vs[static_cast<std::size_t>(s)] = std::max(0.0, (lhs - hz - hw) / (hz + hw));
        }

        std::array<double, kMaxDim> g{};
        std::uint32_t sing = 0;
        grad_rec(spec, z.data(), 0.0, g.data(), sing);
        if (sing == 0) {
            double dot = 0.0;
            for (int i = 0; i < n; ++i)
                dot += g[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
            ve[static_cast<std::size_t>(s)] = std::fabs(dot - hz) / hz;
            vd[static_cast<std::size_t>(s)] = std::fabs(dual_of(g.data()) - 1.0);
        }

        {
            const double h0 = dual_of(xi.data());
            double dot = 0.0;
            for (int i = 0; i < n; ++i)
                dot += xi[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
            vo[static_cast<std::size_t>(s)] = std::max(0.0, (dot - h0 * hz) / (h0 * hz));
        }
    }

    AxiomReport rep;
    rep.samples = samples;
    for (int s = 0; s < samples; ++s) {
        rep.homogeneity = std::max(rep.homogeneity, vh[static_cast<std::size_t>(s)]);
        rep.subadditivity = std::max(rep.subadditivity, vs[static_cast<std::size_t>(s)]);
        rep.euler = std::max(rep.euler, ve[static_cast<std::size_t>(s)]);
        rep.hoelder = std::max(rep.hoelder, vo[static_cast<std::size_t>(s)]);
        rep.dual_identity = std::max(rep.dual_identity, vd[static_cast<std::size_t>(s)]);
    }
    return rep;
}

// ---------------------------------------------------------- flux estimates

namespace {

std::vector<double> annulus_sample(Rng& rng, int n) {
    auto v = rng.unit_vector(n);
    const double r = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    for (auto& x : v)
        x *= r;
    return v;
}

struct PairScan {
    double extreme;
    std::vector<double> worst_z1, worst_z2;
};

// ratio(z1, z2) over sampled annulus pairs; keep min (or max) and its pair
template <class Ratio>
PairScan scan_pairs(const NormSpec& spec, int count, std::uint64_t seed, bool keep_min,
                    Ratio&& ratio) {
    const int n = spec.dimension;
    PairScan out{keep_min ? 1e300 : -1e300, {}, {}};
    Rng rng(seed);
    int done = 0;
    int guard = 0;
    while (done < count && guard < 100 * count + 1000) {
        ++guard;
        auto z1 = annulus_sample(rng, n);
        auto z2 = annulus_sample(rng, n);
        double dn = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = z1[static_cast<std::size_t>(i)] - z2[static_cast<std::size_t>(i)];
            dn += d * d;
        }
        if (std::sqrt(dn) < 1e-8)
            continue;
        double r;
        if (!ratio(z1, z2, r))
            continue;
        ++done;
        if ((keep_min && r < out.extreme) || (!keep_min && r > out.extreme)) {
            out.extreme = r;
            out.worst_z1 = z1;
            out.worst_z2 = z2;
        }
    }
    if (done < count)
        throw input_error("estimate_monotonicity: sampling failed to produce enough pairs");
    return out;
}

} // namespace

MonotonicityReport estimate_monotonicity(const NormSpec& spec, Assumption which, double p,
                                         int sample_count, std::uint64_t seed) {
    if (sample_count < 1)
        throw input_error("estimate_monotonicity: sample_count must be positive");
    const bool pge2 = (which == Assumption::A1_pge2 || which == Assumption::A3);
    if (pge2 && !(p >= 2.0))
        throw parameter_error("estimate_monotonicity: this assumption requires p >= 2");
    if (!pge2 && !(p > 1.0 && p < 2.0))
        throw parameter_error("estimate_monotonicity: this assumption requires 1 < p < 2");

    MonotonicityReport rep;
    rep.assumption = which;
    rep.p = p;
    rep.sample_count = sample_count;

    auto flux_of = [p](const NormSpec& s, const std::vector<double>& z,
                       std::vector<double>& out) {
        out.resize(z.size());
        return try_flux(s, p, z.data(), out.data());
    };

    if (which == Assumption::A3) {
        const auto* f = std::get_if<SplitNormFamily>(&spec.family);
        if (!f)
            throw input_error("estimate_monotonicity: A3 applies to split gauges only");
        double extreme = 1e300;
        MonotonicityReport keep = rep;
        int part_idx = 0;
        for (const auto& part : {f->axis, f->cross}) {
            auto scan = scan_pairs(*part, sample_count, mix_seed(seed, part_idx), true,
                                   [&](const std::vector<double>& z1,
                                       const std::vector<double>& z2, double& r) {
                                       std::vector<double> f1, f2;
                                       if (!flux_of(*part, z1, f1) || !flux_of(*part, z2, f2))
                                           return false;
                                       double num = 0.0, dn = 0.0;
                                       for (std::size_t i = 0; i < z1.size(); ++i) {
                                           const double dz = z1[i] - z2[i];
                                           num += (f1[i] - f2[i]) * dz;
                                           dn += dz * dz;
                                       }
                                       r = num / std::pow(std::sqrt(dn), p);
                                       return true;
                                   });
            if (scan.extreme < extreme) {
                extreme = scan.extreme;
                keep.worst_z1 = scan.worst_z1;
                keep.worst_z2 = scan.worst_z2;
            }
            ++part_idx;
        }
        rep = keep;
        rep.assumption = which;
        rep.p = p;
        rep.sample_count = sample_count;
        rep.empirical_constant = extreme;
        return rep;
    }

    const bool keep_min = (which != Assumption::A2);
    auto scan = scan_pairs(
        spec, sample_count, seed, keep_min,
        [&](const std::vector<double>& z1, const std::vector<double>& z2, double& r) {
            std::vector<double> f1, f2;
            if (!flux_of(spec, z1, f1) || !flux_of(spec, z2, f2))
                return false;
            double num = 0.0, dn = 0.0, dfn = 0.0, n1 = 0.0, n2 = 0.0;
            for (std::size_t i = 0; i < z1.size(); ++i) {
                const double dz = z1[i] - z2[i];
                const double df = f1[i] - f2[i];
                num += df * dz;
                dn += dz * dz;
                dfn += df * df;
                n1 += z1[i] * z1[i];
                n2 += z2[i] * z2[i];
            }
            const double dzn = std::sqrt(dn);
            const double zsum = std::sqrt(n1) + std::sqrt(n2);
            switch (which) {
            case Assumption::A1_pge2:
                r = num / std::pow(dzn, p);
                return true;
            case Assumption::A1_plt2:
                r = num / (dn * std::pow(zsum, p - 2.0));
                return true;
            case Assumption::A2:
                r = std::sqrt(dfn) / (dzn * std::pow(zsum, p - 2.0));
                return true;
            default:
                return false;
            }
        });
    rep.empirical_constant = scan.extreme;
    rep.worst_z1 = std::move(scan.worst_z1);
    rep.worst_z2 = std::move(scan.worst_z2);
    return rep;
}

// ------------------------------------------------------------- descriptors

namespace {

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// split on `sep` at paren depth zero
std::vector<std::string> split_top(const std::string& s, char sep) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(')
            ++depth;
        if (c == ')')
            --depth;
        if (c == sep && depth == 0) {
            parts.push_back(strip(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(strip(cur));
    return parts;
}

double parse_number(const std::string& s, const char* what) {
    const std::string t = strip(s);
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw input_error(std::string("norm descriptor: bad number for ") + what + ": '" + t +
                          "'");
    return v;
}

std::vector<double> parse_numbers(const std::string& s, const char* what) {
    std::vector<double> out;
    for (const auto& part : split_top(s, ','))
        out.push_back(parse_number(part, what));
    return out;
}

} // namespace

NormSpec parse_norm(const std::string& text, int axis_dim, int total_dim) {
    const std::string t = strip(text);
    const std::size_t open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
        throw input_error("norm descriptor: expected name(args), got '" + t + "'");
    const std::string name = strip(t.substr(0, open));
    const std::string inner = t.substr(open + 1, t.size() - open - 2);
    const auto groups = split_top(inner, ';');

    if (total_dim < 1)
        throw input_error("norm descriptor: context dimension must be positive");

    if (name == "qnorm") {
        if (groups.size() != 1)
            throw input_error("norm descriptor: qnorm takes one argument");
        return make_qnorm(parse_number(groups[0], "qnorm exponent"), total_dim);
    }
    if (name == "eucl") {
        if (groups.size() != 1)
            throw input_error("norm descriptor: eucl takes one argument");
        return make_eucl(parse_number(groups[0], "eucl scale"), total_dim);
    }
    if (name == "matq") {
        if (groups.size() < 2)
            throw input_error("norm descriptor: matq needs exponent and matrix rows");
        const double q = parse_number(groups[0], "matq exponent");
        const int n = static_cast<int>(groups.size()) - 1;
        std::vector<double> a;
        for (int r = 0; r < n; ++r) {
            auto row = parse_numbers(groups[static_cast<std::size_t>(r) + 1], "matq entry");
            if (static_cast<int>(row.size()) != n)
                throw input_error("norm descriptor: matq matrix must be square");
            a.insert(a.end(), row.begin(), row.end());
        }
        if (n != total_dim)
            throw input_error("norm descriptor: matq dimension " + std::to_string(n) +
                              " does not match context dimension " + std::to_string(total_dim));
        return make_matq(q, n, std::move(a));
    }
    if (name == "block") {
        if (groups.size() != 4)
            throw input_error("norm descriptor: block(q; sizes; exponents; weights)");
        const double q = parse_number(groups[0], "block exponent");
        std::vector<int> sizes;
        for (double v : parse_numbers(groups[1], "block size")) {
            if (v != std::floor(v) || v < 1)
                throw input_error("norm descriptor: block sizes must be positive integers");
            sizes.push_back(static_cast<int>(v));
        }
        auto exps = parse_numbers(groups[2], "block inner exponent");
        auto weights = parse_numbers(groups[3], "block weight");
        NormSpec spec = make_block(q, std::move(sizes), std::move(exps), std::move(weights));
        if (spec.dimension != total_dim)
            throw input_error("norm descriptor: block dimension " +
                              std::to_string(spec.dimension) +
                              " does not match context dimension " + std::to_string(total_dim));
        return spec;
    }
    if (name == "split") {
        if (groups.size() != 3)
            throw input_error("norm descriptor: split(q; axis-desc; cross-desc)");
        if (axis_dim < 1 || axis_dim >= total_dim)
            throw input_error("norm descriptor: split needs 1 <= axis_dim < total_dim "
                              "(nested split is not supported)");
        const double q = parse_number(groups[0], "split exponent");
        NormSpec axis = parse_norm(groups[1], 0, axis_dim);
        NormSpec cross = parse_norm(groups[2], 0, total_dim - axis_dim);
        return make_split(q, std::move(axis), std::move(cross));
    }
    throw input_error("norm descriptor: unknown family '" + name + "'");
}

std::string norm_to_string(const NormSpec& spec) {
    std::ostringstream os;
    if (const auto* f = std::get_if<QNormFamily>(&spec.family)) {
        os << "qnorm(" << fmt_double(f->q) << ")";
    } else if (const auto* f = std::get_if<MatrixQNormFamily>(&spec.family)) {
        os << "matq(" << fmt_double(f->q);
        for (int i = 0; i < f->n; ++i) {
            os << "; ";
            for (int j = 0; j < f->n; ++j)
                os << (j ? "," : "") << fmt_double(f->a[static_cast<std::size_t>(i) * f->n + j]);
        }
        os << ")";
    } else if (const auto* f = std::get_if<BlockNormFamily>(&spec.family)) {
        os << "block(" << fmt_double(f->q) << "; ";
        for (std::size_t i = 0; i < f->sizes.size(); ++i)
            os << (i ? "," : "") << f->sizes[i];
        os << "; ";
        for (std::size_t i = 0; i < f->inner_exps.size(); ++i)
            os << (i ? "," : "") << fmt_double(f->inner_exps[i]);
        os << "; ";
        for (std::size_t i = 0; i < f->weights.size(); ++i)
            os << (i ? "," : "") << fmt_double(f->weights[i]);
        os << ")";
    } else if (const auto* f = std::get_if<SplitNormFamily>(&spec.family)) {
        os << "split(" << fmt_double(f->q) << "; " << norm_to_string(*f->axis) << "; "
           << norm_to_string(*f->cross) << ")";
    } else if (const auto* f = std::get_if<ScaledEuclideanFamily>(&spec.family)) {
        os << "eucl(" << fmt_double(f->t) << ")";
    } else if (const auto* f = std::get_if<CrossSliceFamily>(&spec.family)) {
        os << "slice(" << norm_to_string(*f->inner) << "; " << f->skip << ")";
    } else {
        const auto& ce = std::get<CrossEuclideanFamily>(spec.family);
        os << "crossgrad(" << ce.from << ")";
    }
    return os.str();
}

} // namespace fpl
