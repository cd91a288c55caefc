#include "spnp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "spnp/types.hpp"

namespace spnp {

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vector& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void SparseMatrix::multiply(const Vector& x, Vector& y) const {
    y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

Vector SparseMatrix::operator*(const Vector& x) const {
    Vector y;
    multiply(x, y);
    return y;
}

Vector SparseMatrix::diagonal() const {
    Vector d(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col[k] == i) d[i] = val[k];
    return d;
}

double SparseMatrix::at(int i, int j) const {
    auto b = col.begin() + row_ptr[i], e = col.begin() + row_ptr[i + 1];
    auto it = std::lower_bound(b, e, j);
    return (it != e && *it == j) ? val[it - col.begin()] : 0.0;
}

double SparseMatrix::asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) m = std::max(m, std::abs(val[k] - at(col[k], i)));
    return m;
}

void SparseMatrix::axpby_same_pattern(double a, double b, const SparseMatrix& other) {
    for (std::size_t k = 0; k < val.size(); ++k) val[k] = a * val[k] + b * other.val[k];
}

void SparseMatrix::scale(double s) {
    for (double& v : val) v *= s;
}

SparseMatrix SparseMatrix::identity(int n) {
    SparseMatrix m;
    m.n = n;
    m.row_ptr.resize(n + 1);
    m.col.resize(n);
    m.val.assign(n, 1.0);
    for (int i = 0; i <= n; ++i) m.row_ptr[i] = i;
    for (int i = 0; i < n; ++i) m.col[i] = i;
    return m;
}

SparseMatrix TripletBuilder::build() const { return build_impl(true); }
SparseMatrix TripletBuilder::build_keep_zeros() const { return build_impl(false); }

SparseMatrix TripletBuilder::build_impl(bool drop_zeros) const {
    // counting sort by row, then sort each row by column
    SparseMatrix m;
    m.n = n_;
    std::vector<int> count(n_ + 1, 0);
    for (const auto& e : entries_) {
        if (e.i < 0 || e.i >= n_ || e.j < 0 || e.j >= n_) throw ConfigError("sparse entry index out of range");
        ++count[e.i + 1];
    }
    for (int i = 0; i < n_; ++i) count[i + 1] += count[i];
    std::vector<std::pair<int, double>> tmp(entries_.size());
    std::vector<int> pos(count.begin(), count.end() - 1);
    for (const auto& e : entries_) tmp[pos[e.i]++] = {e.j, e.v};

    m.row_ptr.assign(n_ + 1, 0);
    m.col.reserve(entries_.size());
    m.val.reserve(entries_.size());
    for (int i = 0; i < n_; ++i) {
        auto b = tmp.begin() + count[i], e = tmp.begin() + count[i + 1];
        std::stable_sort(b, e, [](const auto& x, const auto& y) { return x.first < y.first; });
        for (auto it = b; it != e;) {
            const int j = it->first;
            double s = 0.0;
            for (; it != e && it->first == j; ++it) s += it->second;
            if (drop_zeros && s == 0.0) continue;
            m.col.push_back(j);
            m.val.push_back(s);
        }
        m.row_ptr[i + 1] = static_cast<int>(m.col.size());
    }
    return m;
}

SparseMatrix add(const SparseMatrix& a, double sa, const SparseMatrix& b, double sb) {
    if (a.n != b.n) throw ConfigError("sparse add: dimension mismatch");
    SparseMatrix m;
    m.n = a.n;
    m.row_ptr.assign(a.n + 1, 0);
    for (int i = 0; i < a.n; ++i) {
        int ka = a.row_ptr[i], kb = b.row_ptr[i];
        const int ea = a.row_ptr[i + 1], eb = b.row_ptr[i + 1];
        while (ka < ea || kb < eb) {
            int j;
            double v;
            if (kb >= eb || (ka < ea && a.col[ka] < b.col[kb])) {
                j = a.col[ka];
                v = sa * a.val[ka++];
            } else if (ka >= ea || b.col[kb] < a.col[ka]) {
                j = b.col[kb];
                v = sb * b.val[kb++];
            } else {
                j = a.col[ka];
                v = sa * a.val[ka++] + sb * b.val[kb++];
            }
            m.col.push_back(j);
            m.val.push_back(v);
        }
        m.row_ptr[i + 1] = static_cast<int>(m.col.size());
    }
    return m;
}

void write_coordinate(std::ostream& os, const SparseMatrix& a) {
    char buf[64];
    for (int i = 0; i < a.n; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", a.val[k]);
            os << i << ' ' << a.col[k] << ' ' << buf << '\n';
        }
}

namespace {

Vector inverse_diagonal(const SparseMatrix& a) {
    Vector d = a.diagonal();
    for (double& v : d) v = v != 0.0 ? 1.0 / v : 1.0;
    return d;
}

void remove_mean(Vector& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

}  // namespace

SolveResult cg_solve(const SparseMatrix& a, const Vector& b_in, const SolverOptions& opt, const Vector* x0) {
    const int n = a.n;
    if (static_cast<int>(b_in.size()) != n) throw ConfigError("cg_solve: dimension mismatch");
    Vector b = b_in;
    SolveResult res;
    const double bnorm = norm2(b);
    if (opt.deflate_constant) {
        double s = 0.0;
        for (double v : b) s += v;
        const double incompat = std::abs(s) / std::sqrt(static_cast<double>(n));
        if (incompat > 1e-8 * std::max(bnorm, 1e-300))
            throw ConvergenceError("cg_solve: right-hand side not orthogonal to the constant kernel",
                                   incompat / std::max(bnorm, 1e-300), 0);
        remove_mean(b);
    }
    res.x = x0 ? *x0 : Vector(n, 0.0);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        return res;
    }
    const Vector dinv = inverse_diagonal(a);
    Vector r(n), z(n), p(n), q(n);
    a.multiply(res.x, q);
    for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
    if (opt.deflate_constant) remove_mean(r);
    double rnorm = norm2(r);
    res.residual = rnorm / bnorm;
    if (res.residual <= opt.tol) {
        if (opt.deflate_constant) remove_mean(res.x);
        return res;
    }
    for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= opt.max_iter; ++it) {
        a.multiply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) {
            res.iterations = it;
            throw ConvergenceError("cg_solve: breakdown (operator not positive definite)", res.residual, it);
        }
        const double alpha = rz / pq;
        for (int i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if (opt.deflate_constant) remove_mean(r);
        rnorm = norm2(r);
        res.iterations = it;
        res.residual = rnorm / bnorm;
        if (res.residual <= opt.tol) {
            // confirm with the true residual
            a.multiply(res.x, q);
            Vector rt(n);
            for (int i = 0; i < n; ++i) rt[i] = b[i] - q[i];
            if (opt.deflate_constant) remove_mean(rt);
            res.residual = norm2(rt) / bnorm;
            if (res.residual <= 10.0 * opt.tol) {
                if (opt.deflate_constant) remove_mean(res.x);
                return res;
            }
            r = rt;
        }
        for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw ConvergenceError("cg_solve: iteration limit reached", res.residual, opt.max_iter);
}

SolveResult bicgstab_solve(const SparseMatrix& a, const Vector& b, const SolverOptions& opt, const Vector* x0) {
    const int n = a.n;
    if (static_cast<int>(b.size()) != n) throw ConfigError("bicgstab_solve: dimension mismatch");
    SolveResult res;
    res.x = x0 ? *x0 : Vector(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        return res;
    }
    const Vector dinv = inverse_diagonal(a);
    Vector r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), y(n), zz(n);
    a.multiply(res.x, t);
    for (int i = 0; i < n; ++i) r[i] = b[i] - t[i];
    res.residual = norm2(r) / bnorm;
    if (res.residual <= opt.tol) return res;
    rhat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        const double rho_new = dot(rhat, r);
        if (rho_new == 0.0) {
            // restart with the current residual as shadow vector
            rhat = r;
            p.assign(n, 0.0);
            v.assign(n, 0.0);
            rho = alpha = omega = 1.0;
            continue;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        for (int i = 0; i < n; ++i) y[i] = dinv[i] * p[i];
        a.multiply(y, v);
        const double rv = dot(rhat, v);
        if (rv == 0.0) throw ConvergenceError("bicgstab_solve: breakdown", res.residual, it);
        alpha = rho / rv;
        for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        const double snorm = norm2(s);
        if (snorm / bnorm <= opt.tol) {
            for (int i = 0; i < n; ++i) res.x[i] += alpha * y[i];
            res.iterations = it;
            res.residual = snorm / bnorm;
            return res;
        }
        for (int i = 0; i < n; ++i) zz[i] = dinv[i] * s[i];
        a.multiply(zz, t);
        const double tt = dot(t, t);
        omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
        for (int i = 0; i < n; ++i) {
            res.x[i] += alpha * y[i] + omega * zz[i];
            r[i] = s[i] - omega * t[i];
        }
        res.iterations = it;
        res.residual = norm2(r) / bnorm;
        if (res.residual <= opt.tol) return res;
        if (omega == 0.0) throw ConvergenceError("bicgstab_solve: stagnation", res.residual, it);
    }
    throw ConvergenceError("bicgstab_solve: iteration limit reached", res.residual, opt.max_iter);
}

}  // namespace spnp
