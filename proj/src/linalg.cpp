#include "haptofem/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace haptofem {

namespace {

void require_same_size(size_t a, size_t b, const char* what) {
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
}

} // namespace

double dot(const Vector& a, const Vector& b) {
    require_same_size(a.size(), b.size(), "dot");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vector& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void axpy(double a, const Vector& x, Vector& y) {
    require_same_size(x.size(), y.size(), "axpy");
    for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

bool all_finite(const Vector& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

void DiagMatrix::multiply(const Vector& x, Vector& y) const {
    require_same_size(x.size(), d.size(), "DiagMatrix::multiply");
    y.resize(d.size());
    for (size_t i = 0; i < d.size(); ++i) y[i] = d[i] * x[i];
}

void DiagMatrix::scale(double a) {
    for (double& v : d) v *= a;
}

CsrMatrix::CsrMatrix(int n, std::vector<int> row_offsets, std::vector<int> cols, Vector vals)
    : n_(n), row_offsets_(std::move(row_offsets)), cols_(std::move(cols)), vals_(std::move(vals)) {
    if (n_ < 0 || row_offsets_.size() != static_cast<size_t>(n_) + 1 ||
        cols_.size() != vals_.size() ||
        row_offsets_.back() != static_cast<int>(cols_.size()))
        throw std::invalid_argument("CsrMatrix: inconsistent structure arrays");
}

CsrMatrix CsrMatrix::from_triplets(int n, std::vector<std::tuple<int, int, double>> triplets) {
    for (const auto& [i, j, v] : triplets) {
        (void)v;
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw std::invalid_argument("CsrMatrix::from_triplets: index out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::vector<int> row_counts(static_cast<size_t>(n) + 1, 0);
    std::vector<int> cols;
    Vector vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());
    int prev_i = -1, prev_j = -1;
    for (const auto& [i, j, v] : triplets) {
        if (i == prev_i && j == prev_j) {
            vals.back() += v;
        } else {
            cols.push_back(j);
            vals.push_back(v);
            ++row_counts[static_cast<size_t>(i) + 1];
            prev_i = i;
            prev_j = j;
        }
    }
    for (int r = 0; r < n; ++r)
        row_counts[static_cast<size_t>(r) + 1] += row_counts[static_cast<size_t>(r)];
    return CsrMatrix(n, std::move(row_counts), std::move(cols), std::move(vals));
}

void CsrMatrix::multiply(const Vector& x, Vector& y) const {
    require_same_size(x.size(), static_cast<size_t>(n_), "CsrMatrix::multiply");
    y.resize(static_cast<size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int k = row_offsets_[static_cast<size_t>(i)];
             k < row_offsets_[static_cast<size_t>(i) + 1]; ++k)
            s += vals_[static_cast<size_t>(k)] * x[static_cast<size_t>(cols_[static_cast<size_t>(k)])];
        y[static_cast<size_t>(i)] = s;
    }
}

double CsrMatrix::value_at(int i, int j) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_)
        throw std::out_of_range("CsrMatrix::value_at: index out of range");
    const auto begin = cols_.begin() + row_offsets_[static_cast<size_t>(i)];
    const auto end = cols_.begin() + row_offsets_[static_cast<size_t>(i) + 1];
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return vals_[static_cast<size_t>(it - cols_.begin())];
}

bool CsrMatrix::same_pattern(const CsrMatrix& other) const {
    return n_ == other.n_ && row_offsets_ == other.row_offsets_ && cols_ == other.cols_;
}

void CsrMatrix::add_scaled(double a, const CsrMatrix& other) {
    if (!same_pattern(other))
        throw std::invalid_argument("CsrMatrix::add_scaled: sparsity patterns differ");
    for (size_t k = 0; k < vals_.size(); ++k) vals_[k] += a * other.vals_[k];
}

void CsrMatrix::scale(double a) {
    for (double& v : vals_) v *= a;
}

void CsrMatrix::add_diagonal(const DiagMatrix& d, double coeff) {
    require_same_size(d.d.size(), static_cast<size_t>(n_), "CsrMatrix::add_diagonal");
    for (int i = 0; i < n_; ++i) {
        const auto begin = cols_.begin() + row_offsets_[static_cast<size_t>(i)];
        const auto end = cols_.begin() + row_offsets_[static_cast<size_t>(i) + 1];
        const auto it = std::lower_bound(begin, end, i);
        if (it == end || *it != i)
            throw std::invalid_argument("CsrMatrix::add_diagonal: missing diagonal slot in row " +
                                        std::to_string(i));
        vals_[static_cast<size_t>(it - cols_.begin())] += coeff * d.d[static_cast<size_t>(i)];
    }
}

Vector CsrMatrix::diagonal() const {
    Vector d(static_cast<size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i) d[static_cast<size_t>(i)] = value_at(i, i);
    return d;
}

double max_asymmetry(const CsrMatrix& a) {
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i)
        for (int k = a.row_offsets()[static_cast<size_t>(i)];
             k < a.row_offsets()[static_cast<size_t>(i) + 1]; ++k) {
            const int j = a.cols()[static_cast<size_t>(k)];
            m = std::max(m, std::abs(a.values()[static_cast<size_t>(k)] - a.value_at(j, i)));
        }
    return m;
}

CgResult cg_solve(const CsrMatrix& a, const DiagMatrix* diag_addend, const Vector& b,
                  const CgOptions& opts) {
    const int n = a.size();
    require_same_size(b.size(), static_cast<size_t>(n), "cg_solve");
    if (diag_addend) require_same_size(diag_addend->d.size(), static_cast<size_t>(n), "cg_solve");
    if (opts.tol <= 0.0) throw std::invalid_argument("cg_solve: tol must be positive");
    const int max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * n;

    auto apply = [&](const Vector& x, Vector& y) {
        a.multiply(x, y);
        if (diag_addend)
            for (int i = 0; i < n; ++i)
                y[static_cast<size_t>(i)] +=
                    diag_addend->d[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
    };

    Vector precond;
    if (opts.jacobi) {
        precond = a.diagonal();
        if (diag_addend) axpy(1.0, diag_addend->d, precond);
        for (double& p : precond) {
            if (!(p > 0.0)) throw std::runtime_error("cg_solve: nonpositive Jacobi diagonal");
            p = 1.0 / p;
        }
    }

    CgResult res;
    res.x.assign(static_cast<size_t>(n), 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return res;
    const double target = opts.tol * bnorm;

    Vector r = b;
    Vector z(static_cast<size_t>(n));
    auto apply_precond = [&](const Vector& rr, Vector& zz) {
        if (opts.jacobi)
            for (int i = 0; i < n; ++i)
                zz[static_cast<size_t>(i)] =
                    precond[static_cast<size_t>(i)] * rr[static_cast<size_t>(i)];
        else
            zz = rr;
    };
    apply_precond(r, z);
    Vector p = z;
    Vector ap(static_cast<size_t>(n));
    double rz = dot(r, z);

    double rnorm = norm2(r);
    for (int it = 1; it <= max_iter; ++it) {
        apply(p, ap);
        const double pap = dot(p, ap);
        if (!std::isfinite(pap)) throw std::runtime_error("cg_solve: non-finite curvature");
        if (pap <= 0.0)
            throw std::runtime_error("cg_solve: operator not positive definite (p'Ap = " +
                                     std::to_string(pap) + ")");
        const double alpha = rz / pap;
        axpy(alpha, p, res.x);
        axpy(-alpha, ap, r);
        rnorm = norm2(r);
        if (!std::isfinite(rnorm)) throw std::runtime_error("cg_solve: non-finite residual");
        res.iterations = it;
        if (rnorm <= target) {
            // guard against recurrence drift: confirm with the true residual
            apply(res.x, ap);
            Vector rt = b;
            axpy(-1.0, ap, rt);
            const double true_norm = norm2(rt);
            if (true_norm <= target) {
                res.residual = true_norm;
                return res;
            }
            r = rt;  // restart from the true residual
            apply_precond(r, z);
            p = z;
            rz = dot(r, z);
            rnorm = true_norm;
            continue;
        }
        apply_precond(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i)
            p[static_cast<size_t>(i)] = z[static_cast<size_t>(i)] + beta * p[static_cast<size_t>(i)];
    }
    throw SolverError("cg_solve: no convergence after " + std::to_string(max_iter) +
                          " iterations (residual " + std::to_string(rnorm) + ", target " +
                          std::to_string(target) + ")",
                      rnorm, max_iter);
}

} // namespace haptofem
