#pragma once

#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace haptofem {

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
double norm_inf(const Vector& a);
/// y += a * x
void axpy(double a, const Vector& x, Vector& y);
bool all_finite(const Vector& a);

/// Diagonal matrix. Entries are strictly positive when the matrix represents
/// a lumped mass.
struct DiagMatrix {
    Vector d;

    DiagMatrix() = default;
    explicit DiagMatrix(Vector values) : d(std::move(values)) {}

    int size() const { return static_cast<int>(d.size()); }
    void multiply(const Vector& x, Vector& y) const;
    void scale(double a);
};

/// Square sparse matrix in compressed sparse row form with sorted, duplicate
/// free column indices per row.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(int n, std::vector<int> row_offsets, std::vector<int> cols, Vector vals);

    static CsrMatrix from_triplets(int n, std::vector<std::tuple<int, int, double>> triplets);

    int size() const { return n_; }
    int nnz() const { return static_cast<int>(vals_.size()); }
    const std::vector<int>& row_offsets() const { return row_offsets_; }
    const std::vector<int>& cols() const { return cols_; }
    const Vector& values() const { return vals_; }
    Vector& values() { return vals_; }

    /// y = A x
    void multiply(const Vector& x, Vector& y) const;
    /// Stored entry at (i, j), 0 if absent from the pattern.
    double value_at(int i, int j) const;
    bool same_pattern(const CsrMatrix& other) const;
    /// this += a * other; requires an identical sparsity pattern.
    void add_scaled(double a, const CsrMatrix& other);
    void scale(double a);
    /// this += coeff * diag(d); every diagonal slot must exist in the pattern.
    void add_diagonal(const DiagMatrix& d, double coeff = 1.0);
    Vector diagonal() const;

private:
    int n_ = 0;
    std::vector<int> row_offsets_{0};
    std::vector<int> cols_;
    Vector vals_;
};

/// max_ij |A_ij - A_ji|
double max_asymmetry(const CsrMatrix& a);

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

struct CgOptions {
    double tol = 1e-10;  // relative residual target
    int max_iter = 0;    // 0 means 10 * n
    bool jacobi = false; // diagonal preconditioning
};

struct CgResult {
    Vector x;
    int iterations = 0;
    double residual = 0.0;
};

/// Conjugate gradients for (A + diag_addend) x = b with A symmetric positive
/// definite. Deterministic for a fixed input (sequential reductions). Throws
/// SolverError on non-convergence and std::runtime_error on non-finite
/// arithmetic.
CgResult cg_solve(const CsrMatrix& a, const DiagMatrix* diag_addend, const Vector& b,
                  const CgOptions& opts = {});

} // namespace haptofem
