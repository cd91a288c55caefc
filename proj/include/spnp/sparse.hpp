#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace spnp {

using Vector = std::vector<double>;

/// Compressed sparse row matrix (square). Column indices strictly increasing per row.
struct SparseMatrix {
    int n = 0;
    std::vector<int> row_ptr{0};
    std::vector<int> col;
    std::vector<double> val;

    std::size_t nnz() const { return val.size(); }
    void multiply(const Vector& x, Vector& y) const;
    Vector operator*(const Vector& x) const;
    Vector diagonal() const;
    double at(int i, int j) const;
    /// max |A - A^T|.
    double asymmetry() const;
    /// In-place a*this + b*other; both must share the sparsity pattern.
    void axpby_same_pattern(double a, double b, const SparseMatrix& other);
    void scale(double s);
    static SparseMatrix identity(int n);
};

/// Triplet accumulator. Duplicates are summed and exact zeros dropped on build.
class TripletBuilder {
public:
    explicit TripletBuilder(int n) : n_(n) {}
    void add(int i, int j, double v) {
        if (v != 0.0) entries_.push_back({i, j, v});
    }
    void reserve(std::size_t k) { entries_.reserve(k); }
    SparseMatrix build() const;
    /// Build keeping explicit zero entries (stable sparsity pattern).
    SparseMatrix build_keep_zeros() const;

private:
    struct Entry {
        int i, j;
        double v;
    };
    int n_;
    std::vector<Entry> entries_;
    SparseMatrix build_impl(bool drop_zeros) const;
};

/// Sum of two matrices with arbitrary patterns.
SparseMatrix add(const SparseMatrix& a, double sa, const SparseMatrix& b, double sb);

/// Coordinate text dump `i j value`.
void write_coordinate(std::ostream& os, const SparseMatrix& a);

struct SolverOptions {
    double tol = 1e-11;
    int max_iter = 5000;
    /// Singular operator with constant kernel: b must be orthogonal to constants;
    /// the solution is returned with zero mean.
    bool deflate_constant = false;
};

struct SolveResult {
    Vector x;
    int iterations = 0;
    double residual = 0.0;  // relative residual ||Ax-b||/||b||
};

/// Jacobi-preconditioned conjugate gradients. Throws ConvergenceError.
SolveResult cg_solve(const SparseMatrix& a, const Vector& b, const SolverOptions& opt, const Vector* x0 = nullptr);

/// Jacobi-preconditioned BiCGStab. Throws ConvergenceError.
SolveResult bicgstab_solve(const SparseMatrix& a, const Vector& b, const SolverOptions& opt,
                           const Vector* x0 = nullptr);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
double norm_inf(const Vector& a);

}  // namespace spnp
