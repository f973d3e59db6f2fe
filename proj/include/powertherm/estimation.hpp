#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace powertherm {

// Dense row-major regressor matrix with labeled columns. Labels show up in
// rank-deficiency diagnostics, so callers should name columns after the
// coefficients they carry.
struct DesignMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values; // row-major, rows * cols
    std::vector<std::string> column_labels;

    DesignMatrix() = default;
    DesignMatrix(std::size_t n, std::size_t p, std::vector<std::string> labels);

    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    // Throws ConfigError on empty dimensions, size mismatch, or non-finite
    // entries.
    void validate() const;
};

struct LsqSolution {
    std::vector<double> coefficients;
    double residual_sum_squares = 0.0;
    std::size_t rank = 0;
};

// Training-set quality metrics for a fitted model.
struct FitReport {
    double rmse_mw = 0.0;
    double pearson_rho = 0.0;
    double mean_accuracy = 0.0;
    std::size_t n_samples = 0;
    std::vector<double> per_sample_residuals_mw; // measured - predicted
};

// Householder QR with column pivoting.
//
// Pivoting orders columns by remaining norm, so linearly dependent columns
// sink to the tail of the permutation and can be reported by name. A column
// is treated as dependent when its pivot magnitude falls at or below
// rank_tol_scale times the largest original column norm.
class HouseholderQr {
public:
    explicit HouseholderQr(const DesignMatrix& X, double rank_tol_scale = 1e-10);

    std::size_t rank() const { return rank_; }
    bool full_rank() const { return rank_ == cols_; }

    // Labels of the columns beyond the numerical rank, in pivot order.
    std::vector<std::string> dependent_columns() const;

    // Least-squares solution of X b = y. Throws FitError when the factored
    // matrix is rank deficient, naming the dependent columns.
    std::vector<double> solve(std::span<const double> y) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> qr_;   // column-major; Householder vectors below diag
    std::vector<double> tau_;
    std::vector<std::size_t> perm_;
    std::vector<std::string> labels_;
    std::size_t rank_ = 0;
};

// Minimizes ||y - X b||^2 via the pivoted QR above (never via normal
// equations; training grids in this domain are collinearity-prone).
// Preconditions: X.rows == y.size() and X.rows >= X.cols.
LsqSolution least_squares(const DesignMatrix& X, std::span<const double> y);

// sqrt(mean squared difference). Lengths must match, n >= 1.
double rmse(std::span<const double> predicted, std::span<const double> measured);

// Sample Pearson correlation. n >= 2 and both vectors must have nonzero
// variance, otherwise rho is undefined and a FitError is thrown.
double pearson(std::span<const double> predicted, std::span<const double> measured);

// Mean over samples of 1 - |Pe - Pm| / Pm, unclamped. Every measured value
// must be > 0.
double accuracy(std::span<const double> predicted, std::span<const double> measured);

// Least squares with the intercept forced to zero: slope = sum(xy) / sum(x^2).
double fit_through_origin(std::span<const double> x, std::span<const double> y);

// Bundles the three metrics plus residuals for a prediction/measurement pair.
FitReport make_fit_report(std::span<const double> predicted, std::span<const double> measured);

} // namespace powertherm
