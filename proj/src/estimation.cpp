#include "powertherm/estimation.hpp"

#include "powertherm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace powertherm {

DesignMatrix::DesignMatrix(std::size_t n, std::size_t p, std::vector<std::string> labels)
    : rows(n), cols(p), values(n * p, 0.0), column_labels(std::move(labels))
{
    validate();
}

void DesignMatrix::validate() const
{
    if (rows < 1 || cols < 1) {
        throw ConfigError("design matrix must have at least one row and one column");
    }
    if (values.size() != rows * cols) {
        throw ConfigError("design matrix value count does not match dimensions");
    }
    if (column_labels.size() != cols) {
        throw ConfigError("design matrix needs one label per column");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ConfigError("design matrix contains a non-finite value");
        }
    }
}

namespace {

double column_norm(const std::vector<double>& col_major, std::size_t rows,
                   std::size_t col, std::size_t from_row)
{
    double s = 0.0;
    for (std::size_t i = from_row; i < rows; ++i) {
        const double v = col_major[col * rows + i];
        s += v * v;
    }
    return std::sqrt(s);
}

} // namespace

HouseholderQr::HouseholderQr(const DesignMatrix& X, double rank_tol_scale)
    : rows_(X.rows), cols_(X.cols), labels_(X.column_labels)
{
    X.validate();
    if (rows_ < cols_) {
        throw FitError("underdetermined system: " + std::to_string(rows_) +
                       " rows for " + std::to_string(cols_) + " unknowns");
    }

    // Column-major working copy.
    qr_.resize(rows_ * cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            qr_[j * rows_ + i] = X.at(i, j);
        }
    }
    tau_.assign(cols_, 0.0);
    perm_.resize(cols_);
    for (std::size_t j = 0; j < cols_; ++j) {
        perm_[j] = j;
    }

    double max_col_norm = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
        max_col_norm = std::max(max_col_norm, column_norm(qr_, rows_, j, 0));
    }
    const double tol = rank_tol_scale * max_col_norm;

    rank_ = cols_;
    for (std::size_t k = 0; k < cols_; ++k) {
        // Pivot: bring the column with the largest remaining norm to position k.
        std::size_t best = k;
        double best_norm = column_norm(qr_, rows_, k, k);
        for (std::size_t j = k + 1; j < cols_; ++j) {
            const double nj = column_norm(qr_, rows_, j, k);
            if (nj > best_norm) {
                best_norm = nj;
                best = j;
            }
        }
        if (best != k) {
            for (std::size_t i = 0; i < rows_; ++i) {
                std::swap(qr_[best * rows_ + i], qr_[k * rows_ + i]);
            }
            std::swap(perm_[best], perm_[k]);
        }

        if (best_norm <= tol) {
            // Pivoting guarantees every remaining column is dependent too.
            rank_ = k;
            break;
        }

        // Householder reflector for column k, rows k..n-1.
        double* col = &qr_[k * rows_];
        const double alpha = col[k];
        const double sigma = (alpha > 0.0) ? -best_norm : best_norm;
        const double v0 = alpha - sigma;
        col[k] = sigma;
        for (std::size_t i = k + 1; i < rows_; ++i) {
            col[i] /= v0;
        }
        tau_[k] = -v0 / sigma;

        // Apply (I - tau v v^T) to the trailing columns; v = (1, col[k+1..]).
        for (std::size_t j = k + 1; j < cols_; ++j) {
            double* cj = &qr_[j * rows_];
            double dot = cj[k];
            for (std::size_t i = k + 1; i < rows_; ++i) {
                dot += col[i] * cj[i];
            }
            const double t = tau_[k] * dot;
            cj[k] -= t;
            for (std::size_t i = k + 1; i < rows_; ++i) {
                cj[i] -= t * col[i];
            }
        }
    }
}

std::vector<std::string> HouseholderQr::dependent_columns() const
{
    std::vector<std::string> out;
    for (std::size_t j = rank_; j < cols_; ++j) {
        out.push_back(labels_[perm_[j]]);
    }
    return out;
}

std::vector<double> HouseholderQr::solve(std::span<const double> y) const
{
    if (y.size() != rows_) {
        throw ConfigError("right-hand side length does not match matrix rows");
    }
    if (!full_rank()) {
        std::string msg = "rank-deficient design matrix (rank " +
                          std::to_string(rank_) + " of " + std::to_string(cols_) +
                          "); dependent column(s):";
        for (const auto& label : dependent_columns()) {
            msg += " " + label;
        }
        throw FitError(msg);
    }

    // qty = Q^T y
    std::vector<double> qty(y.begin(), y.end());
    for (std::size_t k = 0; k < cols_; ++k) {
        const double* col = &qr_[k * rows_];
        double dot = qty[k];
        for (std::size_t i = k + 1; i < rows_; ++i) {
            dot += col[i] * qty[i];
        }
        const double t = tau_[k] * dot;
        qty[k] -= t;
        for (std::size_t i = k + 1; i < rows_; ++i) {
            qty[i] -= t * col[i];
        }
    }

    // Back substitution R b_perm = qty[0..p-1].
    std::vector<double> bp(cols_, 0.0);
    for (std::size_t step = cols_; step > 0; --step) {
        const std::size_t i = step - 1;
        double v = qty[i];
        for (std::size_t j = i + 1; j < cols_; ++j) {
            v -= qr_[j * rows_ + i] * bp[j];
        }
        bp[i] = v / qr_[i * rows_ + i];
    }

    // Undo the pivot permutation.
    std::vector<double> beta(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
        beta[perm_[j]] = bp[j];
    }
    return beta;
}

LsqSolution least_squares(const DesignMatrix& X, std::span<const double> y)
{
    if (X.rows != y.size()) {
        throw ConfigError("least_squares: X has " + std::to_string(X.rows) +
                          " rows but y has " + std::to_string(y.size()) + " entries");
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw ConfigError("least_squares: y contains a non-finite value");
        }
    }

    HouseholderQr qr(X);
    LsqSolution sol;
    sol.coefficients = qr.solve(y);
    sol.rank = qr.rank();

    double rss = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double pred = 0.0;
        for (std::size_t j = 0; j < X.cols; ++j) {
            pred += X.at(i, j) * sol.coefficients[j];
        }
        const double r = y[i] - pred;
        rss += r * r;
    }
    sol.residual_sum_squares = rss;
    return sol;
}

double rmse(std::span<const double> predicted, std::span<const double> measured)
{
    if (predicted.size() != measured.size()) {
        throw ConfigError("rmse: length mismatch");
    }
    if (predicted.empty()) {
        throw ConfigError("rmse: need at least one sample");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - measured[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(predicted.size()));
}

double pearson(std::span<const double> predicted, std::span<const double> measured)
{
    if (predicted.size() != measured.size()) {
        throw ConfigError("pearson: length mismatch");
    }
    const std::size_t n = predicted.size();
    if (n < 2) {
        throw ConfigError("pearson: need at least two samples");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += predicted[i];
        my += measured[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = predicted[i] - mx;
        const double dy = measured[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw FitError("pearson undefined: an input vector has zero variance");
    }
    return sxy / std::sqrt(sxx * syy);
}

double accuracy(std::span<const double> predicted, std::span<const double> measured)
{
    if (predicted.size() != measured.size()) {
        throw ConfigError("accuracy: length mismatch");
    }
    if (predicted.empty()) {
        throw ConfigError("accuracy: need at least one sample");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (!(measured[i] > 0.0)) {
            throw ConfigError("accuracy: measured values must be > 0");
        }
        s += 1.0 - std::abs(predicted[i] - measured[i]) / measured[i];
    }
    return s / static_cast<double>(predicted.size());
}

double fit_through_origin(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw ConfigError("fit_through_origin: length mismatch");
    }
    if (x.empty()) {
        throw ConfigError("fit_through_origin: need at least one sample");
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
    }
    if (sxx == 0.0) {
        throw FitError("fit_through_origin: regressor is identically zero");
    }
    return sxy / sxx;
}

FitReport make_fit_report(std::span<const double> predicted, std::span<const double> measured)
{
    FitReport report;
    report.n_samples = measured.size();
    report.rmse_mw = rmse(predicted, measured);
    report.pearson_rho = pearson(predicted, measured);
    report.mean_accuracy = accuracy(predicted, measured);
    report.per_sample_residuals_mw.resize(measured.size());
    for (std::size_t i = 0; i < measured.size(); ++i) {
        report.per_sample_residuals_mw[i] = measured[i] - predicted[i];
    }
    return report;
}

} // namespace powertherm
