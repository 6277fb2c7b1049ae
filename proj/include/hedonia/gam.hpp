#pragma once

#include <string>
#include <vector>

#include "hedonia/common.hpp"

namespace hedonia {

// Radial cubic basis |x - knot|^3 over quantile knots, reduced to the
// null space of the affine constraint so each smooth carries
// kGamBasisSize - 1 coefficients: one unpenalized linear column plus
// kGamBasisSize - 2 penalized wiggle columns. Columns are centered on the
// training rows for identifiability against the intercept.
constexpr std::size_t kGamBasisSize = 10;

// 25 log-spaced smoothing candidates in [1e-6, 1e6]. The grid maximum is
// treated as an exact infinite penalty: the wiggle block is dropped and
// the term degenerates to a straight line.
const std::vector<double>& gam_lambda_grid();

struct SmoothBasis {
    std::string name;
    std::vector<double> knots;              // strictly increasing
    std::vector<std::vector<double>> z;     // k x (k-2) constraint projection
    std::vector<double> penalty;            // (k-2)^2 row-major, PSD
    std::vector<double> col_means;          // k-1 centering offsets
    double x_min = 0.0;
    double x_max = 1.0;

    // centered basis row for one value, length k-1 (linear col first)
    std::vector<double> row(double x) const;
};

struct SmoothTerm {
    SmoothBasis basis;
    double lambda = 1.0;
    std::vector<double> coef;  // k-1; wiggle block zero at the grid maximum
    double edf = 0.0;
    double ref_df = 0.0;
    double f_stat = 0.0;
};

struct GamModel {
    double intercept = 0.0;
    std::vector<SmoothTerm> terms;
    double rss = 0.0;
    double sigma2 = 0.0;
    double gcv = 0.0;
    double aic = 0.0;
    double edf_total = 0.0;  // includes the intercept
    std::size_t n_rows = 0;
    // coefficient covariance, (1 + terms*(k-1))^2 row-major, full layout
    std::vector<double> cov;

    std::size_t term_index(const std::string& name) const;
    double term_value(std::size_t term, double x) const;
    double predict(const std::vector<double>& x) const;
};

// Penalized least squares with per-term GCV smoothing selection:
// coordinate-wise descent over the lambda grid, two full sweeps.
GamModel gam_fit(const std::vector<std::vector<double>>& rows,
                 const std::vector<double>& y,
                 const std::vector<std::string>& column_names);

// Same solve with pinned smoothing parameters (one per column).
GamModel gam_fit_fixed(const std::vector<std::vector<double>>& rows,
                       const std::vector<double>& y,
                       const std::vector<std::string>& column_names,
                       const std::vector<double>& lambdas);

struct PartialDependence {
    std::vector<double> x;
    std::vector<double> f;
    std::vector<double> se;  // pointwise band is f +- 2 se
};

PartialDependence partial_dependence(const GamModel& model,
                                     const std::string& name,
                                     const std::vector<double>& grid);

// exp(max f - min f) over the term's observed training support.
double range_effect(const GamModel& model, const std::string& name);

// Coefficient-table text: parametric block, then EDF/R.df/F-val rows per
// smooth, then AIC and GCV.
std::string format_gam_report(const GamModel& model);

}  // namespace hedonia
