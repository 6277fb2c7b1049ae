#include "hedonia/gam.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hedonia {

namespace {

constexpr std::size_t kTermCols = kGamBasisSize - 1;
constexpr double kLambdaInfinite = 1e6;

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double cube_abs(double d) { return std::abs(d * d * d); }

SmoothBasis build_basis(const std::string& name,
                        const std::vector<double>& x) {
    SmoothBasis b;
    b.name = name;
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    b.x_min = sorted.front();
    b.x_max = sorted.back();
    const std::size_t k = kGamBasisSize;
    for (std::size_t j = 0; j < k; ++j)
        b.knots.push_back(
            quantile(sorted, static_cast<double>(j) / static_cast<double>(k - 1)));
    for (std::size_t j = 1; j < k; ++j)
        if (!(b.knots[j] > b.knots[j - 1]))
            throw DataError("too few distinct values for smooth term '" + name +
                            "'");

    // null space of [1, knots]^T carries the penalized wiggle directions
    Eigen::MatrixXd t(k, 2);
    for (std::size_t i = 0; i < k; ++i) {
        t(i, 0) = 1.0;
        t(i, 1) = b.knots[i];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(t.transpose());
    Eigen::MatrixXd z = lu.kernel();  // k x (k-2)
    if (z.cols() != static_cast<Eigen::Index>(k - 2))
        throw NumericError("degenerate constraint space for smooth term '" +
                           name + "'");
    b.z.assign(k, std::vector<double>(k - 2));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j + 2 < k; ++j) b.z[i][j] = z(i, j);

    Eigen::MatrixXd e(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            e(i, j) = cube_abs(b.knots[i] - b.knots[j]);
    Eigen::MatrixXd s = z.transpose() * e * z;
    s = 0.5 * (s + s.transpose());
    b.penalty.assign((k - 2) * (k - 2), 0.0);
    for (std::size_t i = 0; i + 2 < k; ++i)
        for (std::size_t j = 0; j + 2 < k; ++j)
            b.penalty[i * (k - 2) + j] = s(i, j);

    b.col_means.assign(kTermCols, 0.0);  // filled after the raw columns
    return b;
}

std::vector<double> raw_row(const SmoothBasis& b, double x) {
    std::vector<double> row(kTermCols, 0.0);
    row[0] = x;
    const std::size_t k = kGamBasisSize;
    std::vector<double> phi(k);
    for (std::size_t j = 0; j < k; ++j)
        phi[j] = cube_abs(x - b.knots[j]);
    for (std::size_t j = 0; j + 2 < k; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i) acc += phi[i] * b.z[i][j];
        row[j + 1] = acc;
    }
    return row;
}

struct SolveResult {
    Eigen::VectorXd theta;        // full layout; dropped columns zero
    Eigen::MatrixXd cov_scaled;   // (X'X + S)^-1 on the full layout
    double rss = 0.0;
    double trace = 0.0;
    std::vector<double> term_edf;
    std::vector<double> term_ref_df;
    double gcv = std::numeric_limits<double>::infinity();
};

struct FitWorkspace {
    std::size_t n = 0;
    std::size_t p = 0;  // 1 + terms * kTermCols
    Eigen::MatrixXd design;
    Eigen::VectorXd y;
    Eigen::MatrixXd gram;  // design' * design
    Eigen::VectorXd moment;
    std::vector<SmoothBasis>* bases = nullptr;
};

std::size_t term_offset(std::size_t t) { return 1 + t * kTermCols; }

SolveResult penalized_solve(const FitWorkspace& ws,
                            const std::vector<double>& lambdas,
                            bool want_details) {
    const std::size_t n_terms = ws.bases->size();
    // active columns: intercept, every linear column, wiggle blocks only
    // for finite lambdas
    std::vector<std::size_t> active{0};
    for (std::size_t t = 0; t < n_terms; ++t) {
        active.push_back(term_offset(t));
        if (lambdas[t] < kLambdaInfinite)
            for (std::size_t j = 1; j < kTermCols; ++j)
                active.push_back(term_offset(t) + j);
    }
    const std::size_t pa = active.size();

    Eigen::MatrixXd gram(pa, pa);
    Eigen::VectorXd moment(pa);
    for (std::size_t i = 0; i < pa; ++i) {
        moment(i) = ws.moment(active[i]);
        for (std::size_t j = 0; j < pa; ++j)
            gram(i, j) = ws.gram(active[i], active[j]);
    }
    Eigen::MatrixXd penalized = gram;
    for (std::size_t t = 0; t < n_terms; ++t) {
        if (lambdas[t] >= kLambdaInfinite) continue;
        // locate the wiggle block inside the active layout
        std::size_t base = 0;
        for (std::size_t i = 0; i < pa; ++i)
            if (active[i] == term_offset(t) + 1) {
                base = i;
                break;
            }
        const std::size_t w = kGamBasisSize - 2;
        const auto& s = (*ws.bases)[t].penalty;
        for (std::size_t i = 0; i < w; ++i)
            for (std::size_t j = 0; j < w; ++j)
                penalized(base + i, base + j) += lambdas[t] * s[i * w + j];
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(penalized);
    if (ldlt.info() != Eigen::Success)
        throw NumericError("singular penalized system in additive fit");
    Eigen::VectorXd theta_a = ldlt.solve(moment);
    Eigen::MatrixXd influence = ldlt.solve(gram);  // (G + S)^-1 G
    if (!theta_a.allFinite())
        throw NumericError("singular penalized system in additive fit");

    SolveResult res;
    res.rss = ws.y.squaredNorm() - 2.0 * theta_a.dot(moment) +
              theta_a.dot(gram * theta_a);
    res.rss = std::max(res.rss, 0.0);
    res.trace = influence.trace();
    const double denom = static_cast<double>(ws.n) - res.trace;
    if (denom > 0)
        res.gcv = static_cast<double>(ws.n) * res.rss / (denom * denom);

    res.term_edf.assign(n_terms, 0.0);
    for (std::size_t i = 1; i < pa; ++i) {
        const std::size_t t = (active[i] - 1) / kTermCols;
        res.term_edf[t] += influence(i, i);
    }

    if (want_details) {
        res.theta = Eigen::VectorXd::Zero(ws.p);
        res.cov_scaled = Eigen::MatrixXd::Zero(ws.p, ws.p);
        Eigen::MatrixXd pinv =
            ldlt.solve(Eigen::MatrixXd::Identity(pa, pa));
        for (std::size_t i = 0; i < pa; ++i) {
            res.theta(active[i]) = theta_a(i);
            for (std::size_t j = 0; j < pa; ++j)
                res.cov_scaled(active[i], active[j]) = pinv(i, j);
        }
        // Ref.df via trace(2M - MM) per term block
        Eigen::MatrixXd mm = influence * influence;
        res.term_ref_df.assign(n_terms, 0.0);
        for (std::size_t i = 1; i < pa; ++i) {
            const std::size_t t = (active[i] - 1) / kTermCols;
            res.term_ref_df[t] += 2.0 * influence(i, i) - mm(i, i);
        }
    }
    return res;
}

GamModel finish_fit(const FitWorkspace& ws, const std::vector<double>& lambdas,
                    const std::vector<std::string>& names) {
    SolveResult res = penalized_solve(ws, lambdas, true);
    const std::size_t n_terms = ws.bases->size();
    const double n = static_cast<double>(ws.n);

    GamModel m;
    m.n_rows = ws.n;
    m.intercept = res.theta(0);
    m.rss = res.rss;
    m.edf_total = res.trace;
    m.sigma2 = res.rss / (n - res.trace);
    m.gcv = res.gcv;
    const double loglik =
        -0.5 * n * (std::log(2.0 * M_PI * res.rss / n) + 1.0);
    m.aic = 2.0 * (res.trace + 1.0) - 2.0 * loglik;

    Eigen::MatrixXd cov = m.sigma2 * res.cov_scaled;
    m.cov.assign(cov.data(), cov.data() + ws.p * ws.p);  // column-major ==
    // row-major here: cov is symmetric

    for (std::size_t t = 0; t < n_terms; ++t) {
        SmoothTerm term;
        term.basis = (*ws.bases)[t];
        term.basis.name = names[t];
        term.lambda = lambdas[t];
        term.coef.assign(kTermCols, 0.0);
        for (std::size_t j = 0; j < kTermCols; ++j)
            term.coef[j] = res.theta(term_offset(t) + j);
        term.edf = res.term_edf[t];
        term.ref_df = res.term_ref_df[t];

        // Wald F on the term's covariance block
        std::vector<std::size_t> cols;
        for (std::size_t j = 0; j < kTermCols; ++j)
            if (term.lambda < kLambdaInfinite || j == 0)
                cols.push_back(term_offset(t) + j);
        Eigen::MatrixXd block(cols.size(), cols.size());
        Eigen::VectorXd beta(cols.size());
        for (std::size_t i = 0; i < cols.size(); ++i) {
            beta(i) = res.theta(cols[i]);
            for (std::size_t j = 0; j < cols.size(); ++j)
                block(i, j) = cov(cols[i], cols[j]);
        }
        const double wald = beta.dot(block.ldlt().solve(beta));
        term.f_stat = term.edf > 0 ? wald / term.edf : 0.0;
        m.terms.push_back(std::move(term));
    }
    return m;
}

FitWorkspace build_workspace(const std::vector<std::vector<double>>& rows,
                             const std::vector<double>& y,
                             const std::vector<std::string>& names,
                             std::vector<SmoothBasis>& bases) {
    const std::size_t n = rows.size();
    const std::size_t n_terms = names.size();
    if (n != y.size()) throw NumericError("gam_fit: row/target size mismatch");
    const std::size_t p = 1 + n_terms * kTermCols;
    if (n <= p)
        throw NumericError("gam_fit: need more rows than basis columns (" +
                           std::to_string(p) + ")");

    for (std::size_t t = 0; t < n_terms; ++t) {
        std::vector<double> col;
        col.reserve(n);
        for (const auto& r : rows) {
            if (r.size() != n_terms)
                throw NumericError("gam_fit: ragged design row");
            col.push_back(r[t]);
        }
        bases.push_back(build_basis(names[t], col));
    }

    FitWorkspace ws;
    ws.n = n;
    ws.p = p;
    ws.bases = &bases;
    ws.design.resize(n, p);
    ws.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ws.design(i, 0) = 1.0;
        ws.y(i) = y[i];
        for (std::size_t t = 0; t < n_terms; ++t) {
            const std::vector<double> row = raw_row(bases[t], rows[i][t]);
            for (std::size_t j = 0; j < kTermCols; ++j)
                ws.design(i, term_offset(t) + j) = row[j];
        }
    }
    // center every smooth column on the training rows
    for (std::size_t t = 0; t < n_terms; ++t)
        for (std::size_t j = 0; j < kTermCols; ++j) {
            const std::size_t c = term_offset(t) + j;
            const double mean = ws.design.col(c).mean();
            bases[t].col_means[j] = mean;
            ws.design.col(c).array() -= mean;
        }
    ws.gram = ws.design.transpose() * ws.design;
    ws.moment = ws.design.transpose() * ws.y;
    return ws;
}

}  // namespace

const std::vector<double>& gam_lambda_grid() {
    static const std::vector<double> grid = [] {
        std::vector<double> g;
        for (int i = 0; i < 25; ++i)
            g.push_back(std::pow(10.0, -6.0 + 12.0 * i / 24.0));
        return g;
    }();
    return grid;
}

std::vector<double> SmoothBasis::row(double x) const {
    std::vector<double> r = raw_row(*this, x);
    for (std::size_t j = 0; j < kTermCols; ++j) r[j] -= col_means[j];
    return r;
}

GamModel gam_fit_fixed(const std::vector<std::vector<double>>& rows,
                       const std::vector<double>& y,
                       const std::vector<std::string>& column_names,
                       const std::vector<double>& lambdas) {
    if (lambdas.size() != column_names.size())
        throw ConfigError("gam_fit_fixed: one lambda per column required");
    std::vector<SmoothBasis> bases;
    FitWorkspace ws = build_workspace(rows, y, column_names, bases);
    return finish_fit(ws, lambdas, column_names);
}

GamModel gam_fit(const std::vector<std::vector<double>>& rows,
                 const std::vector<double>& y,
                 const std::vector<std::string>& column_names) {
    std::vector<SmoothBasis> bases;
    FitWorkspace ws = build_workspace(rows, y, column_names, bases);
    const std::vector<double>& grid = gam_lambda_grid();

    std::vector<double> lambdas(column_names.size(), 1.0);
    for (int sweep = 0; sweep < 2; ++sweep)
        for (std::size_t t = 0; t < lambdas.size(); ++t) {
            double best_gcv = std::numeric_limits<double>::infinity();
            double best_lambda = lambdas[t];
            for (double candidate : grid) {
                std::vector<double> trial = lambdas;
                trial[t] = candidate;
                const double gcv = penalized_solve(ws, trial, false).gcv;
                if (gcv < best_gcv) {
                    best_gcv = gcv;
                    best_lambda = candidate;
                }
            }
            lambdas[t] = best_lambda;
        }
    return finish_fit(ws, lambdas, column_names);
}

std::size_t GamModel::term_index(const std::string& name) const {
    for (std::size_t t = 0; t < terms.size(); ++t)
        if (terms[t].basis.name == name) return t;
    throw ConfigError("unknown smooth term: " + name);
}

double GamModel::term_value(std::size_t term, double x) const {
    const std::vector<double> row = terms[term].basis.row(x);
    double acc = 0.0;
    for (std::size_t j = 0; j < kTermCols; ++j)
        acc += row[j] * terms[term].coef[j];
    return acc;
}

double GamModel::predict(const std::vector<double>& x) const {
    if (x.size() != terms.size())
        throw NumericError("predict: expected " + std::to_string(terms.size()) +
                           " columns, got " + std::to_string(x.size()));
    double acc = intercept;
    for (std::size_t t = 0; t < terms.size(); ++t)
        acc += term_value(t, x[t]);
    return acc;
}

PartialDependence partial_dependence(const GamModel& model,
                                     const std::string& name,
                                     const std::vector<double>& grid) {
    const std::size_t t = model.term_index(name);
    const std::size_t p = 1 + model.terms.size() * kTermCols;
    const std::size_t offset = term_offset(t);
    PartialDependence pd;
    for (double x : grid) {
        const std::vector<double> row = model.terms[t].basis.row(x);
        double f = 0.0, var = 0.0;
        for (std::size_t i = 0; i < kTermCols; ++i) {
            f += row[i] * model.terms[t].coef[i];
            for (std::size_t j = 0; j < kTermCols; ++j)
                var += row[i] * row[j] *
                       model.cov[(offset + i) * p + (offset + j)];
        }
        pd.x.push_back(x);
        pd.f.push_back(f);
        pd.se.push_back(std::sqrt(std::max(var, 0.0)));
    }
    return pd;
}

double range_effect(const GamModel& model, const std::string& name) {
    const std::size_t t = model.term_index(name);
    const SmoothBasis& b = model.terms[t].basis;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const int n_grid = 401;
    for (int i = 0; i < n_grid; ++i) {
        const double x =
            b.x_min + (b.x_max - b.x_min) * static_cast<double>(i) / (n_grid - 1);
        const double f = model.term_value(t, x);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    return std::exp(hi - lo);
}

namespace {

const char* gam_stars(double f) {
    if (f > 6.63) return "***";  // F approx chi2_1 tail values; report only
    if (f > 3.84) return "**";
    if (f > 2.71) return "*";
    return "";
}

std::string gfixed(double v, int prec = 3) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << std::fixed << v;
    return ss.str();
}

}  // namespace

std::string format_gam_report(const GamModel& model) {
    std::ostringstream out;
    out << "Par,Est,Std.E.,T-val.\n";
    const std::size_t p = 1 + model.terms.size() * kTermCols;
    const double se0 = std::sqrt(std::max(model.cov[0], 0.0));
    out << "Inter.," << gfixed(model.intercept) << "," << gfixed(se0) << ","
        << gfixed(se0 > 0 ? model.intercept / se0 : 0.0, 1) << "\n";
    (void)p;
    out << "N.Par,EDF,R.df,F-val.,Sig\n";
    for (const auto& term : model.terms)
        out << term.basis.name << "," << gfixed(term.edf, 2) << ","
            << gfixed(term.ref_df, 2) << "," << gfixed(term.f_stat, 2) << ","
            << gam_stars(term.f_stat) << "\n";
    out << "AIC," << gfixed(model.aic, 1) << ",,,\n";
    out << "GCV," << gfixed(model.gcv, 4) << ",,,\n";
    return out.str();
}

}  // namespace hedonia
