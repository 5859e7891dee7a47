#include "areal/linmod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "areal/error.hpp"
#include "areal/parallel.hpp"
#include "areal/stats.hpp"
#include "areal/text.hpp"

namespace areal {

namespace {

constexpr double kRankTol = 1e-10;  // relative to the largest singular value

arma::mat with_intercept(const arma::mat& X) {
  arma::mat Xa(X.n_rows, X.n_cols + 1);
  Xa.col(0).ones();
  if (X.n_cols > 0) Xa.cols(1, X.n_cols) = X;
  return Xa;
}

// Names the columns that are linear combinations of earlier ones, via
// modified Gram-Schmidt. Used only to build a useful error message.
std::vector<std::string> dependent_columns(const arma::mat& Xa,
                                           const std::vector<std::string>& names) {
  std::vector<std::string> out;
  std::vector<arma::vec> basis;
  for (std::size_t j = 0; j < Xa.n_cols; ++j) {
    arma::vec v = Xa.col(j);
    const double orig = arma::norm(v);
    for (const auto& b : basis) v -= arma::dot(b, v) * b;
    const double remaining = arma::norm(v);
    if (remaining <= kRankTol * std::max(1.0, orig)) {
      out.push_back(names[j]);
    } else {
      basis.push_back(v / remaining);
    }
  }
  return out;
}

void check_rank(const arma::mat& Xa, const std::vector<std::string>& full_names,
                const std::string& context) {
  const arma::vec s = arma::svd(Xa);
  if (s.n_elem == 0 || s(0) <= 0.0 || s(s.n_elem - 1) < kRankTol * s(0)) {
    const auto bad = dependent_columns(Xa, full_names);
    throw NumericError(context + ": design matrix is rank deficient (dependent columns: " +
                       (bad.empty() ? std::string("unidentified") : join(bad, ", ")) + ")");
  }
}

}  // namespace

OlsFit ols_fit(const arma::mat& X, const arma::vec& y,
               const std::vector<std::string>& names) {
  const std::size_t n = X.n_rows;
  const std::size_t p = X.n_cols;
  if (names.size() != p) throw ValidationError("ols_fit: names/columns mismatch");
  if (y.n_elem != n) throw ValidationError("ols_fit: X and y row mismatch");
  if (n <= p + 1) {
    throw ValidationError("ols_fit: need n > p + 1 (n=" + fmt_int((std::int64_t)n) +
                          ", p=" + fmt_int((std::int64_t)p) + ")");
  }
  if (!X.is_finite() || !y.is_finite()) {
    throw ValidationError("ols_fit: non-finite values in inputs");
  }

  OlsFit fit;
  fit.n = n;
  fit.p = p;
  fit.names.push_back("intercept");
  for (const auto& nm : names) fit.names.push_back(nm);

  const arma::mat Xa = with_intercept(X);
  check_rank(Xa, fit.names, "ols_fit");

  arma::mat Q, R;
  if (!arma::qr_econ(Q, R, Xa)) throw NumericError("ols_fit: QR decomposition failed");
  fit.coef = arma::solve(arma::trimatu(R), Q.t() * y);
  fit.fitted = Xa * fit.coef;
  fit.residuals = y - fit.fitted;
  fit.rss = arma::dot(fit.residuals, fit.residuals);

  const double df = static_cast<double>(n - p - 1);
  const double sigma2 = fit.rss / df;
  // diag((X'X)^-1) = row sums of squares of R^-1.
  const arma::mat Rinv = arma::inv(arma::trimatu(R));
  const arma::vec xtx_inv_diag = arma::sum(arma::square(Rinv), 1);

  const std::size_t m = p + 1;
  fit.se.set_size(m);
  fit.tstat.set_size(m);
  fit.pvalue.set_size(m);
  for (std::size_t j = 0; j < m; ++j) {
    fit.se(j) = std::sqrt(sigma2 * xtx_inv_diag(j));
    if (fit.se(j) > 0.0) {
      fit.tstat(j) = fit.coef(j) / fit.se(j);
      fit.pvalue(j) = student_t_two_sided_p(fit.tstat(j), df);
    } else if (fit.coef(j) == 0.0) {
      fit.tstat(j) = 0.0;
      fit.pvalue(j) = 1.0;
    } else {
      fit.tstat(j) = fit.coef(j) > 0 ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
      fit.pvalue(j) = 0.0;
    }
  }

  const arma::vec dy = y - arma::mean(y);
  const double tss = arma::dot(dy, dy);
  fit.r2 = tss > 0.0 ? 1.0 - fit.rss / tss : 0.0;
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (static_cast<double>(n) - 1.0) / df;
  // Gaussian log-likelihood AIC counting intercept, slopes, and variance.
  fit.aic = fit.rss > 0.0
                ? static_cast<double>(n) * std::log(2.0 * M_PI * fit.rss /
                                                    static_cast<double>(n)) +
                      static_cast<double>(n) + 2.0 * (static_cast<double>(p) + 2.0)
                : -std::numeric_limits<double>::infinity();
  fit.rmse = std::sqrt(fit.rss / static_cast<double>(n));
  return fit;
}

arma::vec gaussian_weights(const arma::vec& distances, double bandwidth) {
  if (!(bandwidth > 0.0)) {
    throw NumericError("gaussian_weights: bandwidth must be positive");
  }
  return arma::exp(-0.5 * arma::square(distances / bandwidth));
}

GwrFit gwr_fit(const arma::mat& X, const arma::vec& y,
               const std::vector<std::string>& names,
               const std::vector<Point>& locations, int k, const GwrOptions& opts,
               const std::vector<std::string>& row_ids) {
  const std::size_t n = X.n_rows;
  const std::size_t p = X.n_cols;
  if (names.size() != p) throw ValidationError("gwr_fit: names/columns mismatch");
  if (y.n_elem != n || locations.size() != n) {
    throw ValidationError("gwr_fit: X, y, locations row mismatch");
  }
  if (!row_ids.empty() && row_ids.size() != n) {
    throw ValidationError("gwr_fit: row_ids length mismatch");
  }
  if (k < static_cast<int>(p) + 2 || k > static_cast<int>(n) - 1) {
    throw ValidationError("gwr_fit: bandwidth k must satisfy p+2 <= k <= n-1 (k=" +
                          fmt_int(k) + ", p=" + fmt_int((std::int64_t)p) +
                          ", n=" + fmt_int((std::int64_t)n) + ")");
  }
  if (!X.is_finite() || !y.is_finite()) {
    throw ValidationError("gwr_fit: non-finite values in inputs");
  }

  auto unit_label = [&](std::size_t i) {
    return row_ids.empty() ? "unit #" + fmt_int((std::int64_t)i)
                           : "unit '" + row_ids[i] + "'";
  };

  GwrFit fit;
  fit.bandwidth = k;
  fit.n = n;
  fit.p = p;
  fit.names.push_back("intercept");
  for (const auto& nm : names) fit.names.push_back(nm);

  const arma::mat Xa = with_intercept(X);
  const std::size_t m = p + 1;

  // Pairwise distances once; each row then yields the adaptive bandwidth.
  arma::mat D(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    D(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = haversine_m(locations[i], locations[j]);
      D(i, j) = d;
      D(j, i) = d;
    }
  }

  fit.local_coef.set_size(n, m);
  fit.fitted.set_size(n);
  fit.hat_diag.set_size(n);
  std::vector<double> row_norm2(n, 0.0);

  parallel_for(n, opts.threads, [&](std::size_t i) {
    arma::vec w(n, arma::fill::ones);
    if (!opts.force_uniform) {
      double bw = opts.fixed_bandwidth_m;
      if (!(bw > 0.0)) {
        // Distance to the k-th nearest other unit.
        arma::vec drow(n - 1);
        std::size_t c = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) drow(c++) = D(i, j);
        }
        drow = arma::sort(drow);
        bw = drow(static_cast<arma::uword>(k - 1));
        if (!(bw > 0.0)) {
          // Coincident k nearest: fall back to the closest distinct unit.
          for (const double d : drow) {
            if (d > 0.0) {
              bw = d;
              break;
            }
          }
          if (!(bw > 0.0)) {
            throw NumericError("gwr_fit: all locations coincide with " + unit_label(i));
          }
        }
      }
      w = gaussian_weights(D.col(i), bw);
    }

    const arma::vec sw = arma::sqrt(w);
    const arma::mat Xw = Xa.each_col() % sw;
    arma::mat Q, R;
    if (!arma::qr_econ(Q, R, Xw)) {
      throw NumericError("gwr_fit: local QR failed at " + unit_label(i));
    }
    const arma::vec rdiag = arma::abs(R.diag());
    if (rdiag.min() < kRankTol * std::max(1.0, rdiag.max())) {
      throw NumericError("gwr_fit: local fit at " + unit_label(i) +
                         " is rank deficient (bandwidth too small)");
    }
    const arma::vec beta =
        arma::solve(arma::trimatu(R), Q.t() * (sw % y), arma::solve_opts::no_approx);
    fit.local_coef.row(i) = beta.t();
    fit.fitted(i) = arma::dot(Xa.row(i), beta);

    // Hat row: s_ij = w_j * x_j' (X'WX)^-1 x_i. Only its diagonal entry and
    // squared norm are kept.
    const arma::mat Rinv = arma::inv(arma::trimatu(R));
    const arma::vec z = Rinv * (Rinv.t() * Xa.row(i).t());
    const arma::vec srow = w % (Xa * z);
    fit.hat_diag(i) = srow(i);
    row_norm2[i] = arma::dot(srow, srow);
  });

  fit.residuals = y - fit.fitted;
  fit.rss = arma::dot(fit.residuals, fit.residuals);
  fit.tr_s = arma::accu(fit.hat_diag);
  double sts = 0.0;
  for (const double v : row_norm2) sts += v;
  fit.tr_sts = sts;
  fit.enp = 2.0 * fit.tr_s - fit.tr_sts;

  const double dn = static_cast<double>(n);
  const arma::vec dy = y - arma::mean(y);
  const double tss = arma::dot(dy, dy);
  fit.r2 = tss > 0.0 ? 1.0 - fit.rss / tss : 0.0;
  const double edf = dn - fit.enp - 1.0;
  fit.adj_r2 = edf > 0.0 ? 1.0 - (1.0 - fit.r2) * (dn - 1.0) / edf
                         : -std::numeric_limits<double>::infinity();

  const double denom = dn - 2.0 - fit.tr_s;
  if (!(denom > 0.0)) {
    throw NumericError("gwr_fit: n - 2 - tr(S) <= 0 (bandwidth too small for AICc)");
  }
  if (!(fit.rss > 0.0)) {
    throw NumericError("gwr_fit: zero residual sum of squares, AICc undefined");
  }
  fit.aicc = dn * std::log(fit.rss / dn) + dn * std::log(2.0 * M_PI) +
             dn * (dn + fit.tr_s) / denom;
  fit.std_residuals = standardized_residuals(fit.residuals);
  return fit;
}

namespace {

int clamp_int(double v, int lo, int hi) {
  const int r = static_cast<int>(std::llround(v));
  return std::max(lo, std::min(hi, r));
}

}  // namespace

BandwidthSearch golden_search_bandwidth(const arma::mat& X, const arma::vec& y,
                                        const std::vector<std::string>& names,
                                        const std::vector<Point>& locations,
                                        int k_min, int k_max,
                                        const GwrOptions& opts) {
  const int n = static_cast<int>(X.n_rows);
  const int p = static_cast<int>(X.n_cols);
  if (!(p + 2 <= k_min && k_min < k_max && k_max <= n - 1)) {
    throw ValidationError("bandwidth search: need p+2 <= k_min < k_max <= n-1");
  }

  BandwidthSearch res;
  auto evaluate = [&](int k) -> double {
    const auto hit = res.profile.find(k);
    if (hit != res.profile.end()) return hit->second;
    const auto miss = res.failures.find(k);
    if (miss != res.failures.end()) return std::numeric_limits<double>::infinity();
    double v;
    try {
      v = gwr_fit(X, y, names, locations, k, opts).aicc;
    } catch (const std::exception& e) {
      res.failures[k] = e.what();
      return std::numeric_limits<double>::infinity();
    }
    res.profile[k] = v;
    return v;
  };

  constexpr double kGolden = 0.6180339887498949;  // (sqrt(5)-1)/2
  double lo = k_min;
  double hi = k_max;
  int x1 = clamp_int(hi - kGolden * (hi - lo), k_min, k_max);
  int x2 = clamp_int(lo + kGolden * (hi - lo), k_min, k_max);
  double f1 = evaluate(x1);
  double f2 = evaluate(x2);
  int guard = 0;
  while (hi - lo > 4.0 && x1 < x2 && ++guard < 200) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = clamp_int(hi - kGolden * (hi - lo), k_min, k_max);
      f1 = evaluate(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = clamp_int(lo + kGolden * (hi - lo), k_min, k_max);
      f2 = evaluate(x2);
    }
  }
  // Sweep the final bracket so the discrete minimum cannot slip through.
  for (int k = static_cast<int>(std::floor(lo)); k <= static_cast<int>(std::ceil(hi));
       ++k) {
    if (k >= k_min && k <= k_max) evaluate(k);
  }

  if (res.profile.empty()) {
    std::string first = res.failures.empty() ? "none" : res.failures.begin()->second;
    throw NumericError("bandwidth search: every candidate failed; first failure: " + first);
  }
  res.best_k = res.profile.begin()->first;
  res.best_aicc = res.profile.begin()->second;
  for (const auto& [k, v] : res.profile) {
    if (v < res.best_aicc) {  // ties keep the smaller k (map is ascending)
      res.best_k = k;
      res.best_aicc = v;
    }
  }
  return res;
}

arma::vec standardized_residuals(const arma::vec& residuals) {
  const std::size_t n = residuals.n_elem;
  if (n < 2) throw NumericError("standardized_residuals: need at least 2 residuals");
  const double m = arma::mean(residuals);
  const double sd = std::sqrt(arma::accu(arma::square(residuals - m)) /
                              (static_cast<double>(n) - 1.0));
  if (!(sd > 0.0)) {
    throw NumericError("standardized_residuals: zero residual variance (perfect fit)");
  }
  return (residuals - m) / sd;
}

std::vector<double> jenks_breaks(std::vector<double> values, int n_classes) {
  if (values.empty()) throw ValidationError("jenks_breaks: empty input");
  if (n_classes < 1) throw ValidationError("jenks_breaks: need at least 1 class");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();

  std::size_t distinct = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (values[i] != values[i - 1]) ++distinct;
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n_classes),
                                              distinct);

  // Prefix sums make the SSE of any contiguous block O(1).
  std::vector<double> ps(n + 1, 0.0), ps2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ps[i + 1] = ps[i] + values[i];
    ps2[i + 1] = ps2[i] + values[i] * values[i];
  }
  auto block_sse = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
    const double cnt = static_cast<double>(hi - lo);
    const double s = ps[hi] - ps[lo];
    return std::max(0.0, (ps2[hi] - ps2[lo]) - s * s / cnt);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // cost[c][i]: best SSE splitting the first i values into c classes.
  std::vector<std::vector<double>> cost(k + 1, std::vector<double>(n + 1, kInf));
  std::vector<std::vector<std::size_t>> cut(k + 1, std::vector<std::size_t>(n + 1, 0));
  cost[0][0] = 0.0;
  for (std::size_t c = 1; c <= k; ++c) {
    for (std::size_t i = c; i <= n; ++i) {
      for (std::size_t j = c - 1; j < i; ++j) {
        if (cost[c - 1][j] == kInf) continue;
        const double v = cost[c - 1][j] + block_sse(j, i);
        if (v < cost[c][i]) {
          cost[c][i] = v;
          cut[c][i] = j;
        }
      }
    }
  }

  std::vector<std::size_t> bounds(k + 1);
  bounds[k] = n;
  for (std::size_t c = k; c >= 1; --c) bounds[c - 1] = cut[c][bounds[c]];

  std::vector<double> edges;
  edges.push_back(values.front());
  for (std::size_t c = 1; c < k; ++c) edges.push_back(values[bounds[c] - 1]);
  edges.push_back(values.back());
  return edges;
}

}  // namespace areal
