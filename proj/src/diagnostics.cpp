#include "areal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "areal/parallel.hpp"
#include "areal/rng.hpp"
#include "areal/stats.hpp"
#include "areal/text.hpp"

namespace areal {

namespace {

double pearson_r(const arma::vec& x, const arma::vec& y) {
  const double mx = arma::mean(x);
  const double my = arma::mean(y);
  const arma::vec dx = x - mx;
  const arma::vec dy = y - my;
  const double sxx = arma::dot(dx, dx);
  const double syy = arma::dot(dy, dy);
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw NumericError("correlation: zero variance input");
  }
  const double r = arma::dot(dx, dy) / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double correlation_p(double r, std::size_t n) {
  if (std::fabs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n) - 2.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  return student_t_two_sided_p(t, df);
}

void check_corr_inputs(const arma::vec& x, const arma::vec& y) {
  if (x.n_elem != y.n_elem) {
    throw ValidationError("correlation: length mismatch");
  }
  if (x.n_elem < 3) {
    throw ValidationError("correlation: need at least 3 observations");
  }
}

}  // namespace

CorrelationResult pearson(const arma::vec& x, const arma::vec& y) {
  check_corr_inputs(x, y);
  const double r = pearson_r(x, y);
  return {"pearson", r, correlation_p(r, x.n_elem)};
}

CorrelationResult spearman(const arma::vec& x, const arma::vec& y) {
  check_corr_inputs(x, y);
  const auto rank_vec = [](const arma::vec& v) {
    const std::vector<double> tmp(v.begin(), v.end());
    const std::vector<double> ranks = average_ranks(tmp);
    return arma::vec(ranks);
  };
  const arma::vec rx = rank_vec(x);
  const arma::vec ry = rank_vec(y);
  if (arma::all(rx == rx(0)) || arma::all(ry == ry(0))) {
    throw NumericError("correlation: zero variance input");
  }
  const double rho = pearson_r(rx, ry);
  return {"spearman", rho, correlation_p(rho, x.n_elem)};
}

namespace {

// Directed edge list over the subset of connected units, with positions
// remapped to the subset's index space.
struct MoranEdges {
  std::vector<std::size_t> from;
  std::vector<std::size_t> to;
  std::vector<double> weight;
  double w0 = 0.0;
};

double moran_numerator(const MoranEdges& e, const arma::vec& z) {
  double acc = 0.0;
  for (std::size_t k = 0; k < e.from.size(); ++k) {
    acc += e.weight[k] * z(e.from[k]) * z(e.to[k]);
  }
  return acc;
}

}  // namespace

MoranResult morans_i(const arma::vec& values, const WeightsMatrix& w, int n_perm,
                     std::uint64_t seed, int threads) {
  if (values.n_elem != w.size()) {
    throw ValidationError("morans_i: values and weights dimension mismatch");
  }
  if (n_perm < 1) throw ValidationError("morans_i: n_perm must be >= 1");

  // Keep only units with neighbors. Queen adjacency is symmetric, so a unit
  // with an empty row is never referenced by another row.
  std::vector<std::size_t> keep;
  std::vector<std::size_t> remap(w.size(), SIZE_MAX);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!w.rows[i].empty()) {
      remap[i] = keep.size();
      keep.push_back(i);
    }
  }
  if (keep.empty()) throw ValidationError("morans_i: all weight rows are empty");
  const std::size_t n = keep.size();
  if (n < 3) throw ValidationError("morans_i: need at least 3 connected units");

  MoranEdges edges;
  for (const std::size_t i : keep) {
    for (const auto& nb : w.rows[i]) {
      if (remap[nb.index] == SIZE_MAX) {
        throw ValidationError("morans_i: neighbor of a connected unit is isolated");
      }
      edges.from.push_back(remap[i]);
      edges.to.push_back(remap[nb.index]);
      edges.weight.push_back(nb.weight);
      edges.w0 += nb.weight;
    }
  }

  arma::vec x(n);
  for (std::size_t i = 0; i < n; ++i) x(i) = values(keep[i]);
  const double xbar = arma::mean(x);
  arma::vec z = x - xbar;
  const double m2 = arma::dot(z, z);
  if (!(m2 > 0.0)) throw NumericError("morans_i: values have zero variance");

  const double dn = static_cast<double>(n);
  const double scale = dn / (edges.w0 * m2);
  const double observed = scale * moran_numerator(edges, z);
  const double expected = -1.0 / (dn - 1.0);

  // Normality-assumption variance for the reference z-score.
  double s1 = 0.0;
  {
    // w_ji lookup: accumulate symmetrized weights per undirected pair.
    std::map<std::pair<std::size_t, std::size_t>, double> wsum;
    for (std::size_t k = 0; k < edges.from.size(); ++k) {
      const std::size_t a = edges.from[k];
      const std::size_t b = edges.to[k];
      const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
      wsum[key] += edges.weight[k];
    }
    for (const auto& [key, sw] : wsum) {
      (void)key;
      s1 += sw * sw;
    }
  }
  double s2 = 0.0;
  {
    std::vector<double> row_out(n, 0.0), row_in(n, 0.0);
    for (std::size_t k = 0; k < edges.from.size(); ++k) {
      row_out[edges.from[k]] += edges.weight[k];
      row_in[edges.to[k]] += edges.weight[k];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double s = row_out[i] + row_in[i];
      s2 += s * s;
    }
  }
  const double w0 = edges.w0;
  const double var_normal =
      (dn * dn * s1 - dn * s2 + 3.0 * w0 * w0) / (w0 * w0 * (dn * dn - 1.0)) -
      expected * expected;
  double z_score = 0.0;
  double p_normal = 1.0;
  if (var_normal > 0.0) {
    z_score = (observed - expected) / std::sqrt(var_normal);
    p_normal = std::erfc(std::fabs(z_score) / std::sqrt(2.0));
  }

  // Permutation replicates, each with its own derived seed so any execution
  // order gives the same p-value.
  const double obs_dev = std::fabs(observed - expected);
  std::vector<double> perm_i(static_cast<std::size_t>(n_perm), 0.0);
  parallel_for(static_cast<std::size_t>(n_perm), threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    std::vector<double> shuffled(z.begin(), z.end());
    rng.shuffle(shuffled);
    const arma::vec zp(shuffled);
    perm_i[r] = scale * moran_numerator(edges, zp);
  });
  std::size_t extreme = 0;
  for (const double ip : perm_i) {
    if (std::fabs(ip - expected) >= obs_dev - 1e-15) ++extreme;
  }
  const double p_perm = (static_cast<double>(extreme) + 1.0) /
                        (static_cast<double>(n_perm) + 1.0);

  MoranResult res;
  res.observed = observed;
  res.expected = expected;
  res.z = z_score;
  res.p_normal = p_normal;
  res.p_perm = p_perm;
  res.n_perm = n_perm;
  res.seed = seed;
  res.scheme = w.scheme + (w.scheme == "knn" ? " k=" + fmt_int(w.k) : "");
  res.n_used = n;
  return res;
}

namespace {

// R^2 of regressing column j on the remaining columns plus intercept.
// SVD-based least squares tolerates exact collinearity (residual -> 0).
double auxiliary_r2(const arma::mat& X, std::size_t j) {
  const std::size_t n = X.n_rows;
  const std::size_t p = X.n_cols;
  arma::mat A(n, p, arma::fill::ones);  // col 0 = intercept
  std::size_t c = 1;
  for (std::size_t k = 0; k < p; ++k) {
    if (k == j) continue;
    A.col(c++) = X.col(k);
  }
  const arma::vec y = X.col(j);
  const arma::vec beta = arma::pinv(A) * y;
  const arma::vec resid = y - A * beta;
  const double rss = arma::dot(resid, resid);
  const arma::vec dy = y - arma::mean(y);
  const double tss = arma::dot(dy, dy);
  if (!(tss > 0.0)) throw NumericError("vif: constant column");
  return 1.0 - rss / tss;
}

}  // namespace

arma::vec vif(const arma::mat& X) {
  const std::size_t p = X.n_cols;
  if (p < 2) throw ValidationError("vif: need at least 2 columns");
  if (X.n_rows <= p + 1) {
    throw ValidationError("vif: need more rows than columns plus intercept");
  }
  arma::vec out(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double r2 = auxiliary_r2(X, j);
    // Relative tolerance: R^2 this close to 1 means numerically perfect
    // collinearity.
    if (1.0 - r2 < 1e-12) {
      out(j) = std::numeric_limits<double>::infinity();
    } else {
      out(j) = 1.0 / (1.0 - r2);
    }
  }
  return out;
}

VifReport vif_prune(const arma::mat& X, const std::vector<std::string>& names,
                    const VifPruneOptions& opts) {
  if (names.size() != X.n_cols) {
    throw ValidationError("vif_prune: names/columns mismatch");
  }
  if (!(opts.threshold > 1.0)) {
    throw ValidationError("vif_prune: threshold must exceed 1");
  }

  std::vector<std::size_t> active(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) active[i] = i;
  auto drop_name = [&](const std::string& name) -> bool {
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (names[active[i]] == name) {
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(i));
        return true;
      }
    }
    return false;
  };

  VifReport report;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // Stage 1: composition references (skipped when the group is not in this
  // matrix) and explicit manual drops.
  for (const auto& group : opts.composition_groups) {
    bool group_present = false;
    for (const auto& v : group.variables) {
      if (std::find(names.begin(), names.end(), v) != names.end()) {
        group_present = true;
        break;
      }
    }
    if (!group_present) continue;
    if (drop_name(group.reference)) {
      report.dropped.push_back({0, group.reference, nan, "composition_reference"});
    }
  }
  for (const auto& name : opts.manual_drops) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ValidationError("vif_prune: manual drop '" + name +
                            "' is not a feature column");
    }
    if (drop_name(name)) {
      report.dropped.push_back({0, name, nan, "manual"});
    }
  }

  // Stage 2: greedy largest-VIF removal.
  int round = 1;
  while (true) {
    if (active.size() < 2) {
      throw ValidationError("vif_prune: fewer than 2 variables remain");
    }
    arma::mat sub(X.n_rows, active.size());
    for (std::size_t c = 0; c < active.size(); ++c) sub.col(c) = X.col(active[c]);
    const arma::vec v = vif(sub);

    std::map<std::string, double> table;
    for (std::size_t c = 0; c < active.size(); ++c) table[names[active[c]]] = v(c);
    report.rounds.push_back(std::move(table));

    // Largest VIF >= threshold; ties by lexicographic name.
    std::ptrdiff_t worst = -1;
    for (std::size_t c = 0; c < active.size(); ++c) {
      if (v(c) < opts.threshold) continue;
      if (worst < 0 || v(c) > v((arma::uword)worst) ||
          (v(c) == v((arma::uword)worst) &&
           names[active[c]] < names[active[(std::size_t)worst]])) {
        worst = static_cast<std::ptrdiff_t>(c);
      }
    }
    if (worst < 0) break;
    const std::string victim = names[active[static_cast<std::size_t>(worst)]];
    report.dropped.push_back({round, victim, v((arma::uword)worst), "max_vif"});
    drop_name(victim);
    ++round;
  }

  for (const std::size_t idx : active) report.retained.push_back(names[idx]);
  return report;
}

}  // namespace areal
