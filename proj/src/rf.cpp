#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "areal/mlmod.hpp"
#include "areal/parallel.hpp"
#include "areal/rng.hpp"

namespace areal {

using nlohmann::json;

const char* mtry_rule_name(MtryRule rule) {
  switch (rule) {
    case MtryRule::all: return "all";
    case MtryRule::sqrt_rule: return "sqrt";
    case MtryRule::log2_rule: return "log2";
    case MtryRule::half: return "half";
    case MtryRule::third: return "third";
  }
  throw ValidationError("unknown m_try rule");
}

MtryRule mtry_rule_from_name(const std::string& name) {
  for (const MtryRule r : kMtryRules) {
    if (name == mtry_rule_name(r)) return r;
  }
  throw ValidationError("unknown m_try rule name: '" + name + "'");
}

int resolve_mtry(MtryRule rule, int n_features) {
  if (n_features < 1) throw ValidationError("resolve_mtry: need features");
  const double s = static_cast<double>(n_features);
  double v = s;
  switch (rule) {
    case MtryRule::all: v = s; break;
    case MtryRule::sqrt_rule: v = std::sqrt(s); break;
    case MtryRule::log2_rule: v = std::log2(s); break;
    case MtryRule::half: v = s / 2.0; break;
    case MtryRule::third: v = s / 3.0; break;
  }
  const int m = static_cast<int>(std::floor(v));
  return std::max(1, std::min(n_features, m));
}

namespace {

struct TreeBuilder {
  const arma::mat& X;
  const arma::vec& y;
  const RfConfig& cfg;
  int m_try;
  Rng rng;
  RegressionTree tree;
  std::vector<double> feature_gain;  // summed SSE decrease per feature

  TreeBuilder(const arma::mat& X_, const arma::vec& y_, const RfConfig& cfg_,
              int m_try_, std::uint64_t seed)
      : X(X_), y(y_), cfg(cfg_), m_try(m_try_), rng(seed),
        feature_gain(X_.n_cols, 0.0) {}

  std::int32_t build(std::vector<std::size_t>& idx, int depth) {
    const std::size_t m = idx.size();
    double sum = 0.0, sum2 = 0.0;
    for (const std::size_t i : idx) {
      sum += y(i);
      sum2 += y(i) * y(i);
    }
    const double node_mean = sum / static_cast<double>(m);
    const double node_sse = std::max(0.0, sum2 - sum * sum / static_cast<double>(m));

    TreeNode node;
    node.value = node_mean;
    const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(node);

    const bool depth_capped = cfg.max_depth > 0 && depth >= cfg.max_depth;
    if (m < 2 * static_cast<std::size_t>(cfg.min_leaf) || node_sse <= 0.0 ||
        depth_capped) {
      return id;
    }

    // Sample m_try distinct features, then scan them in ascending index
    // order so equal-score ties resolve to the lowest feature.
    const std::size_t n_feat = X.n_cols;
    std::vector<int> pool(n_feat);
    std::iota(pool.begin(), pool.end(), 0);
    for (int s = 0; s < m_try; ++s) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(s, static_cast<std::int64_t>(n_feat) - 1));
      std::swap(pool[static_cast<std::size_t>(s)], pool[j]);
    }
    std::vector<int> candidates(pool.begin(), pool.begin() + m_try);
    std::sort(candidates.begin(), candidates.end());

    double best_score = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    std::size_t best_pos = 0;
    std::vector<std::size_t> sorted_idx(idx);
    std::vector<std::size_t> best_sorted;

    for (const int f : candidates) {
      std::sort(sorted_idx.begin(), sorted_idx.end(),
                [&](std::size_t a, std::size_t b) {
                  const double va = X(a, static_cast<arma::uword>(f));
                  const double vb = X(b, static_cast<arma::uword>(f));
                  if (va != vb) return va < vb;
                  return a < b;
                });
      // Prefix sums over the sorted order; SSE_L + SSE_R is O(1) per cut.
      double ls = 0.0, ls2 = 0.0;
      for (std::size_t s = 1; s < m; ++s) {
        const double yv = y(sorted_idx[s - 1]);
        ls += yv;
        ls2 += yv * yv;
        const double v1 = X(sorted_idx[s - 1], static_cast<arma::uword>(f));
        const double v2 = X(sorted_idx[s], static_cast<arma::uword>(f));
        if (v1 == v2) continue;
        if (s < static_cast<std::size_t>(cfg.min_leaf) ||
            m - s < static_cast<std::size_t>(cfg.min_leaf)) {
          continue;
        }
        const double rs = sum - ls;
        const double rs2 = sum2 - ls2;
        const double sse_l = ls2 - ls * ls / static_cast<double>(s);
        const double sse_r = rs2 - rs * rs / static_cast<double>(m - s);
        const double score = std::max(0.0, sse_l) + std::max(0.0, sse_r);
        if (score < best_score) {
          double t = (v1 + v2) / 2.0;
          if (!(t < v2)) t = v1;  // adjacent doubles: keep the split usable
          best_score = score;
          best_feature = f;
          best_threshold = t;
          best_pos = s;
          best_sorted = sorted_idx;
        }
      }
    }

    if (best_feature < 0) return id;  // no admissible cut
    feature_gain[static_cast<std::size_t>(best_feature)] +=
        std::max(0.0, node_sse - best_score);

    std::vector<std::size_t> left(best_sorted.begin(),
                                  best_sorted.begin() + static_cast<std::ptrdiff_t>(best_pos));
    std::vector<std::size_t> right(best_sorted.begin() + static_cast<std::ptrdiff_t>(best_pos),
                                   best_sorted.end());
    tree.nodes[static_cast<std::size_t>(id)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
    const std::int32_t l = build(left, depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    const std::int32_t r = build(right, depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

double tree_value(const RegressionTree& tree, const arma::mat& X, std::size_t row) {
  std::int32_t cur = 0;
  while (true) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(cur)];
    if (node.feature < 0) return node.value;
    const double v = X(row, static_cast<arma::uword>(node.feature));
    cur = v <= node.threshold ? node.left : node.right;
  }
}

}  // namespace

RfModel rf_train(const arma::mat& X, const arma::vec& y, const RfConfig& config,
                 int threads) {
  const std::size_t n = X.n_rows;
  if (n < 2) throw ValidationError("rf_train: need at least 2 rows");
  if (y.n_elem != n) throw ValidationError("rf_train: X and y row mismatch");
  if (!X.is_finite() || !y.is_finite()) {
    throw ValidationError("rf_train: non-finite values in inputs");
  }
  if (config.n_tree < 1) throw ValidationError("rf_train: n_tree must be >= 1");
  if (config.min_leaf < 1) throw ValidationError("rf_train: min_leaf must be >= 1");

  RfModel model;
  model.config = config;
  model.n_features = X.n_cols;
  const int m_try = resolve_mtry(config.m_try, static_cast<int>(X.n_cols));

  model.trees.resize(static_cast<std::size_t>(config.n_tree));
  model.tree_seeds.resize(static_cast<std::size_t>(config.n_tree));
  std::vector<std::vector<double>> gains(static_cast<std::size_t>(config.n_tree));

  parallel_for(static_cast<std::size_t>(config.n_tree), threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(config.seed, t);
    model.tree_seeds[t] = tree_seed;
    TreeBuilder builder(X, y, config, m_try, tree_seed);

    std::vector<std::size_t> idx(n);
    if (config.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) {
        idx[i] = static_cast<std::size_t>(
            builder.rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
      }
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    builder.build(idx, 0);
    model.trees[t] = std::move(builder.tree);
    gains[t] = std::move(builder.feature_gain);
  });

  // Sequential reduction keeps the importance identical across thread counts.
  arma::vec total(X.n_cols, arma::fill::zeros);
  for (const auto& g : gains) {
    for (std::size_t f = 0; f < g.size(); ++f) total(f) += g[f];
  }
  total /= static_cast<double>(config.n_tree);
  const double mass = arma::accu(total);
  if (mass > 0.0) {
    model.importance = total / mass;
    model.importance_defined = true;
  } else {
    model.importance = arma::vec(X.n_cols, arma::fill::zeros);
    model.importance_defined = false;
  }
  return model;
}

arma::vec rf_predict(const RfModel& model, const arma::mat& X) {
  if (X.n_cols != model.n_features) {
    throw ValidationError("rf_predict: expected " +
                          fmt_int((std::int64_t)model.n_features) +
                          " feature columns, got " + fmt_int((std::int64_t)X.n_cols));
  }
  arma::vec out(X.n_rows, arma::fill::zeros);
  for (const auto& tree : model.trees) {
    for (std::size_t i = 0; i < X.n_rows; ++i) out(i) += tree_value(tree, X, i);
  }
  return out / static_cast<double>(model.trees.size());
}

std::string rf_model_to_json(const RfModel& model) {
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = "rf";
  doc["config"] = {
      {"n_tree", model.config.n_tree},
      {"m_try", mtry_rule_name(model.config.m_try)},
      {"min_leaf", model.config.min_leaf},
      {"max_depth", model.config.max_depth},
      {"bootstrap", model.config.bootstrap},
      {"seed", model.config.seed},
  };
  doc["n_features"] = model.n_features;
  doc["tree_seeds"] = model.tree_seeds;
  doc["importance"] = std::vector<double>(model.importance.begin(),
                                          model.importance.end());
  doc["importance_defined"] = model.importance_defined;
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& nd : tree.nodes) {
      nodes.push_back(json{{"f", nd.feature},
                           {"t", nd.threshold},
                           {"l", nd.left},
                           {"r", nd.right},
                           {"v", nd.value}});
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }
  doc["trees"] = std::move(trees);
  return doc.dump(2) + "\n";
}

RfModel rf_model_from_json(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("kind", "") != "rf" ||
      doc.value("format_version", 0) != 1) {
    throw ValidationError(origin + ": not a version-1 rf model dump");
  }
  RfModel model;
  const json& c = doc.at("config");
  model.config.n_tree = c.at("n_tree").get<int>();
  model.config.m_try = mtry_rule_from_name(c.at("m_try").get<std::string>());
  model.config.min_leaf = c.at("min_leaf").get<int>();
  model.config.max_depth = c.at("max_depth").get<int>();
  model.config.bootstrap = c.at("bootstrap").get<bool>();
  model.config.seed = c.at("seed").get<std::uint64_t>();
  model.n_features = doc.at("n_features").get<std::size_t>();
  model.tree_seeds = doc.at("tree_seeds").get<std::vector<std::uint64_t>>();
  const auto importance = doc.at("importance").get<std::vector<double>>();
  model.importance = arma::vec(importance);
  model.importance_defined = doc.at("importance_defined").get<bool>();
  for (const auto& t : doc.at("trees")) {
    RegressionTree tree;
    for (const auto& nd : t.at("nodes")) {
      TreeNode node;
      node.feature = nd.at("f").get<int>();
      node.threshold = nd.at("t").get<double>();
      node.left = nd.at("l").get<std::int32_t>();
      node.right = nd.at("r").get<std::int32_t>();
      node.value = nd.at("v").get<double>();
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

RfGridResult rf_grid_search(const arma::mat& X, const arma::vec& y,
                            const std::vector<int>& n_tree_grid,
                            const std::vector<MtryRule>& rules,
                            const FoldSpec& folds, std::uint64_t seed,
                            int threads) {
  if (n_tree_grid.empty() || rules.empty()) {
    throw ValidationError("rf_grid_search: empty grid");
  }
  if (folds.n != X.n_rows) {
    throw ValidationError("rf_grid_search: fold spec does not match rows");
  }

  RfGridResult result;
  double best_r2 = -std::numeric_limits<double>::infinity();
  int best_ntree = 0;
  std::size_t best_rule_pos = 0;
  bool have_best = false;
  for (const int n_tree : n_tree_grid) {
    for (std::size_t rule_pos = 0; rule_pos < rules.size(); ++rule_pos) {
      const MtryRule rule = rules[rule_pos];
      double r2_sum = 0.0;
      double sse = 0.0;
      for (int f = 0; f < folds.k; ++f) {
        const auto test_rows = folds.fold_rows(f);
        std::vector<std::size_t> train_rows;
        for (std::size_t i = 0; i < folds.n; ++i) {
          if (folds.assignment[i] != f) train_rows.push_back(i);
        }
        auto to_uvec = [](const std::vector<std::size_t>& rows) {
          arma::uvec out(rows.size());
          for (std::size_t i = 0; i < rows.size(); ++i) out(i) = rows[i];
          return out;
        };
        const arma::uvec tr = to_uvec(train_rows);
        const arma::uvec te = to_uvec(test_rows);
        RfConfig cfg;
        cfg.n_tree = n_tree;
        cfg.m_try = rule;
        cfg.seed = derive_seed(seed, static_cast<std::uint64_t>(f));
        const RfModel model = rf_train(X.rows(tr), y(tr), cfg, threads);
        const arma::vec pred = rf_predict(model, X.rows(te));
        const arma::vec resid = y(te) - pred;
        const arma::vec dy = y(te) - arma::mean(y(te));
        const double tss = arma::dot(dy, dy);
        const double rss = arma::dot(resid, resid);
        r2_sum += tss > 0.0 ? 1.0 - rss / tss : 0.0;
        sse += rss;
      }
      RfGridCell cell;
      cell.n_tree = n_tree;
      cell.m_try = rule;
      cell.mean_r2 = r2_sum / static_cast<double>(folds.k);
      cell.pooled_rmse = std::sqrt(sse / static_cast<double>(folds.n));
      result.table.push_back(cell);
      // Ties go to the smaller n_tree, then the earlier rule in the list.
      const bool better =
          !have_best || cell.mean_r2 > best_r2 ||
          (cell.mean_r2 == best_r2 &&
           (n_tree < best_ntree ||
            (n_tree == best_ntree && rule_pos < best_rule_pos)));
      if (better) {
        have_best = true;
        best_r2 = cell.mean_r2;
        best_ntree = n_tree;
        best_rule_pos = rule_pos;
        result.best.n_tree = n_tree;
        result.best.m_try = rule;
        result.best.seed = seed;
      }
    }
  }
  return result;
}

}  // namespace areal
