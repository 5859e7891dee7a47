#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <armadillo>

#include "areal/folds.hpp"

namespace areal {

// Features-per-split rule; S = feature count.
enum class MtryRule { all, sqrt_rule, log2_rule, half, third };

inline constexpr std::array<MtryRule, 5> kMtryRules = {
    MtryRule::all, MtryRule::sqrt_rule, MtryRule::log2_rule, MtryRule::half,
    MtryRule::third};

const char* mtry_rule_name(MtryRule rule);
MtryRule mtry_rule_from_name(const std::string& name);
int resolve_mtry(MtryRule rule, int n_features);  // clamped to [1, S]

struct RfConfig {
  int n_tree = 80;
  MtryRule m_try = MtryRule::sqrt_rule;
  int min_leaf = 1;
  int max_depth = 0;      // 0 = unlimited
  bool bootstrap = true;  // disable to train each tree on the full sample
  std::uint64_t seed = 0;
};

// Leaf when feature < 0; `value` is the mean of the node's training targets.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct RfModel {
  RfConfig config;
  std::size_t n_features = 0;
  std::vector<RegressionTree> trees;
  std::vector<std::uint64_t> tree_seeds;  // derive_seed(config.seed, tree index)
  arma::vec importance;                   // sums to 1 when defined
  bool importance_defined = false;
};

// CART regression forest: per-tree bootstrap (n draws with replacement),
// m_try features sampled without replacement per node, best split minimizes
// the summed child SSE (ties: lowest feature index, then lowest threshold).
// Importance is the per-feature impurity decrease averaged over trees and
// normalized to sum 1; constant-y training yields single-leaf trees with the
// all-zero importance flagged undefined.
RfModel rf_train(const arma::mat& X, const arma::vec& y, const RfConfig& config,
                 int threads = 1);

arma::vec rf_predict(const RfModel& model, const arma::mat& X);

std::string rf_model_to_json(const RfModel& model);
RfModel rf_model_from_json(const std::string& text, const std::string& origin);

struct RfGridCell {
  int n_tree = 0;
  MtryRule m_try = MtryRule::sqrt_rule;
  double mean_r2 = 0.0;
  double pooled_rmse = 0.0;
};

struct RfGridResult {
  RfConfig best;
  std::vector<RfGridCell> table;  // grid order: n_tree outer, rule inner
};

// Scores every (n_tree, rule) cell by k-fold CV on (X, y) with per-fold
// model seeds derived from `seed`; picks the highest mean R^2, ties to the
// smaller n_tree then the rule order as listed.
RfGridResult rf_grid_search(const arma::mat& X, const arma::vec& y,
                            const std::vector<int>& n_tree_grid,
                            const std::vector<MtryRule>& rules,
                            const FoldSpec& folds, std::uint64_t seed,
                            int threads = 1);

inline std::vector<int> default_n_tree_grid() {
  std::vector<int> g;
  for (int t = 10; t <= 200; t += 10) g.push_back(t);
  return g;
}

struct MlpConfig {
  std::vector<int> layers = {128, 128, 64, 32};      // hidden widths
  std::vector<double> dropout = {0.2, 0.2, 0.0, 0.0};  // per hidden layer
  int epochs = 200;
  int batch = 32;
  double learning_rate = 1e-3;
  double lr_decay = 1.0;  // multiplicative per-epoch factor
  std::uint64_t seed = 0;
};

struct MlpModel {
  MlpConfig config;
  std::size_t n_features = 0;
  std::vector<arma::mat> weights;   // weights[l]: fan_in x fan_out
  std::vector<arma::rowvec> biases;
};

// Mini-batch MSE training with per-parameter adaptive steps (moment
// estimates), ReLU hidden activations, inverted dropout at train time, and
// He-style fan-in uniform initialization from the seeded generator. The
// hidden layer list may be empty (a single linear output neuron).
MlpModel mlp_train(const arma::mat& X, const arma::vec& y, const MlpConfig& config);

arma::vec mlp_predict(const MlpModel& model, const arma::mat& X);

// Full-batch MSE loss and analytic parameter gradients (dropout disabled).
// Exposed so gradient correctness is directly testable.
struct MlpGradients {
  double loss = 0.0;
  std::vector<arma::mat> d_weights;
  std::vector<arma::rowvec> d_biases;
};

MlpGradients mlp_gradients(const MlpModel& model, const arma::mat& X,
                           const arma::vec& y);

// Max relative error between analytic and central finite-difference
// gradients (h = 1e-5) over every parameter of a freshly initialized net.
double mlp_gradient_check(const MlpConfig& config, const arma::mat& X,
                          const arma::vec& y);

std::string mlp_model_to_json(const MlpModel& model);
MlpModel mlp_model_from_json(const std::string& text, const std::string& origin);

}  // namespace areal
