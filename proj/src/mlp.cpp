#include <cmath>

#include <json.hpp>

#include "areal/mlmod.hpp"
#include "areal/rng.hpp"

namespace areal {

using nlohmann::json;

namespace {

void validate_config(const MlpConfig& cfg) {
  for (const int width : cfg.layers) {
    if (width < 1) throw ValidationError("mlp: hidden layer width must be >= 1");
  }
  if (!cfg.dropout.empty() && cfg.dropout.size() != cfg.layers.size()) {
    throw ValidationError("mlp: dropout list must match hidden layer list");
  }
  for (const double rate : cfg.dropout) {
    if (!(rate >= 0.0 && rate < 1.0)) {
      throw ValidationError("mlp: dropout rates must lie in [0, 1)");
    }
  }
  if (cfg.epochs < 0) throw ValidationError("mlp: epochs must be >= 0");
  if (cfg.batch < 1) throw ValidationError("mlp: batch size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("mlp: learning rate must be positive");
  if (!(cfg.lr_decay > 0.0)) throw ValidationError("mlp: lr decay must be positive");
}

// He-style fan-in uniform init; element order is fixed (layer, row, column)
// so a seed fully determines the weights.
MlpModel init_model(const MlpConfig& cfg, std::size_t n_features, Rng& rng) {
  MlpModel model;
  model.config = cfg;
  model.n_features = n_features;
  std::size_t fan_in = n_features;
  std::vector<std::size_t> widths;
  for (const int w : cfg.layers) widths.push_back(static_cast<std::size_t>(w));
  widths.push_back(1);  // linear output neuron
  for (const std::size_t out : widths) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    arma::mat W(fan_in, out);
    for (std::size_t r = 0; r < fan_in; ++r) {
      for (std::size_t c = 0; c < out; ++c) W(r, c) = rng.uniform(-limit, limit);
    }
    model.weights.push_back(std::move(W));
    model.biases.push_back(arma::rowvec(out, arma::fill::zeros));
    fan_in = out;
  }
  return model;
}

double dropout_rate(const MlpConfig& cfg, std::size_t hidden_layer) {
  if (cfg.dropout.empty()) return 0.0;
  return cfg.dropout[hidden_layer];
}

struct ForwardPass {
  std::vector<arma::mat> inputs;       // inputs[l]: activation entering layer l
  std::vector<arma::mat> pre_act;      // hidden pre-activations
  std::vector<arma::mat> masks;        // inverted dropout masks (empty if off)
  arma::vec yhat;
};

ForwardPass forward(const MlpModel& model, const arma::mat& X, bool training,
                    Rng* rng) {
  const std::size_t n_hidden = model.config.layers.size();
  ForwardPass fp;
  arma::mat a = X;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    fp.inputs.push_back(a);
    arma::mat z = a * model.weights[l];
    z.each_row() += model.biases[l];
    fp.pre_act.push_back(z);
    a = arma::clamp(z, 0.0, arma::datum::inf);  // ReLU
    const double rate = dropout_rate(model.config, l);
    if (training && rate > 0.0) {
      // Inverted dropout: scale at train time, identity at inference.
      arma::mat mask(a.n_rows, a.n_cols);
      const double keep = 1.0 - rate;
      for (std::size_t r = 0; r < mask.n_rows; ++r) {
        for (std::size_t c = 0; c < mask.n_cols; ++c) {
          mask(r, c) = rng->uniform01() < keep ? 1.0 / keep : 0.0;
        }
      }
      a %= mask;
      fp.masks.push_back(std::move(mask));
    } else {
      fp.masks.emplace_back();
    }
  }
  fp.inputs.push_back(a);
  arma::mat out = a * model.weights[n_hidden];
  out.each_row() += model.biases[n_hidden];
  fp.yhat = out.col(0);
  return fp;
}

struct GradientBuffers {
  std::vector<arma::mat> d_weights;
  std::vector<arma::rowvec> d_biases;
  double loss = 0.0;
};

GradientBuffers backward(const MlpModel& model, const ForwardPass& fp,
                         const arma::vec& y) {
  const std::size_t n_hidden = model.config.layers.size();
  const double b = static_cast<double>(y.n_elem);

  GradientBuffers g;
  g.d_weights.resize(model.weights.size());
  g.d_biases.resize(model.biases.size());

  const arma::vec err = fp.yhat - y;
  g.loss = arma::dot(err, err) / b;

  arma::mat delta = err * (2.0 / b);  // n x 1
  g.d_weights[n_hidden] = fp.inputs[n_hidden].t() * delta;
  g.d_biases[n_hidden] = arma::sum(delta, 0);
  arma::mat da = delta * model.weights[n_hidden].t();

  for (std::size_t l = n_hidden; l-- > 0;) {
    arma::mat dz = da % arma::conv_to<arma::mat>::from(fp.pre_act[l] > 0.0);
    if (!fp.masks[l].is_empty()) dz %= fp.masks[l];
    g.d_weights[l] = fp.inputs[l].t() * dz;
    g.d_biases[l] = arma::sum(dz, 0);
    if (l > 0) da = dz * model.weights[l].t();
  }
  return g;
}

}  // namespace

MlpModel mlp_train(const arma::mat& X, const arma::vec& y, const MlpConfig& config) {
  validate_config(config);
  const std::size_t n = X.n_rows;
  if (y.n_elem != n) throw ValidationError("mlp_train: X and y row mismatch");
  if (n == 0) throw ValidationError("mlp_train: empty training set");
  if (static_cast<std::size_t>(config.batch) > n) {
    throw ValidationError("mlp_train: batch size exceeds sample count");
  }
  if (!X.is_finite() || !y.is_finite()) {
    throw ValidationError("mlp_train: non-finite values in inputs");
  }

  Rng rng(config.seed);
  MlpModel model = init_model(config, X.n_cols, rng);

  // Per-parameter adaptive steps via first/second moment estimates.
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  std::vector<arma::mat> mw, vw;
  std::vector<arma::rowvec> mb, vb;
  for (const auto& W : model.weights) {
    mw.emplace_back(arma::size(W), arma::fill::zeros);
    vw.emplace_back(arma::size(W), arma::fill::zeros);
  }
  for (const auto& b : model.biases) {
    mb.emplace_back(arma::size(b), arma::fill::zeros);
    vb.emplace_back(arma::size(b), arma::fill::zeros);
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  double lr = config.learning_rate;
  std::int64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch));
      arma::uvec rows(stop - start);
      for (std::size_t i = start; i < stop; ++i) rows(i - start) = order[i];

      const ForwardPass fp = forward(model, X.rows(rows), true, &rng);
      const GradientBuffers g = backward(model, fp, y(rows));
      if (!std::isfinite(g.loss)) {
        throw NumericError("mlp_train: loss diverged at epoch " + fmt_int(epoch));
      }

      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t l = 0; l < model.weights.size(); ++l) {
        mw[l] = kBeta1 * mw[l] + (1.0 - kBeta1) * g.d_weights[l];
        vw[l] = kBeta2 * vw[l] + (1.0 - kBeta2) * arma::square(g.d_weights[l]);
        model.weights[l] -= lr * (mw[l] / c1) / (arma::sqrt(vw[l] / c2) + kEps);
        mb[l] = kBeta1 * mb[l] + (1.0 - kBeta1) * g.d_biases[l];
        vb[l] = kBeta2 * vb[l] + (1.0 - kBeta2) * arma::square(g.d_biases[l]);
        model.biases[l] -= lr * (mb[l] / c1) / (arma::sqrt(vb[l] / c2) + kEps);
      }
    }
    lr *= config.lr_decay;
  }
  return model;
}

arma::vec mlp_predict(const MlpModel& model, const arma::mat& X) {
  if (X.n_cols != model.n_features) {
    throw ValidationError("mlp_predict: expected " +
                          fmt_int((std::int64_t)model.n_features) +
                          " feature columns, got " + fmt_int((std::int64_t)X.n_cols));
  }
  return forward(model, X, false, nullptr).yhat;
}

MlpGradients mlp_gradients(const MlpModel& model, const arma::mat& X,
                           const arma::vec& y) {
  const ForwardPass fp = forward(model, X, false, nullptr);
  GradientBuffers g = backward(model, fp, y);
  MlpGradients out;
  out.loss = g.loss;
  out.d_weights = std::move(g.d_weights);
  out.d_biases = std::move(g.d_biases);
  return out;
}

double mlp_gradient_check(const MlpConfig& config, const arma::mat& X,
                          const arma::vec& y) {
  validate_config(config);
  Rng rng(config.seed);
  MlpModel model = init_model(config, X.n_cols, rng);
  const MlpGradients analytic = mlp_gradients(model, X, y);

  constexpr double kH = 1e-5;
  const auto loss_at = [&]() { return mlp_gradients(model, X, y).loss; };

  double max_rel = 0.0;
  auto check_param = [&](double& theta, double analytic_g) {
    const double saved = theta;
    theta = saved + kH;
    const double up = loss_at();
    theta = saved - kH;
    const double down = loss_at();
    theta = saved;
    const double numeric_g = (up - down) / (2.0 * kH);
    const double rel = std::fabs(analytic_g - numeric_g) /
                       std::max(1e-8, std::fabs(analytic_g) + std::fabs(numeric_g));
    max_rel = std::max(max_rel, rel);
  };

  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    arma::mat& W = model.weights[l];
    for (std::size_t r = 0; r < W.n_rows; ++r) {
      for (std::size_t c = 0; c < W.n_cols; ++c) {
        check_param(W(r, c), analytic.d_weights[l](r, c));
      }
    }
    arma::rowvec& b = model.biases[l];
    for (std::size_t c = 0; c < b.n_cols; ++c) {
      check_param(b(c), analytic.d_biases[l](c));
    }
  }
  return max_rel;
}

std::string mlp_model_to_json(const MlpModel& model) {
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = "mlp";
  doc["config"] = {
      {"layers", model.config.layers},
      {"dropout", model.config.dropout},
      {"epochs", model.config.epochs},
      {"batch", model.config.batch},
      {"learning_rate", model.config.learning_rate},
      {"lr_decay", model.config.lr_decay},
      {"seed", model.config.seed},
  };
  doc["n_features"] = model.n_features;
  json layers = json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    json W = json::array();
    for (std::size_t r = 0; r < model.weights[l].n_rows; ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < model.weights[l].n_cols; ++c) {
        row.push_back(model.weights[l](r, c));
      }
      W.push_back(std::move(row));
    }
    json b = json::array();
    for (std::size_t c = 0; c < model.biases[l].n_cols; ++c) {
      b.push_back(model.biases[l](c));
    }
    layers.push_back(json{{"weights", std::move(W)}, {"biases", std::move(b)}});
  }
  doc["parameters"] = std::move(layers);
  return doc.dump(2) + "\n";
}

MlpModel mlp_model_from_json(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("kind", "") != "mlp" ||
      doc.value("format_version", 0) != 1) {
    throw ValidationError(origin + ": not a version-1 mlp model dump");
  }
  MlpModel model;
  const json& c = doc.at("config");
  model.config.layers = c.at("layers").get<std::vector<int>>();
  model.config.dropout = c.at("dropout").get<std::vector<double>>();
  model.config.epochs = c.at("epochs").get<int>();
  model.config.batch = c.at("batch").get<int>();
  model.config.learning_rate = c.at("learning_rate").get<double>();
  model.config.lr_decay = c.at("lr_decay").get<double>();
  model.config.seed = c.at("seed").get<std::uint64_t>();
  model.n_features = doc.at("n_features").get<std::size_t>();
  for (const auto& layer : doc.at("parameters")) {
    const auto rows = layer.at("weights").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw ValidationError(origin + ": empty weight matrix");
    arma::mat W(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != W.n_cols) {
        throw ValidationError(origin + ": ragged weight matrix");
      }
      for (std::size_t cidx = 0; cidx < rows[r].size(); ++cidx) {
        W(r, cidx) = rows[r][cidx];
      }
    }
    const auto bias = layer.at("biases").get<std::vector<double>>();
    model.weights.push_back(std::move(W));
    model.biases.push_back(arma::rowvec(bias));
  }
  return model;
}

}  // namespace areal
