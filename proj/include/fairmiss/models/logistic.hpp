// Copyright 2026 The fairmiss Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRMISS_MODELS_LOGISTIC_HPP
#define FAIRMISS_MODELS_LOGISTIC_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <nlohmann/json.hpp>

#include "fairmiss/models/common.hpp"

namespace fairmiss::models {

struct LogisticParams {
  double l2 = 1e-4;
  double tolerance = 1e-5;  // largest gradient component at convergence
  std::size_t max_iter = 2000;
  double initial_step = 1.0;

  void validate() const {
    if (!(l2 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "l2 must be non-negative");
    if (!(tolerance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be positive");
    if (max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "max_iter must be at least 1");
  }
};

/// Numeric columns are standardised with training moments; categorical
/// columns become one indicator per training level.
struct OneHotEncoder {
  TrainingSchema schema;
  std::vector<double> center, scale;  // numeric features only, 0/1 otherwise
  std::vector<std::size_t> offset;    // first design column of each feature
  std::size_t width = 0;

  static OneHotEncoder fit(const TrainingSchema& schema, const Dataset& train) {
    OneHotEncoder e;
    e.schema = schema;
    const BoundRows b(schema, train);
    for (std::size_t j = 0; j < schema.features.size(); ++j) {
      e.offset.push_back(e.width);
      if (schema.features[j].kind == ColumnKind::kNumeric) {
        double s = 0, ss = 0;
        const auto n = static_cast<double>(b.n_rows());
        for (std::size_t r = 0; r < b.n_rows(); ++r) s += b.number(j, r);
        const double mu = s / n;
        for (std::size_t r = 0; r < b.n_rows(); ++r) ss += (b.number(j, r) - mu) * (b.number(j, r) - mu);
        const double sd = std::sqrt(ss / n);
        e.center.push_back(mu);
        e.scale.push_back(sd > 0 ? sd : 1.0);
        e.width += 1;
      } else {
        e.center.push_back(0.0);
        e.scale.push_back(1.0);
        e.width += schema.features[j].levels.size();
      }
    }
    return e;
  }

  /// Design matrix; sparse because most columns are level indicators.
  Eigen::SparseMatrix<double, Eigen::RowMajor> transform(const Dataset& rows) const {
    const BoundRows b(schema, rows);
    std::vector<Eigen::Triplet<double>> cells;
    cells.reserve(rows.n_rows() * schema.features.size());
    for (std::size_t r = 0; r < b.n_rows(); ++r) {
      const auto row = static_cast<int>(r);
      for (std::size_t j = 0; j < schema.features.size(); ++j) {
        if (schema.features[j].kind == ColumnKind::kNumeric) {
          cells.emplace_back(row, static_cast<int>(offset[j]), (b.number(j, r) - center[j]) / scale[j]);
        } else if (const auto code = b.code(j, r); code >= 0) {
          cells.emplace_back(row, static_cast<int>(offset[j] + static_cast<std::size_t>(code)), 1.0);
        }
      }
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> x(static_cast<Eigen::Index>(rows.n_rows()),
                                                   static_cast<Eigen::Index>(width));
    x.setFromTriplets(cells.begin(), cells.end());
    return x;
  }

  std::vector<std::string> column_names() const {
    std::vector<std::string> names;
    for (const auto& f : schema.features) {
      if (f.kind == ColumnKind::kNumeric) {
        names.push_back(f.name);
      } else {
        for (const auto& l : f.levels) names.push_back(f.name + "=" + l);
      }
    }
    return names;
  }
};

struct LogisticModel {
  OneHotEncoder encoder;
  Eigen::MatrixXd weights;  // classes x design columns
  Eigen::VectorXd bias;     // per class
  double loss = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

struct LossGradient {
  double loss = 0.0;
  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
};

/// Mean softmax cross-entropy plus (l2 / 2) ||W||^2, with its gradient.
template <typename Design>
LossGradient softmax_loss(const Design& x, const std::vector<std::int32_t>& y,
                                 const Eigen::MatrixXd& w, const Eigen::VectorXd& b, double l2) {
  const auto n = x.rows();
  Eigen::MatrixXd z = x * w.transpose();
  z.rowwise() += b.transpose();
  LossGradient out;
  const Eigen::VectorXd mx = z.rowwise().maxCoeff();
  z.colwise() -= mx;
  z = z.array().exp().matrix();
  const Eigen::VectorXd total = z.rowwise().sum();
  double nll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto yi = y[static_cast<std::size_t>(i)];
    nll -= std::log(std::max(z(i, yi) / total(i), 1e-300));
  }
  z.array().colwise() /= total.array();
  for (Eigen::Index i = 0; i < n; ++i) z(i, y[static_cast<std::size_t>(i)]) -= 1.0;  // z = p - onehot(y)
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = nll * inv_n + 0.5 * l2 * w.squaredNorm();
  out.grad_w = (x.transpose() * z).transpose() * inv_n + l2 * w;
  out.grad_b = z.colwise().sum().transpose() * inv_n;
  return out;
}

}  // namespace detail

/// Batch gradient descent with Nesterov momentum, backtracking on the step
/// and a momentum restart whenever the loss goes up. Stops once the largest
/// gradient component falls below the tolerance.
inline LogisticModel fit_logistic(const Dataset& train, const LogisticParams& params) {
  params.validate();
  require_complete_features(train, "logistic regression");
  LogisticModel m;
  const auto schema = training_schema(train);
  m.encoder = OneHotEncoder::fit(schema, train);
  const auto x = m.encoder.transform(train);
  const std::vector<std::int32_t> y(train.label().codes().begin(), train.label().codes().end());
  const auto k = static_cast<Eigen::Index>(schema.classes.size());
  m.weights = Eigen::MatrixXd::Zero(k, x.cols());
  m.bias = Eigen::VectorXd::Zero(k);

  Eigen::MatrixXd yw = m.weights;  // extrapolated point
  Eigen::VectorXd yb = m.bias;
  double t = 1.0;
  double step = params.initial_step;
  double loss = detail::softmax_loss(x, y, m.weights, m.bias, params.l2).loss;
  for (m.iterations = 0; m.iterations < params.max_iter; ++m.iterations) {
    const auto at = detail::softmax_loss(x, y, yw, yb, params.l2);
    const double g_max = std::max(at.grad_w.cwiseAbs().maxCoeff(), at.grad_b.cwiseAbs().maxCoeff());
    if (g_max <= params.tolerance) {
      if (at.loss <= loss) {
        m.weights = yw;
        m.bias = yb;
        loss = at.loss;
      }
      m.converged = true;
      break;
    }
    const double g2 = at.grad_w.squaredNorm() + at.grad_b.squaredNorm();
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
    double next = 0.0;
    for (;;) {
      w = yw - step * at.grad_w;
      b = yb - step * at.grad_b;
      next = detail::softmax_loss(x, y, w, b, params.l2).loss;
      if (next <= at.loss - 0.5 * step * g2 || step < 1e-12) break;
      step *= 0.5;
    }
    if (next > loss) {
      // Restart: drop the momentum and take a plain step from the iterate.
      yw = m.weights;
      yb = m.bias;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    yw = w + beta * (w - m.weights);
    yb = b + beta * (b - m.bias);
    m.weights = std::move(w);
    m.bias = std::move(b);
    loss = next;
    t = t_next;
    step *= 1.25;
  }
  m.loss = loss;
  return m;
}

inline std::vector<std::vector<double>> predict_scores(const LogisticModel& m, const Dataset& rows) {
  require_complete_features(rows, "logistic regression");
  const auto x = m.encoder.transform(rows);
  Eigen::MatrixXd z = x * m.weights.transpose();
  z.rowwise() += m.bias.transpose();
  std::vector<std::vector<double>> out(rows.n_rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double mx = z.row(i).maxCoeff();
    Eigen::RowVectorXd e = (z.row(i).array() - mx).exp();
    e /= e.sum();
    out[static_cast<std::size_t>(i)].assign(e.data(), e.data() + e.size());
  }
  return out;
}

inline Predictions predict(const LogisticModel& m, const Dataset& rows) {
  auto scores = predict_scores(m, rows);
  std::vector<std::size_t> cls(scores.size());
  for (std::size_t r = 0; r < scores.size(); ++r) cls[r] = argmax(scores[r]);
  return to_predictions(m.encoder.schema.classes, rows, cls, std::move(scores));
}

inline void to_json(nlohmann::json& j, const LogisticModel& m) {
  j = nlohmann::json{{"type", "logistic"},
                     {"schema", m.encoder.schema},
                     {"design_columns", m.encoder.column_names()},
                     {"center", m.encoder.center},
                     {"scale", m.encoder.scale},
                     {"loss", m.loss},
                     {"iterations", m.iterations},
                     {"converged", m.converged}};
  nlohmann::json w = nlohmann::json::array();
  for (Eigen::Index k = 0; k < m.weights.rows(); ++k) {
    std::vector<double> row(static_cast<std::size_t>(m.weights.cols()));
    for (Eigen::Index c = 0; c < m.weights.cols(); ++c) row[static_cast<std::size_t>(c)] = m.weights(k, c);
    w.push_back(row);
  }
  j["weights"] = w;
  j["bias"] = std::vector<double>(m.bias.data(), m.bias.data() + m.bias.size());
}

}  // namespace fairmiss::models

#endif  // FAIRMISS_MODELS_LOGISTIC_HPP
