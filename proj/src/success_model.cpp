#include "adviser/success_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace adviser {

namespace {

constexpr int kModelFormatVersion = 1;

double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

std::string arm_name(InterventionKind k) { return std::string(to_string(k)); }

double mean_prediction(const LogisticModel& m, std::span<const FeatureVector> rows) {
  double s = 0.0;
  for (const auto& x : rows) s += predict(m, x);
  return s / static_cast<double>(rows.size());
}

LogisticModel calibrate(const std::string& label, const KindPrior& prior,
                        const FeatureSchema& schema, const Standardizer& scaler,
                        std::span<const FeatureVector> reference) {
  if (!(prior.rate >= 0.0 && prior.rate <= 1.0)) {
    throw ValidationError("survey rate for " + label + " outside [0, 1]");
  }
  LogisticModel m;
  m.label = label;
  m.schema = schema.names;
  m.scaler = scaler;
  m.weights.assign(schema.size(), 0.0);
  for (const auto& adj : prior.adjustments) {
    const auto idx = schema.index(adj.feature);
    if (!idx) throw ValidationError("survey adjustment names unknown feature " + adj.feature);
    m.weights[*idx] = adj.slope;
  }
  // Mean prediction is increasing in the intercept.
  double lo = -30.0;
  double hi = 30.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    m.intercept = mid;
    if (mean_prediction(m, reference) < prior.rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  m.intercept = 0.5 * (lo + hi);
  m.meta.samples = 0;
  m.meta.converged = true;
  return m;
}

}  // namespace

std::optional<std::size_t> FeatureSchema::index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

FeatureSchema FeatureSchema::default_schema() {
  return {{"household_income", "mother_age", "children_count", "prior_completion_ratio",
           "distance_to_center_minutes"}};
}

Standardizer Standardizer::fit(std::span<const FeatureVector> rows, std::size_t dims) {
  Standardizer s;
  s.mean.assign(dims, 0.0);
  s.scale.assign(dims, 1.0);
  if (rows.empty()) return s;
  const double n = static_cast<double>(rows.size());
  for (const auto& x : rows) {
    for (std::size_t j = 0; j < dims; ++j) s.mean[j] += x[j];
  }
  for (auto& m : s.mean) m /= n;
  std::vector<double> var(dims, 0.0);
  for (const auto& x : rows) {
    for (std::size_t j = 0; j < dims; ++j) var[j] += (x[j] - s.mean[j]) * (x[j] - s.mean[j]);
  }
  for (std::size_t j = 0; j < dims; ++j) {
    const double sd = std::sqrt(var[j] / n);
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

FeatureVector Standardizer::apply(const FeatureVector& x) const {
  FeatureVector z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean[j]) / scale[j];
  return z;
}

std::vector<double> LogisticModel::raw_weights() const {
  std::vector<double> w(weights.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = weights[j] / scaler.scale[j];
  return w;
}

double LogisticModel::raw_intercept() const {
  double b = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    b -= weights[j] * scaler.mean[j] / scaler.scale[j];
  }
  return b;
}

LogisticObjective::LogisticObjective(Eigen::MatrixXd design, Eigen::VectorXd outcomes,
                                     double lambda)
    : design_(std::move(design)), y_(std::move(outcomes)), lambda_(lambda) {}

double LogisticObjective::value(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd eta = design_ * theta;
  double nll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) nll += softplus(eta[i]) - y_[i] * eta[i];
  const double penalty = theta.tail(theta.size() - 1).squaredNorm();
  return nll / static_cast<double>(eta.size()) + 0.5 * lambda_ * penalty;
}

Eigen::VectorXd LogisticObjective::gradient(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd eta = design_ * theta;
  Eigen::VectorXd r(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = sigmoid(eta[i]) - y_[i];
  Eigen::VectorXd g = design_.transpose() * r / static_cast<double>(eta.size());
  g.tail(g.size() - 1) += lambda_ * theta.tail(theta.size() - 1);
  return g;
}

Eigen::MatrixXd LogisticObjective::hessian(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd eta = design_ * theta;
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double p = sigmoid(eta[i]);
    w[i] = p * (1.0 - p);
  }
  Eigen::MatrixXd h = design_.transpose() * w.asDiagonal() * design_ /
                      static_cast<double>(eta.size());
  for (Eigen::Index j = 1; j < h.rows(); ++j) h(j, j) += lambda_;
  return h;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LogisticModel train(std::span<const LabeledExample> examples, double lambda,
                    const TrainOptions& opts) {
  if (lambda < 0.0) throw ValidationError("regularization must be non-negative");
  if (examples.empty()) throw ValidationError("no training examples");
  const std::size_t dims = examples.front().x.size();
  std::size_t positives = 0;
  for (const auto& e : examples) {
    if (e.x.size() != dims) throw ValidationError("training rows differ in length");
    for (double v : e.x) {
      if (!std::isfinite(v)) throw ValidationError("non-finite training feature");
    }
    positives += e.outcome ? 1 : 0;
  }
  if (positives == 0 || positives == examples.size()) {
    throw ValidationError("training needs at least one positive and one negative example");
  }

  std::vector<FeatureVector> rows;
  rows.reserve(examples.size());
  for (const auto& e : examples) rows.push_back(e.x);
  const auto scaler = Standardizer::fit(rows, dims);

  const auto n = static_cast<Eigen::Index>(examples.size());
  const auto p = static_cast<Eigen::Index>(dims) + 1;
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto z = scaler.apply(rows[static_cast<std::size_t>(i)]);
    design(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) design(i, j) = z[static_cast<std::size_t>(j - 1)];
    y[i] = examples[static_cast<std::size_t>(i)].outcome ? 1.0 : 0.0;
  }
  const LogisticObjective objective(design, y, lambda);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  double f = objective.value(theta);
  TrainingMetadata meta;
  meta.samples = examples.size();
  meta.timestamp = opts.timestamp;
  meta.lambda = lambda;
  meta.objective_trace.push_back(f);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Eigen::VectorXd g = objective.gradient(theta);
    if (g.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
      meta.converged = true;
      break;
    }
    Eigen::MatrixXd h = objective.hessian(theta);
    // Tiny ridge keeps the solve defined for constant columns.
    h.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = h.ldlt().solve(g);
    double t = 1.0;
    Eigen::VectorXd next = theta - step;
    double fn = objective.value(next);
    while (!(fn <= f) && t > 1e-10) {
      t *= 0.5;
      next = theta - t * step;
      fn = objective.value(next);
    }
    meta.iterations = it + 1;
    if (!(fn <= f)) break;  // no descent possible; gradient check below decides
    theta = next;
    f = fn;
    meta.objective_trace.push_back(f);
  }
  if (!meta.converged &&
      objective.gradient(theta).lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
    meta.converged = true;
  }

  if (lambda == 0.0) {
    const Eigen::VectorXd eta = design * theta;
    bool separated = true;
    for (Eigen::Index i = 0; i < n && separated; ++i) {
      separated = y[i] > 0.5 ? eta[i] > 0.0 : eta[i] < 0.0;
    }
    if (separated) {
      throw NonConvergenceError("training data are linearly separable; the "
                                "unregularized fit does not converge");
    }
  }
  if (!meta.converged) {
    throw NonConvergenceError("logistic fit did not converge in " +
                              std::to_string(opts.max_iterations) + " iterations");
  }

  LogisticModel m;
  m.label = opts.label;
  m.schema = opts.schema;
  if (m.schema.empty()) {
    for (std::size_t j = 0; j < dims; ++j) m.schema.push_back("x" + std::to_string(j));
  }
  if (m.schema.size() != dims) throw ValidationError("schema length differs from features");
  m.scaler = scaler;
  m.intercept = theta[0];
  m.weights.assign(theta.data() + 1, theta.data() + p);
  m.meta = std::move(meta);
  return m;
}

double predict(const LogisticModel& m, const FeatureVector& x) {
  if (x.size() != m.weights.size()) {
    throw ValidationError("feature vector length " + std::to_string(x.size()) +
                          " does not match model schema length " +
                          std::to_string(m.weights.size()));
  }
  double eta = m.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) {
    eta += m.weights[j] * (x[j] - m.scaler.mean[j]) / m.scaler.scale[j];
  }
  return sigmoid(eta);
}

const LogisticModel& ModelSet::at(InterventionKind k) const {
  const auto it = by_kind.find(k);
  if (it == by_kind.end()) {
    throw NotFoundError("no model for " + std::string(to_string(k)));
  }
  return it->second;
}

double need_score(const ModelSet& models, const FeatureVector& x, InterventionKind k) {
  if (models.baseline.weights.empty() && models.baseline.label.empty()) {
    throw NotFoundError("model set has no baseline model");
  }
  return predict(models.at(k), x) - predict(models.baseline, x);
}

SurveyPrior SurveyPrior::deployment_default() {
  SurveyPrior p;
  p.baseline = {0.436,
                {{"prior_completion_ratio", 0.6},
                 {"household_income", 0.3},
                 {"distance_to_center_minutes", -0.4}}};
  p.kinds[InterventionKind::kPhoneCall] = {0.729, {{"prior_completion_ratio", -0.4}}};
  p.kinds[InterventionKind::kTravelVoucher] = {
      0.8392, {{"household_income", -0.5}, {"distance_to_center_minutes", 0.2}}};
  p.kinds[InterventionKind::kPickupService] = {
      0.8571, {{"household_income", -0.4}, {"distance_to_center_minutes", 0.4}}};
  p.kinds[InterventionKind::kVaccineDrive] = {0.9363, {{"distance_to_center_minutes", 0.5}}};
  return p;
}

ModelSet cold_start_from_survey(const SurveyPrior& prior, const FeatureSchema& schema,
                                std::span<const FeatureVector> reference) {
  for (auto k : kAllKinds) {
    if (!prior.kinds.count(k)) {
      throw ValidationError("survey prior is missing " + std::string(to_string(k)));
    }
  }
  if (reference.empty()) throw ValidationError("empty reference population");
  for (const auto& x : reference) {
    if (x.size() != schema.size()) throw ValidationError("reference row does not match schema");
  }
  const auto scaler = Standardizer::fit(reference, schema.size());
  ModelSet set;
  set.baseline = calibrate("none", prior.baseline, schema, scaler, reference);
  for (auto k : kAllKinds) {
    set.by_kind[k] = calibrate(arm_name(k), prior.kinds.at(k), schema, scaler, reference);
  }
  return set;
}

ModelSet train_model_set(const ArmExamples& data, double lambda, const FeatureSchema& schema,
                         const std::string& timestamp) {
  const auto fit = [&](const std::string& arm) {
    const auto it = data.find(arm);
    if (it == data.end()) throw ValidationError("no training data for arm " + arm);
    TrainOptions opts;
    opts.label = arm;
    opts.schema = schema.names;
    opts.timestamp = timestamp;
    const auto& rows = it->second;
    std::size_t positives = 0;
    for (const auto& e : rows) positives += e.outcome ? 1 : 0;
    if (rows.empty() || (positives != 0 && positives != rows.size())) return train(rows, lambda, opts);
    // One outcome only: a constant model at the add-half smoothed rate.
    std::vector<FeatureVector> xs;
    for (const auto& e : rows) xs.push_back(e.x);
    LogisticModel m;
    m.label = arm;
    m.schema = schema.names;
    m.scaler = Standardizer::fit(xs, schema.size());
    m.weights.assign(schema.size(), 0.0);
    const double rate = (static_cast<double>(positives) + 0.5) / (static_cast<double>(rows.size()) + 1.0);
    m.intercept = std::log(rate / (1.0 - rate));
    m.meta.samples = rows.size();
    m.meta.timestamp = timestamp;
    m.meta.lambda = lambda;
    m.meta.converged = true;
    return m;
  };
  ModelSet set;
  set.baseline = fit("none");
  for (auto k : kAllKinds) set.by_kind[k] = fit(arm_name(k));
  return set;
}

ArmExamples load_training_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open training data " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("training data has no header");
  auto header = split(trim(line), ',');
  for (auto& h : header) h = trim(h);
  auto expected = schema.names;
  expected.push_back("arm");
  expected.push_back("outcome");
  if (header != expected) throw ValidationError("training data header does not match schema");
  ArmExamples out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != expected.size()) {
      throw ValidationError("training data line " + std::to_string(line_no) + ": wrong field count");
    }
    LabeledExample e;
    for (std::size_t j = 0; j < schema.size(); ++j) e.x.push_back(parse_double(f[j]));
    const auto arm = trim(f[schema.size()]);
    if (arm != "none") kind_from_string(arm);
    const auto outcome = trim(f[schema.size() + 1]);
    if (outcome != "0" && outcome != "1") {
      throw ValidationError("training data line " + std::to_string(line_no) + ": outcome must be 0/1");
    }
    e.outcome = outcome == "1";
    out[arm].push_back(std::move(e));
  }
  return out;
}

nlohmann::ordered_json to_json(const LogisticModel& m) {
  nlohmann::ordered_json j;
  j["label"] = m.label;
  j["schema"] = m.schema;
  j["scaler"] = {{"mean", m.scaler.mean}, {"scale", m.scaler.scale}};
  j["intercept"] = m.intercept;
  j["weights"] = m.weights;
  j["metadata"] = {{"samples", m.meta.samples},
                   {"timestamp", m.meta.timestamp},
                   {"lambda", m.meta.lambda},
                   {"iterations", m.meta.iterations},
                   {"converged", m.meta.converged}};
  return j;
}

LogisticModel logistic_model_from_json(const nlohmann::json& j) {
  LogisticModel m;
  m.label = j.at("label").get<std::string>();
  m.schema = j.at("schema").get<std::vector<std::string>>();
  m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
  m.scaler.scale = j.at("scaler").at("scale").get<std::vector<double>>();
  m.intercept = j.at("intercept").get<double>();
  m.weights = j.at("weights").get<std::vector<double>>();
  const auto& meta = j.at("metadata");
  m.meta.samples = meta.at("samples").get<std::size_t>();
  m.meta.timestamp = meta.at("timestamp").get<std::string>();
  m.meta.lambda = meta.at("lambda").get<double>();
  m.meta.iterations = meta.at("iterations").get<int>();
  m.meta.converged = meta.at("converged").get<bool>();
  if (m.weights.size() != m.schema.size() || m.scaler.mean.size() != m.schema.size() ||
      m.scaler.scale.size() != m.schema.size()) {
    throw ValidationError("model " + m.label + ": weight length differs from schema length");
  }
  return m;
}

nlohmann::ordered_json to_json(const ModelSet& s) {
  nlohmann::ordered_json j;
  j["format"] = "adviser-model-set";
  j["version"] = kModelFormatVersion;
  j["schema"] = s.baseline.schema;
  j["baseline"] = to_json(s.baseline);
  nlohmann::ordered_json kinds = nlohmann::ordered_json::object();
  for (const auto& [k, m] : s.by_kind) kinds[arm_name(k)] = to_json(m);
  j["models"] = kinds;
  return j;
}

ModelSet model_set_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "adviser-model-set") throw ValidationError("not a model-set file");
  if (j.value("version", 0) != kModelFormatVersion) {
    throw ValidationError("unsupported model-set version");
  }
  ModelSet s;
  s.baseline = logistic_model_from_json(j.at("baseline"));
  for (const auto& [name, mj] : j.at("models").items()) {
    s.by_kind[kind_from_string(name)] = logistic_model_from_json(mj);
  }
  return s;
}

void save_model_set(const ModelSet& s, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write model file " + path.string());
  out << to_json(s).dump(2) << "\n";
}

ModelSet load_model_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed model file " + path.string() + ": " + e.what());
  }
  return model_set_from_json(j);
}

}  // namespace adviser
