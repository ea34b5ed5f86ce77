#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adviser/common.hpp"
#include "json.hpp"

namespace adviser {

struct FeatureSchema {
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> index(std::string_view name) const;

  // household_income (USD/month), mother_age (years), children_count,
  // prior_completion_ratio (0..1), distance_to_center_minutes.
  static FeatureSchema default_schema();
};

// Per-feature affine map to zero mean and unit variance. Constant features
// keep scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(std::span<const FeatureVector> rows, std::size_t dims);
  FeatureVector apply(const FeatureVector& x) const;
};

struct TrainingMetadata {
  std::size_t samples = 0;
  std::string timestamp;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // one entry per accepted iterate
};

// Logistic model on standardized features: p = sigmoid(b + w . z(x)).
struct LogisticModel {
  std::string label;
  std::vector<std::string> schema;
  Standardizer scaler;
  std::vector<double> weights;
  double intercept = 0.0;
  TrainingMetadata meta;

  // Coefficients on the raw feature scale.
  std::vector<double> raw_weights() const;
  double raw_intercept() const;
};

struct LabeledExample {
  FeatureVector x;
  bool outcome = false;
};

struct TrainOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
  std::string label;
  std::vector<std::string> schema;  // defaults to x0..xN
  std::string timestamp = "1970-01-01T00:00:00Z";
};

// Mean negative log-likelihood plus (lambda/2)||w||^2 (intercept not
// penalized), over a design matrix whose first column is all ones.
class LogisticObjective {
 public:
  LogisticObjective(Eigen::MatrixXd design, Eigen::VectorXd outcomes, double lambda);

  double value(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const;

  Eigen::Index dims() const { return design_.cols(); }

 private:
  Eigen::MatrixXd design_;
  Eigen::VectorXd y_;
  double lambda_;
};

// L2-penalized maximum likelihood by iteratively reweighted least squares
// with step halving. Requires at least one positive and one negative
// example; unregularized fits of separable data raise NonConvergenceError.
LogisticModel train(std::span<const LabeledExample> examples, double lambda,
                    const TrainOptions& opts = {});

double sigmoid(double z);
double predict(const LogisticModel& m, const FeatureVector& x);

struct ModelSet {
  LogisticModel baseline;  // no intervention
  std::map<InterventionKind, LogisticModel> by_kind;

  const LogisticModel& at(InterventionKind k) const;
};

// predict(model_k, x) - predict(baseline, x).
double need_score(const ModelSet& models, const FeatureVector& x, InterventionKind k);

// Slopes are per standard deviation of the feature over the reference
// population.
struct SurveyAdjustment {
  std::string feature;
  double slope = 0.0;
};

struct KindPrior {
  double rate = 0.5;
  std::vector<SurveyAdjustment> adjustments;
};

struct SurveyPrior {
  KindPrior baseline;
  std::map<InterventionKind, KindPrior> kinds;

  // Post-deployment survey agreement rates with signed cross-tab effects.
  static SurveyPrior deployment_default();
};

// Intercepts are calibrated so the mean prediction over `reference` equals
// each aggregate rate.
ModelSet cold_start_from_survey(const SurveyPrior& prior, const FeatureSchema& schema,
                                std::span<const FeatureVector> reference);

using ArmExamples = std::map<std::string, std::vector<LabeledExample>>;  // "none" or kind name

// An arm whose examples all share one outcome gets a constant model at the
// smoothed rate (k + 0.5) / (n + 1) instead of a diverging fit.

ModelSet train_model_set(const ArmExamples& data, double lambda,
                         const FeatureSchema& schema, const std::string& timestamp);

// Training CSV: declared feature columns, then `arm` and `outcome` (0/1).
ArmExamples load_training_csv(const std::filesystem::path& path, const FeatureSchema& schema);

nlohmann::ordered_json to_json(const LogisticModel& m);
LogisticModel logistic_model_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ModelSet& s);
ModelSet model_set_from_json(const nlohmann::json& j);
void save_model_set(const ModelSet& s, const std::filesystem::path& path);
ModelSet load_model_set(const std::filesystem::path& path);

}  // namespace adviser
