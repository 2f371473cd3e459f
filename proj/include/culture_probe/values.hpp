#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "culture_probe/error.hpp"
#include "culture_probe/psychnorms.hpp"

namespace cprobe::values {

/// Normalized probability vector over a question's ordered options.
class AnswerDistribution {
 public:
  AnswerDistribution() = default;

  /// Validates non-negativity and Σp = 1 ± 1e-9.
  static AnswerDistribution fromProbabilities(Eigen::VectorXd probs);
  /// Divides each count by the total; throws on negative or all-zero counts.
  static AnswerDistribution fromCounts(const Eigen::VectorXd& counts);

  const Eigen::VectorXd& probs() const { return probs_; }
  Eigen::Index size() const { return probs_.size(); }
  double operator[](Eigen::Index i) const { return probs_(i); }

 private:
  explicit AnswerDistribution(Eigen::VectorXd p) : probs_(std::move(p)) {}
  Eigen::VectorXd probs_;
};

inline void requireSameLength(Eigen::Index a, Eigen::Index b) {
  if (a != b) throw ValidationError("distributions differ in length");
}

/// Jensen-Shannon distance with base-2 logarithms: sqrt of the divergence,
/// bounded by 1. Terms with zero mass contribute 0.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar jsDistance(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  requireSameLength(p.size(), q.size());
  Scalar divergence(0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const Scalar m = (p(i) + q(i)) / Scalar(2);
    const Scalar fromP = p(i) > Scalar(0) ? p(i) * std::log2(p(i) / m) : Scalar(0);
    const Scalar fromQ = q(i) > Scalar(0) ? q(i) * std::log2(q(i) / m) : Scalar(0);
    // One addition per option keeps jsDistance(p, q) == jsDistance(q, p) bitwise.
    divergence += fromP + fromQ;
  }
  divergence /= Scalar(2);
  return std::clamp(std::sqrt(std::max(divergence, Scalar(0))), Scalar(0), Scalar(1));
}

/// 1-D earth mover's distance with options at positions 0..n-1, divided by
/// n-1 so the largest possible transport costs 1.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar emdNormalized(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  requireSameLength(p.size(), q.size());
  const Eigen::Index n = p.size();
  if (n < 2) throw ValidationError("earth mover's distance needs at least 2 options");
  Scalar cdfGap(0), total(0);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    cdfGap += p(k) - q(k);
    total += std::abs(cdfGap);
  }
  return std::clamp(total / Scalar(n - 1), Scalar(0), Scalar(1));
}

inline double jsDistance(const AnswerDistribution& p, const AnswerDistribution& q) {
  return jsDistance(p.probs(), q.probs());
}
inline double emdNormalized(const AnswerDistribution& p, const AnswerDistribution& q) {
  return emdNormalized(p.probs(), q.probs());
}

struct DivergenceScore {
  double js = 0.0;
  double emd = 0.0;
  double combo = 0.0;
};

/// combo = ½·JS + ½·EMD*.
DivergenceScore comboDivergence(const AnswerDistribution& p, const AnswerDistribution& q);

enum class DistanceMetric { Combo, Js, Emd };
DistanceMetric parseMetric(const std::string& name);
std::string_view metricName(DistanceMetric m);
double distance(const DivergenceScore& s, DistanceMetric m);

/// Softmax of per-option log-scores with max subtraction. -inf marks an
/// option with zero probability; all -inf, NaN or +inf throws.
AnswerDistribution renormalizeLogScores(const std::vector<double>& logScores);

struct SurveyQuestion {
  std::string id;
  std::string text;
  std::string topic;
  /// Option symbols in ordinal order ("1", "2", ...).
  std::vector<std::string> options;
  std::vector<std::string> labels;
  std::map<std::string, AnswerDistribution> populations;

  const AnswerDistribution& population(const std::string& name) const;
};

struct SurveyLoadOptions {
  /// Drop options listed in a question's "nonOrdinal" array (don't know,
  /// refused) before normalizing.
  bool dropNonOrdinal = true;
};

/// JSON: [{id, text, topic?, options[], labels?, nonOrdinal?,
///         populations: {NAME: counts[] | {counts: []} | {probs: []}}}]
std::vector<SurveyQuestion> loadSurvey(const std::filesystem::path& path, const SurveyLoadOptions& options = {});
std::vector<SurveyQuestion> parseSurvey(const std::string& json, const SurveyLoadOptions& options = {});

struct CurvePoint {
  double threshold = 0.0;
  double fraction = 0.0;
};

/// Fraction of questions whose distance is <= each threshold. The grid must
/// be sorted ascending.
std::vector<CurvePoint> thresholdCurve(const std::map<std::string, double>& distances,
                                       const std::vector<double>& grid);

struct TensionEntry {
  std::string questionId;
  DivergenceScore score;
};

struct TensionSet {
  std::vector<TensionEntry> entries;
  std::vector<std::string> warnings;
};

/// Questions ranked by combo(popA, popB) descending, ties by id ascending;
/// the first n are kept.
TensionSet selectTensionSet(const std::vector<SurveyQuestion>& questions, const std::string& popA,
                            const std::string& popB, std::size_t n = 50);

std::string tensionSetToJson(const TensionSet& set, const std::string& popA, const std::string& popB);
std::vector<std::string> tensionSetIdsFromJson(const std::string& json);

enum class Leaning { Reference, Target, Tie };
std::string_view leaningName(Leaning l);

/// A model's distances to a reference population (US in the default setup)
/// and to the target population for one question.
struct ShiftPoint {
  std::string questionId;
  double dReference = 0.0;
  double dTarget = 0.0;
  Leaning leaning = Leaning::Tie;
};

struct ShiftResult {
  std::vector<ShiftPoint> points;
  std::size_t referenceCount = 0;
  std::size_t targetCount = 0;
  std::size_t tieCount = 0;
  std::vector<std::string> missing;
};

/// Leaning is Target iff dTarget < dReference, Tie within 1e-12.
ShiftResult shiftAnalysis(const std::map<std::string, AnswerDistribution>& modelDists,
                          const std::vector<SurveyQuestion>& questions, const std::string& referencePop,
                          const std::string& targetPop, DistanceMetric metric = DistanceMetric::Combo);

struct ImprovementResult {
  psychnorms::WilcoxonResult twoSided;
  /// H1: treated distances are smaller than baseline distances.
  double oneSidedP = 1.0;
  std::size_t questions = 0;
};

/// Paired signed-rank test over per-question distances; keys must match.
ImprovementResult pairedImprovement(const std::map<std::string, double>& baselineDistances,
                                    const std::map<std::string, double>& treatedDistances);

}  // namespace cprobe::values
