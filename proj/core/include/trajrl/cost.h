#ifndef TRAJRL_COST_H_
#define TRAJRL_COST_H_

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "trajrl/lattice.h"
#include "trajrl/scene.h"

namespace trajrl::cost {

enum class Term {
  kSpeedError = 0,
  kAcceleration,
  kJerk,
  kExtraDistance,
  kCurvature,
  kLaneCrossing,
  kCentripetal,
};
inline constexpr int kNumTerms = 7;
inline constexpr std::array<Term, kNumTerms> kAllTerms = {
    Term::kSpeedError,    Term::kAcceleration, Term::kJerk,
    Term::kExtraDistance, Term::kCurvature,    Term::kLaneCrossing,
    Term::kCentripetal};

std::string_view term_name(Term t);

// Curvature is the second difference of lateral offset over the layer
// spacing. kVerbatim uses n_{i-2} as the trailing neighbor instead of n_{i-1}.
enum class CurvatureForm { kSecondDifference, kVerbatim };
// kAsWritten: curvature * v. kPhysical: curvature * v^2.
enum class CentripetalForm { kAsWritten, kPhysical };

struct CostOptions {
  CurvatureForm curvature = CurvatureForm::kSecondDifference;
  CentripetalForm centripetal = CentripetalForm::kAsWritten;
};

struct CostWeights {
  double speed_error = 0.2;
  double acceleration = 0.5;
  double jerk = 0.5;
  double extra_distance = 0.5;
  double curvature = 0.5;
  double lane_crossing = 0.3;
  double centripetal = 0.5;

  void validate() const;
  std::array<double, kNumTerms> as_array() const;
  CostWeights scaled(double factor) const;
};

using LayerTerms = std::array<double, kNumTerms>;

// Per-layer term values; values[t][i - 1] belongs to layer i. Layers that
// need a missing neighbor (jerk and curvature at the last layer, verbatim
// curvature at layer 1) hold 0.
struct TermTable {
  std::array<std::vector<double>, kNumTerms> values;

  const std::vector<double>& operator[](Term t) const {
    return values[static_cast<int>(t)];
  }
  int layers() const { return static_cast<int>(values[0].size()); }
  LayerTerms layer(int index) const;
};

// Term values of layer i (1-based) of start + points. Layers that need a
// missing neighbor contribute 0 for that term.
LayerTerms layer_terms(const LatticePoint& start,
                       std::span<const LatticePoint> points, int i,
                       const Scene& scene, const LatticeConfig& lattice,
                       const CostOptions& options = {});

// Weighted total over all layers without materializing a table.
double weighted_cost(const LatticePoint& start,
                     std::span<const LatticePoint> points, const Scene& scene,
                     const CostWeights& weights, const LatticeConfig& lattice,
                     const CostOptions& options = {});

// Evaluates all seven terms without length checks. Speed error is 0 for
// layers outside the scene window.
TermTable evaluate_terms(const Trajectory& trajectory, const Scene& scene,
                         const LatticeConfig& lattice,
                         const CostOptions& options = {});

// Single term with the minimum-length contract: jerk, curvature and
// centripetal acceleration need the start plus two layers, the rest need one
// layer. Throws DegenerateTrajectory otherwise.
std::vector<double> term(Term kind, const Trajectory& trajectory,
                         const Scene& scene, const LatticeConfig& lattice,
                         const CostOptions& options = {});

struct CostReport {
  LayerTerms totals{};
  double total = 0.0;

  double operator[](Term t) const { return totals[static_cast<int>(t)]; }
};

// Sums layers [first, first + count) of the table and weights them.
CostReport summarize(const TermTable& table, const CostWeights& weights,
                     int first = 0, int count = -1);

CostReport trajectory_cost(const Trajectory& trajectory, const Scene& scene,
                           const CostWeights& weights,
                           const LatticeConfig& lattice,
                           const CostOptions& options = {});

inline constexpr double kStepReward = 1.0;
inline constexpr double kSuccessReward = 10.0;
inline constexpr double kFailureReward = -20.0;

enum class Outcome { kRunning, kSuccess, kFailure };

double weighted_total(const CostReport& report, const CostWeights& weights);
double step_reward(Outcome outcome, const CostReport& report,
                   const CostWeights& weights);

}  // namespace trajrl::cost

#endif  // TRAJRL_COST_H_
