#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aoiopt/aoi.hpp"
#include "aoiopt/channel.hpp"
#include "aoiopt/scenario.hpp"
#include "aoiopt/tape.hpp"

namespace aoiopt {

/// Which rate-constraint residual enters the penalty.
enum class C1Form {
  kRateFloor,   // ReLU(p * R_min - R): rate must cover the probability-scaled floor
  kScaledRate,  // ReLU(R_min - p * R)
};

std::string to_string(C1Form form);
/// Accepts "constraint-6b" and "lagrangian-paper"; throws ConfigError otherwise.
C1Form parse_c1_form(std::string_view name);

/// Constraint families, in penalty order.
enum Family : std::size_t {
  kRate = 0,         // [I][U][T]
  kAssociation = 1,  // [I][T]   sum_u p <= 1
  kCapacity = 2,     // [U][T]   sum_i p <= N_u
  kFlight = 3,       // [U]      flight time <= budget
  kXBound = 4,       // [U][T]   x <= x_max
  kYBound = 5,       // [U][T]   y <= y_max
  kProbBound = 6,    // [I][U][T] p <= 1
};
inline constexpr std::size_t kNumFamilies = 7;

/// Flat length of each family's residual/multiplier array for `sc`.
std::array<std::size_t, kNumFamilies> family_sizes(const Scenario& sc);

struct Decision {
  UavPath path;
  SelectionProbs probs;

  /// Throws ArgumentError when shapes disagree with `sc`.
  void check_shape(const Scenario& sc) const;
  bool operator==(const Decision&) const = default;
};

/// Nonnegative Lagrange multipliers, one flat array per family (row-major in the
/// index order given by Family).
struct Multipliers {
  std::array<std::vector<double>, kNumFamilies> mu;

  static Multipliers filled(const Scenario& sc, double value);
  bool nonnegative() const;
  double norm(std::size_t family) const;
  void check_shape(const Scenario& sc) const;
  bool operator==(const Multipliers&) const = default;
};

struct ConstraintResiduals {
  std::array<std::vector<double>, kNumFamilies> c;

  double max() const;
};

ConstraintResiduals residuals(const Scenario& sc, const FadingDraw& draw, const Decision& d,
                              C1Form form = C1Form::kRateFloor);

/// Total expected AoI plus the multiplier-weighted residuals of all seven families.
double lagrangian_value(const Scenario& sc, const FadingDraw& draw, const Decision& d,
                        const Multipliers& mu, C1Form form = C1Form::kRateFloor);

/// Per-family max and mean residual over a set of evaluations.
struct ResidualSummary {
  std::array<double, kNumFamilies> max{};
  std::array<double, kNumFamilies> mean{};

  double worst() const;
};

class ResidualAccumulator {
 public:
  void add(const ConstraintResiduals& r);
  ResidualSummary summary() const;

 private:
  std::array<double, kNumFamilies> max_{};
  std::array<double, kNumFamilies> sum_{};
  std::array<std::size_t, kNumFamilies> count_{};
};

/// Differentiable Lagrangian over a batch of draws.
///
/// Positions arrive as rows x (U*T) matrices in (u, t) order and probabilities as
/// rows x (I*U*T) in (i, u, t) order, one row per draw. Index maps depend only on the
/// scenario and are built once.
class LagrangianGraph {
 public:
  LagrangianGraph(const Scenario& sc, C1Form form);

  struct Nodes {
    Var loss;  // 1x1 batch mean of the per-row Lagrangian
    Var aoi;   // rows x 1 total expected AoI
    Var lagrangian;  // rows x 1
    std::array<Var, kNumFamilies> residuals;  // rows x family size
  };

  Nodes build(Tape& tape, std::span<const FadingDraw* const> draws, Var xs, Var ys, Var p,
              const Multipliers& mu) const;

  const Scenario& scenario() const { return sc_; }
  C1Form form() const { return form_; }

 private:
  Scenario sc_;
  C1Form form_;
  std::vector<Index> ut_of_iut_;
  std::vector<Index> assoc_group_;
  std::vector<Index> capacity_group_;
  std::vector<Index> seg_next_, seg_cur_, seg_group_;
  std::vector<std::vector<Index>> cols_at_t_;
  Mat dev_x_, dev_y_, alt_sq_, bandwidth_;
};

}  // namespace aoiopt
