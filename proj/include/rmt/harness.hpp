#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rmt/biortho.hpp"
#include "rmt/ensembles.hpp"

namespace rmt::harness {

/// A composite model or one of the reference ensembles drawn next to it.
enum class ModelKind { Composite, Wishart, GaussianWigner, CorrelatedWishart };

std::string_view to_string(ModelKind kind);

/// For references only spec.n, spec.n_B (degrees of freedom) and spec.sigma
/// are read.
struct Model {
  ModelKind kind = ModelKind::Composite;
  ensembles::EnsembleSpec spec;

  static Model composite(ensembles::EnsembleSpec spec);
  static Model wishart(int n, int dof);
  static Model gaussian_wigner(int n);
  static Model correlated_wishart(int n, int dof, std::vector<double> sigma);

  std::string label() const;
  void validate() const;
  biortho::Support support() const;
  int eigenvalue_count() const { return spec.n; }
};

/// Analytic marginal of a model; composite systems are built once.
class DensityModel {
 public:
  explicit DensityModel(Model model, const ensembles::SystemOptions& options = {});

  const Model& model() const { return model_; }
  double density(double x) const;
  /// Null for reference models.
  const biortho::BiorthoSystem* system() const { return system_ ? &*system_ : nullptr; }
  /// Points where the density may diverge (empty for reference models).
  std::vector<double> singular_points() const;

 private:
  Model model_;
  std::optional<biortho::BiorthoSystem> system_;
};

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> values;
  std::string label;
  /// Trapezoid integral of the values over the grid.
  double coverage = 0.0;
};

struct CorrelationSurface {
  std::vector<double> grid_x;
  std::vector<double> grid_y;
  std::vector<double> values;  // row-major, values[i * grid_y.size() + j] = R_2(x_i, y_j)

  double at(std::size_t i, std::size_t j) const { return values[i * grid_y.size() + j]; }
};

struct Histogram {
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t trials = 0;
  int eigenvalues_per_trial = 0;
  std::uint64_t below = 0;  // samples left of the first edge
  std::uint64_t above = 0;  // samples right of the last edge

  std::uint64_t in_range() const;
  void add(double x);
  /// Adds counts of a histogram with identical edges.
  void merge(const Histogram& other);
};

struct Metrics {
  double l1 = 0.0;
  double sup = 0.0;
  std::vector<double> per_bin;  // normalized histogram minus bin-averaged curve
};

/// Default 0 means std::thread::hardware_concurrency().
int resolve_threads(int requested);

DensityCurve analytic_curve(const DensityModel& model, const std::vector<double>& grid, int threads = 0);
DensityCurve analytic_curve(const Model& model, const std::vector<double>& grid, int threads = 0);

CorrelationSurface correlation_surface(const biortho::BiorthoSystem& sys, const std::vector<double>& grid_x,
                                       const std::vector<double>& grid_y, int threads = 0);

/// Pooled eigenvalue histogram over `trials` draws; trial t uses RngStream(seed, t).
Histogram run_monte_carlo(const Model& model, std::uint64_t trials, std::uint64_t seed,
                          const std::vector<double>& bin_edges, int threads = 0);

/// Histogram of `draws` samples from the piecewise-linear density of `curve`
/// by inverse-CDF sampling.
Histogram sample_from_curve(const DensityCurve& curve, std::uint64_t draws, std::uint64_t seed,
                            const std::vector<double>& bin_edges);

/// Normalized histogram versus the bin averages of the piecewise-linear
/// curve. Throws CoverageError when the curve grid does not span the bins.
Metrics compare(const DensityCurve& curve, const Histogram& hist);

/// Interval where the analytic marginal exceeds `relative_threshold` times its peak.
std::pair<double, double> default_range(const DensityModel& model, double relative_threshold = 1e-6);

std::vector<double> linspace(double lo, double hi, int points);
/// `points` grid points spanning default_range.
std::vector<double> default_grid(const DensityModel& model, int points = 400);
/// Bin edges over default_range; symmetric about 0, with an edge at 0, for
/// models whose density is even (product, GUE).
std::vector<double> default_bins(const DensityModel& model, int bins);
/// Grid covering every bin with `refine` equal sub-intervals, for compare().
/// Inside the edge range, each singular point gets extra nodes at distance
/// 4 w 2^(-k/4) (k = 0..200, w the width of its bin) on both sides.
std::vector<double> refine_edges(const std::vector<double>& edges, int refine = 8,
                                 const std::vector<double>& singular_points = {});

/// int p(x) dx over the support by adaptive quadrature.
double total_mass(const biortho::BiorthoSystem& sys, double relative_tolerance = 1e-9);
/// int R_2(x1, y) dy over the support.
double integrate_r2_slice(const biortho::BiorthoSystem& sys, double x1, double relative_tolerance = 1e-9);

inline constexpr double kDefaultL1Threshold = 0.02;

}  // namespace rmt::harness
