#include "rmt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "rmt/errors.hpp"
#include "rmt/sampler.hpp"

namespace rmt::harness {

namespace {

using ensembles::EnsembleSpec;
using ensembles::Kind;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs body(i) for i in [0, count) on up to `threads` workers with static
// contiguous chunks. The first exception (by chunk) is rethrown.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = count * w / workers;
    const std::size_t hi = count * (w + 1) / workers;
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

bool even_density(const Model& m) {
  return m.kind == ModelKind::GaussianWigner ||
         (m.kind == ModelKind::Composite && m.spec.kind == Kind::WignerWishartProduct);
}

std::vector<double> draw(const Model& m, sampler::RngStream& rng) {
  switch (m.kind) {
    case ModelKind::Composite:
      return sampler::realize_eigenvalues(m.spec, rng);
    case ModelKind::Wishart:
      return sampler::hermitian_eigenvalues(sampler::sample_wishart(m.spec.n, m.spec.n_B, {}, rng));
    case ModelKind::GaussianWigner:
      return sampler::hermitian_eigenvalues(sampler::sample_gue(m.spec.n, rng));
    case ModelKind::CorrelatedWishart:
      return sampler::hermitian_eigenvalues(sampler::sample_wishart(m.spec.n, m.spec.n_B, m.spec.sigma, rng));
  }
  throw DomainError("run_monte_carlo: unknown model");
}

// Cumulative integral of the piecewise-linear interpolant at the grid points.
std::vector<double> cumulative(const DensityCurve& c) {
  std::vector<double> F(c.grid.size(), 0.0);
  for (std::size_t k = 1; k < c.grid.size(); ++k) {
    F[k] = F[k - 1] + 0.5 * (c.grid[k] - c.grid[k - 1]) * (c.values[k] + c.values[k - 1]);
  }
  return F;
}

double cumulative_at(const DensityCurve& c, const std::vector<double>& F, double x) {
  if (x <= c.grid.front()) return 0.0;
  if (x >= c.grid.back()) return F.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(c.grid.begin(), c.grid.end(), x) - c.grid.begin()) - 1;
  const double h = c.grid[k + 1] - c.grid[k];
  const double t = h > 0.0 ? (x - c.grid[k]) / h : 0.0;
  const double vx = c.values[k] + t * (c.values[k + 1] - c.values[k]);
  return F[k] + 0.5 * (x - c.grid[k]) * (c.values[k] + vx);
}

void check_edges(const std::vector<double>& edges) {
  if (edges.size() < 2) throw DomainError("histogram needs at least two bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw DomainError("bin edges must be strictly ascending");
  }
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw DomainError("grid points must be finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("grid must be strictly ascending");
  }
}

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Composite:
      return "composite";
    case ModelKind::Wishart:
      return "wishart";
    case ModelKind::GaussianWigner:
      return "gue";
    case ModelKind::CorrelatedWishart:
      return "correlated-wishart";
  }
  return "unknown";
}

Model Model::composite(EnsembleSpec spec) { return Model{ModelKind::Composite, std::move(spec)}; }

Model Model::wishart(int n, int dof) {
  Model m{ModelKind::Wishart, {}};
  m.spec.n = n;
  m.spec.n_B = dof;
  return m;
}

Model Model::gaussian_wigner(int n) {
  Model m{ModelKind::GaussianWigner, {}};
  m.spec.n = n;
  m.spec.n_B = n;
  return m;
}

Model Model::correlated_wishart(int n, int dof, std::vector<double> sigma) {
  Model m{ModelKind::CorrelatedWishart, {}};
  m.spec.n = n;
  m.spec.n_B = dof;
  m.spec.sigma = std::move(sigma);
  return m;
}

std::string Model::label() const {
  std::ostringstream os;
  const auto& s = spec;
  switch (kind) {
    case ModelKind::Composite:
      os << ensembles::to_string(s.kind) << "(n=" << s.n;
      if (s.uses_n_A()) os << ",nA=" << s.n_A;
      os << ",nB=" << s.n_B;
      if (s.uses_weights()) os << ",a=" << format_number(s.a) << ",b=" << format_number(s.b);
      break;
    case ModelKind::Wishart:
      os << "wishart(n=" << s.n << ",dof=" << s.n_B;
      break;
    case ModelKind::GaussianWigner:
      os << "gue(n=" << s.n;
      break;
    case ModelKind::CorrelatedWishart:
      os << "correlated-wishart(n=" << s.n << ",dof=" << s.n_B;
      break;
  }
  if (!s.sigma.empty() && (kind == ModelKind::CorrelatedWishart ||
                           (kind == ModelKind::Composite && s.kind == Kind::TwoWishartSum))) {
    os << ",sigma=";
    for (std::size_t i = 0; i < s.sigma.size(); ++i) os << (i ? ";" : "") << format_number(s.sigma[i]);
  }
  os << ")";
  return os.str();
}

void Model::validate() const {
  switch (kind) {
    case ModelKind::Composite:
      spec.validate();
      return;
    case ModelKind::Wishart:
      if (spec.n < 1 || spec.n_B < spec.n) throw DomainError("wishart reference: need n >= 1 and dof >= n");
      return;
    case ModelKind::GaussianWigner:
      if (spec.n < 1) throw DomainError("gue reference: n must be >= 1");
      return;
    case ModelKind::CorrelatedWishart:
      if (spec.n < 1 || spec.n_B < spec.n) throw DomainError("correlated-wishart reference: need n >= 1 and dof >= n");
      ensembles::check_sigma(spec.sigma, spec.n);
      return;
  }
}

biortho::Support Model::support() const {
  switch (kind) {
    case ModelKind::Composite:
      return ensembles::support_of(spec.kind);
    case ModelKind::GaussianWigner:
      return {-kInf, kInf};
    case ModelKind::Wishart:
    case ModelKind::CorrelatedWishart:
      return {0.0, kInf};
  }
  return {-kInf, kInf};
}

DensityModel::DensityModel(Model model, const ensembles::SystemOptions& options) : model_(std::move(model)) {
  model_.validate();
  if (model_.kind == ModelKind::Composite) system_ = ensembles::make_system(model_.spec, options);
}

std::vector<double> DensityModel::singular_points() const {
  return system_ ? system_->singular_points() : std::vector<double>{};
}

double DensityModel::density(double x) const {
  const auto& s = model_.spec;
  if (!model_.support().contains(x) || !std::isfinite(x)) {
    throw SupportError("density: point " + format_number(x) + " outside the support of " + model_.label());
  }
  switch (model_.kind) {
    case ModelKind::Composite:
      return biortho::marginal_density(*system_, x);
    case ModelKind::Wishart:
      return ensembles::wishart_marginal(s.n, s.n_B - s.n, x);
    case ModelKind::GaussianWigner:
      return ensembles::gaussian_wigner_marginal(s.n, x);
    case ModelKind::CorrelatedWishart:
      return ensembles::correlated_wishart_marginal(s.n, s.n_B, s.sigma, x);
  }
  return 0.0;
}

std::uint64_t Histogram::in_range() const {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

void Histogram::add(double x) {
  if (x < bin_edges.front()) {
    ++below;
  } else if (x > bin_edges.back()) {
    ++above;
  } else {
    auto k = static_cast<std::size_t>(std::upper_bound(bin_edges.begin(), bin_edges.end(), x) - bin_edges.begin());
    k = std::min(k, counts.size()) - 1;
    ++counts[k];
  }
}

void Histogram::merge(const Histogram& other) {
  if (other.bin_edges != bin_edges) throw DomainError("Histogram::merge: bin edges differ");
  for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
  trials += other.trials;
  below += other.below;
  above += other.above;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

DensityCurve analytic_curve(const DensityModel& model, const std::vector<double>& grid, int threads) {
  check_grid(grid);
  DensityCurve out;
  out.grid = grid;
  out.values.assign(grid.size(), 0.0);
  out.label = model.model().label();
  parallel_for(grid.size(), threads, [&](std::size_t i) { out.values[i] = model.density(grid[i]); });
  for (std::size_t k = 1; k < grid.size(); ++k) {
    out.coverage += 0.5 * (grid[k] - grid[k - 1]) * (out.values[k] + out.values[k - 1]);
  }
  return out;
}

DensityCurve analytic_curve(const Model& model, const std::vector<double>& grid, int threads) {
  return analytic_curve(DensityModel(model), grid, threads);
}

CorrelationSurface correlation_surface(const biortho::BiorthoSystem& sys, const std::vector<double>& grid_x,
                                       const std::vector<double>& grid_y, int threads) {
  check_grid(grid_x);
  check_grid(grid_y);
  if (sys.n() < 2) throw DomainError("correlation_surface: needs n >= 2");
  CorrelationSurface out;
  out.grid_x = grid_x;
  out.grid_y = grid_y;
  out.values.assign(grid_x.size() * grid_y.size(), 0.0);
  parallel_for(grid_x.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < grid_y.size(); ++j) {
      const double pts[] = {grid_x[i], grid_y[j]};
      out.values[i * grid_y.size() + j] = biortho::correlation_r(sys, pts);
    }
  });
  return out;
}

Histogram run_monte_carlo(const Model& model, std::uint64_t trials, std::uint64_t seed,
                          const std::vector<double>& bin_edges, int threads) {
  if (trials < 1) throw DomainError("run_monte_carlo: trials must be >= 1");
  check_edges(bin_edges);
  if (model.kind == ModelKind::Composite) {
    model.spec.validate_for_sampling();
  } else {
    model.validate();
  }
  Histogram proto;
  proto.bin_edges = bin_edges;
  proto.counts.assign(bin_edges.size() - 1, 0);
  proto.eigenvalues_per_trial = model.eigenvalue_count();

  const std::size_t workers = std::min<std::uint64_t>(static_cast<std::uint64_t>(resolve_threads(threads)), trials);
  std::vector<Histogram> partial(workers, proto);
  parallel_for(workers, static_cast<int>(workers), [&](std::size_t w) {
    const std::uint64_t lo = trials * w / workers;
    const std::uint64_t hi = trials * (w + 1) / workers;
    Histogram& h = partial[w];
    for (std::uint64_t t = lo; t < hi; ++t) {
      sampler::RngStream rng(seed, t);
      for (double x : draw(model, rng)) h.add(x);
      ++h.trials;
    }
  });
  Histogram out = proto;
  for (const auto& h : partial) out.merge(h);
  return out;
}

Histogram sample_from_curve(const DensityCurve& curve, std::uint64_t draws, std::uint64_t seed,
                            const std::vector<double>& bin_edges) {
  check_edges(bin_edges);
  if (curve.grid.size() < 2) throw DomainError("sample_from_curve: curve needs at least two points");
  DensityCurve c = curve;
  for (double& v : c.values) v = std::max(v, 0.0);
  const auto F = cumulative(c);
  if (!(F.back() > 0.0)) throw DomainError("sample_from_curve: curve has no mass");

  Histogram out;
  out.bin_edges = bin_edges;
  out.counts.assign(bin_edges.size() - 1, 0);
  out.eigenvalues_per_trial = 1;
  sampler::RngStream rng(seed, 0);
  for (std::uint64_t d = 0; d < draws; ++d) {
    const double r = rng.uniform() * F.back();
    auto k = static_cast<std::size_t>(std::upper_bound(F.begin(), F.end(), r) - F.begin());
    k = std::clamp<std::size_t>(k, 1, F.size() - 1) - 1;
    const double h = c.grid[k + 1] - c.grid[k];
    const double v0 = c.values[k];
    const double slope = (c.values[k + 1] - v0) / h;
    const double rem = r - F[k];
    // v0 t + slope t^2 / 2 = rem
    const double disc = std::max(v0 * v0 + 2.0 * slope * rem, 0.0);
    const double denom = v0 + std::sqrt(disc);
    const double t = denom > 0.0 ? std::clamp(2.0 * rem / denom, 0.0, h) : 0.5 * h;
    out.add(c.grid[k] + t);
    ++out.trials;
  }
  return out;
}

Metrics compare(const DensityCurve& curve, const Histogram& hist) {
  check_edges(hist.bin_edges);
  if (curve.grid.size() != curve.values.size() || curve.grid.empty()) {
    throw DomainError("compare: malformed curve");
  }
  const double lo = hist.bin_edges.front();
  const double hi = hist.bin_edges.back();
  const double slack = 1e-12 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
  if (curve.grid.size() < 2 || curve.grid.front() > lo + slack || curve.grid.back() < hi - slack) {
    throw CoverageError("compare: curve grid [" + format_number(curve.grid.front()) + ", " +
                        format_number(curve.grid.back()) + "] does not cover the bins [" + format_number(lo) +
                        ", " + format_number(hi) + "]");
  }
  const double total = static_cast<double>(hist.trials) * hist.eigenvalues_per_trial;
  if (!(total > 0.0)) throw DomainError("compare: empty histogram");

  const auto F = cumulative(curve);
  Metrics m;
  m.per_bin.resize(hist.counts.size());
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    const double a = hist.bin_edges[k];
    const double b = hist.bin_edges[k + 1];
    const double width = b - a;
    const double expected = (cumulative_at(curve, F, b) - cumulative_at(curve, F, a)) / width;
    const double observed = static_cast<double>(hist.counts[k]) / (total * width);
    const double r = observed - expected;
    m.per_bin[k] = r;
    m.l1 += std::fabs(r) * width;
    m.sup = std::max(m.sup, std::fabs(r));
  }
  return m;
}

std::pair<double, double> default_range(const DensityModel& model, double relative_threshold) {
  const auto support = model.model().support();
  std::vector<double> probes;
  if (support.lo < 0.0) {
    for (int k = 12; k >= -16; --k) probes.push_back(-std::pow(10.0, k / 4.0));
  }
  probes.push_back(0.0);
  for (int k = -16; k <= 12; ++k) probes.push_back(std::pow(10.0, k / 4.0));

  std::vector<double> values(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) values[i] = model.density(probes[i]);
  const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  double peak = values[best];
  if (!(peak > 0.0)) throw NumericalError("default_range: density vanishes on every probe point");
  // dense scan between the neighbours of the best probe
  const double scan_lo = probes[best == 0 ? 0 : best - 1];
  const double scan_hi = probes[std::min(best + 1, probes.size() - 1)];
  for (int k = 1; k < 200; ++k) {
    const double v = model.density(scan_lo + (scan_hi - scan_lo) * k / 200.0);
    if (std::isfinite(v)) peak = std::max(peak, v);
  }
  const double threshold = relative_threshold * peak;

  auto boundary = [&](double outside, double inside) {
    for (int it = 0; it < 30; ++it) {
      const double mid = 0.5 * (outside + inside);
      if (model.density(mid) >= threshold) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    return inside;
  };
  std::size_t first = 0;
  while (values[first] < threshold) ++first;
  std::size_t last = values.size() - 1;
  while (values[last] < threshold) --last;
  double lo = first == 0 ? probes.front() : boundary(probes[first - 1], probes[first]);
  double hi = last + 1 == probes.size() ? probes.back() : boundary(probes[last + 1], probes[last]);
  if (even_density(model.model())) {
    const double r = std::max(std::fabs(lo), std::fabs(hi));
    lo = -r;
    hi = r;
  }
  return {lo, hi};
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 1) throw DomainError("linspace: need at least one point");
  if (points == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[i] = lo + (hi - lo) * i / (points - 1);
  out.back() = hi;
  return out;
}

std::vector<double> default_grid(const DensityModel& model, int points) {
  const auto [lo, hi] = default_range(model);
  return linspace(lo, hi, points);
}

std::vector<double> default_bins(const DensityModel& model, int bins) {
  if (bins < 1) throw DomainError("default_bins: need at least one bin");
  const auto [lo, hi] = default_range(model);
  if (even_density(model.model()) && bins % 2 == 1) ++bins;
  return linspace(lo, hi, bins + 1);
}

std::vector<double> refine_edges(const std::vector<double>& edges, int refine,
                                 const std::vector<double>& singular_points) {
  check_edges(edges);
  if (refine < 1) throw DomainError("refine_edges: refine must be >= 1");
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    for (int i = 0; i < refine; ++i) out.push_back(edges[k] + (edges[k + 1] - edges[k]) * i / refine);
  }
  out.push_back(edges.back());
  const double lo = edges.front();
  const double hi = edges.back();
  for (double s : singular_points) {
    if (!(s >= lo && s <= hi)) continue;
    const auto it = std::upper_bound(edges.begin(), edges.end(), s);
    const std::size_t bin = std::min<std::size_t>(static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - edges.begin() - 1, 0)),
                                                  edges.size() - 2);
    const double width = edges[bin + 1] - edges[bin];
    out.push_back(s);
    for (int k = 0; k <= 200; ++k) {
      const double d = 4.0 * width * std::exp2(-0.25 * k);
      if (s - d > lo) out.push_back(s - d);
      if (s + d < hi) out.push_back(s + d);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double total_mass(const biortho::BiorthoSystem& sys, double relative_tolerance) {
  auto f = [&sys](double x) { return LogScaled::from_double(biortho::marginal_density(sys, x)); };
  return specfun::integrate(f, sys.support().quadrature(relative_tolerance)).to_double();
}

double integrate_r2_slice(const biortho::BiorthoSystem& sys, double x1, double relative_tolerance) {
  auto f = [&sys, x1](double y) {
    const double pts[] = {x1, y};
    return LogScaled::from_double(biortho::correlation_r(sys, pts));
  };
  return specfun::integrate(f, sys.support().quadrature(relative_tolerance)).to_double();
}

}  // namespace rmt::harness
