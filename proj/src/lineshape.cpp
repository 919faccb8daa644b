#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>

#include "rydoa/constants.hpp"
#include "rydoa/error.hpp"
#include "rydoa/spectroscopy.hpp"

namespace rydoa::spectroscopy {

namespace c = rydoa::constants;

std::vector<double> linear_grid(double start, double stop, std::size_t n) {
  if (n < 2) fail(ErrorKind::invalid_input, "grid needs at least two points");
  if (!(stop > start)) fail(ErrorKind::invalid_input, "grid must be strictly increasing");
  std::vector<double> g(n);
  const double step = (stop - start) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = start + step * static_cast<double>(i);
  g.back() = stop;
  return g;
}

std::vector<double> default_grid() { return linear_grid(-60.0 * c::mhz, 60.0 * c::mhz, 2001); }

std::vector<double> refine_around(std::span<const double> grid, std::span<const double> centers, double half_width,
                                  std::size_t points) {
  std::vector<double> out(grid.begin(), grid.end());
  for (double c0 : centers) {
    const auto extra = linear_grid(c0 - half_width, c0 + half_width, points);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  std::sort(out.begin(), out.end());
  const double span = out.back() - out.front();
  out.erase(std::unique(out.begin(), out.end(), [span](double a, double b) { return b - a <= 1e-12 * span; }), out.end());
  return out;
}

namespace {

double response_at(const LadderConfig& cfg, std::span<const TransitionPath> paths, double dc, ResponseModel model) {
  if (model == ResponseModel::analytic) return rho21_sweep_point(cfg, paths, dc).imag();
  LadderConfig local = cfg;
  local.delta_c = dc;
  return steady_state(local, paths).probe_coherence().imag();
}

}  // namespace

std::vector<double> sweep_response(const LadderConfig& cfg, std::span<const TransitionPath> paths,
                                   std::span<const double> grid, ResponseModel model, Exec exec) {
  cfg.validate();
  std::vector<double> out(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  if (exec == Exec::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = response_at(cfg, paths, grid[static_cast<std::size_t>(i)], model);
    return out;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = response_at(cfg, paths, grid[static_cast<std::size_t>(i)], model);
    } catch (...) {
#pragma omp critical(rydoa_sweep_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<Peak> find_peaks(std::span<const double> grid, std::span<const double> y, double min_prominence) {
  if (grid.size() != y.size()) fail(ErrorKind::invalid_input, "find_peaks: grid/response size mismatch");
  std::vector<Peak> peaks;
  const std::size_t n = y.size();
  if (n < 3) return peaks;

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    // Plateau: take its left edge only if it actually descends on the right.
    std::size_t right_edge = i;
    while (right_edge + 1 < n && y[right_edge + 1] == y[i]) ++right_edge;
    if (right_edge + 1 < n && y[right_edge + 1] > y[i]) continue;

    std::size_t lo = i;
    while (lo > 0 && y[lo - 1] < y[lo]) --lo;
    std::size_t hi = right_edge;
    while (hi + 1 < n && y[hi + 1] < y[hi]) ++hi;

    Peak p;
    p.center = grid[i];
    p.height = y[i];
    p.prominence = y[i] - std::max(y[lo], y[hi]);
    if (p.prominence < min_prominence) continue;

    // Area above the straight line joining the bounding minima.
    const double x0 = grid[lo], x1 = grid[hi];
    auto baseline = [&](double x) { return y[lo] + (y[hi] - y[lo]) * (x - x0) / (x1 - x0); };
    double area = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const double a = y[k] - baseline(grid[k]);
      const double b = y[k + 1] - baseline(grid[k + 1]);
      area += 0.5 * (a + b) * (grid[k + 1] - grid[k]);
    }
    p.area = area;

    const double level = p.height - 0.5 * p.prominence;
    double left = grid[lo], right = grid[hi];
    for (std::size_t k = i; k > lo; --k) {
      if (y[k - 1] <= level) {
        left = grid[k - 1] + (level - y[k - 1]) * (grid[k] - grid[k - 1]) / (y[k] - y[k - 1]);
        break;
      }
    }
    for (std::size_t k = right_edge; k < hi; ++k) {
      if (y[k + 1] <= level) {
        right = grid[k] + (y[k] - level) * (grid[k + 1] - grid[k]) / (y[k] - y[k + 1]);
        break;
      }
    }
    p.fwhm = right - left;
    peaks.push_back(p);
    i = right_edge;
  }
  return peaks;
}

double pole_position(const LadderConfig& cfg, const TransitionPath& path) { return -(path.detuning + cfg.delta_p); }

// ---------------------------------------------------------------------------
// Path-strength fit: projected Levenberg-Marquardt with Marquardt diagonal
// scaling, so the absolute scale of rabi^2 does not matter.

namespace {

struct FitModel {
  const LadderConfig& cfg;
  std::span<const TransitionPath> paths;
  std::span<const double> grid;
  std::span<const double> data;
  Eigen::MatrixXcd poles;  // 1 / (detuning_k + delta_p + delta_c + i gamma_rf), grid x paths

  FitModel(const LadderConfig& c, std::span<const TransitionPath> p, std::span<const double> g,
           std::span<const double> d)
      : cfg(c), paths(p), grid(g), data(d),
        poles(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(p.size())) {
    for (Eigen::Index i = 0; i < poles.rows(); ++i)
      for (Eigen::Index k = 0; k < poles.cols(); ++k)
        poles(i, k) = 1.0 / cplx(p[static_cast<std::size_t>(k)].detuning + c.delta_p + g[static_cast<std::size_t>(i)],
                                 c.gamma_rf);
  }

  // Residuals and (optionally) the Jacobian with respect to s.
  double evaluate(std::span<const double> s, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const auto m = static_cast<Eigen::Index>(grid.size());
    const auto p = static_cast<Eigen::Index>(paths.size());
    const Eigen::Map<const Eigen::VectorXd> sv(s.data(), p);
    const Eigen::VectorXcd sigma = poles * sv.cast<cplx>();
    r.resize(m);
    if (jac) jac->resize(m, p);
    const double half_p = 0.5 * cfg.omega_p;
    const double cc = 0.25 * cfg.omega_c * cfg.omega_c;
    for (Eigen::Index i = 0; i < m; ++i) {
      const cplx e = cplx(grid[static_cast<std::size_t>(i)], cfg.gamma31) - sigma(i);
      const cplx d = cplx(cfg.delta_p, cfg.gamma21) - cc / e;
      r(i) = (-half_p / d).imag() - data[static_cast<std::size_t>(i)];
      if (jac) {
        const cplx front = -half_p * cc / (d * d * e * e);
        for (Eigen::Index k = 0; k < p; ++k) (*jac)(i, k) = (front * poles(i, k)).imag();
      }
    }
    return r.squaredNorm();
  }
};

struct LmResult {
  std::vector<double> s;
  double cost = 0.0;
  int iterations = 0;
};

LmResult levenberg_marquardt(const FitModel& model, std::vector<double> s) {
  const auto p = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  double cost = model.evaluate(s, r, &jac);
  double lambda = 1e-3;
  int it = 0;
  std::vector<double> trial(s.size());
  Eigen::VectorXd r_trial;
  for (; it < 300; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    Eigen::VectorXd diag = jtj.diagonal();
    for (Eigen::Index k = 0; k < p; ++k) diag(k) = std::max(diag(k), 1e-300);

    // Strengths pinned at zero with the gradient pushing outward stay put;
    // leaving them in the system would distort the step of the free ones.
    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < p; ++k)
      if (s[static_cast<std::size_t>(k)] > 0.0 || g(k) < 0.0) free.push_back(k);
    if (free.empty()) break;
    const auto nf = static_cast<Eigen::Index>(free.size());

    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd a(nf, nf);
      Eigen::VectorXd gf(nf);
      for (Eigen::Index i = 0; i < nf; ++i) {
        gf(i) = g(free[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < nf; ++j) a(i, j) = jtj(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
        a(i, i) += lambda * diag(free[static_cast<std::size_t>(i)]);
      }
      const Eigen::VectorXd step_free = a.ldlt().solve(-gf);
      Eigen::VectorXd step = Eigen::VectorXd::Zero(p);
      for (Eigen::Index i = 0; i < nf; ++i) step(free[static_cast<std::size_t>(i)]) = step_free(i);
      for (Eigen::Index k = 0; k < p; ++k) trial[static_cast<std::size_t>(k)] = std::max(0.0, s[static_cast<std::size_t>(k)] + step(k));
      const double c_trial = model.evaluate(trial, r_trial, nullptr);
      if (std::isfinite(c_trial) && c_trial < cost) {
        const double rel = (cost - c_trial) / std::max(cost, 1e-300);
        s = trial;
        cost = c_trial;
        model.evaluate(s, r, &jac);
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (rel < 1e-14) return {s, cost, it + 1};
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return {s, cost, it};
}

// Cyclic one-parameter scans over factors 10^(-2..2), cheap compared with
// the many shallow basins the tails of the RF poles produce.
void coordinate_scan(const FitModel& model, std::vector<double>& s) {
  Eigen::VectorXd r;
  double cost = model.evaluate(s, r, nullptr);
  for (int round = 0; round < 6; ++round) {
    bool moved = false;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double base = s[k] > 0.0 ? s[k] : 1.0;
      double best_v = s[k];
      for (int e = -9; e <= 8; ++e) {
        if (e == 0) continue;
        const double v = e == -9 ? 0.0 : base * std::pow(10.0, 0.25 * e);
        const double keep = s[k];
        s[k] = v;
        const double cv = model.evaluate(s, r, nullptr);
        s[k] = keep;
        if (cv < cost) {
          cost = cv;
          best_v = v;
        }
      }
      if (best_v != s[k]) moved = true;
      s[k] = best_v;
    }
    if (!moved) break;
  }
}

std::optional<std::vector<double>> strengths_from_minima(const LadderConfig& cfg,
                                                        std::span<const TransitionPath> paths,
                                                        std::span<const double> grid, std::span<const double> y) {
  std::vector<double> poles;
  for (const auto& p : paths) poles.push_back(pole_position(cfg, p));
  std::sort(poles.begin(), poles.end());
  const double step = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  poles.erase(std::unique(poles.begin(), poles.end(), [&](double a, double b) { return b - a < 2.0 * step; }),
              poles.end());

  std::vector<double> edges;
  edges.push_back(grid.front() - 1.0);
  edges.insert(edges.end(), poles.begin(), poles.end());
  edges.push_back(grid.back() + 1.0);

  std::vector<double> minima;
  for (std::size_t g = 0; g + 1 < edges.size(); ++g) {
    std::optional<std::size_t> arg;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      if (grid[i] <= edges[g] + 2.0 * step || grid[i] >= edges[g + 1] - 2.0 * step) continue;
      if (!arg || y[i] < y[*arg]) arg = i;
    }
    if (!arg) continue;
    const std::size_t i = *arg;
    // Parabolic refinement through the neighbours.
    const double den = y[i - 1] - 2.0 * y[i] + y[i + 1];
    double x = grid[i];
    if (den > 0.0) x += 0.5 * step * (y[i - 1] - y[i + 1]) / den;
    minima.push_back(x);
  }
  if (minima.size() < paths.size()) return std::nullopt;

  Eigen::MatrixXd a(static_cast<Eigen::Index>(minima.size()), static_cast<Eigen::Index>(paths.size()));
  Eigen::VectorXd b(static_cast<Eigen::Index>(minima.size()));
  for (std::size_t j = 0; j < minima.size(); ++j) {
    b(static_cast<Eigen::Index>(j)) = minima[j];
    for (std::size_t k = 0; k < paths.size(); ++k)
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 1.0 / (minima[j] - pole_position(cfg, paths[k]));
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  std::vector<double> s(paths.size());
  for (std::size_t k = 0; k < paths.size(); ++k) s[k] = std::max(0.0, x(static_cast<Eigen::Index>(k)));
  return s;
}

}  // namespace

StrengthFit fit_path_strengths(const LadderConfig& cfg, std::span<const TransitionPath> paths,
                               std::span<const double> grid, std::span<const double> response) {
  if (grid.size() != response.size()) fail(ErrorKind::invalid_input, "fit: grid/response size mismatch");
  if (grid.size() < paths.size() + 1) fail(ErrorKind::invalid_input, "fit: fewer samples than parameters");
  StrengthFit out;
  if (paths.empty()) return out;
  const FitModel model{cfg, paths, grid, response};
  const std::size_t np = paths.size();

  std::vector<std::vector<double>> starts;
  // Linear response around zero strength, clamped to the feasible set.
  {
    std::vector<double> zero(np, 0.0);
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    model.evaluate(zero, r, &jac);
    const Eigen::VectorXd x = jac.colPivHouseholderQr().solve(-r);
    std::vector<double> s(np);
    for (std::size_t k = 0; k < np; ++k) s[k] = std::max(0.0, x(static_cast<Eigen::Index>(k)));
    starts.push_back(s);
  }
  // Transparency minima sit where delta_c = Re(Sigma(delta_c)), which is
  // linear in the strengths: one minimum per gap between sorted poles plus
  // one on each outer side.
  if (auto s = strengths_from_minima(cfg, paths, grid, response)) starts.push_back(std::move(*s));
  // Common-scale and angular-weight-pattern scans over decades.
  {
    Eigen::VectorXd r;
    std::vector<double> best_flat, best_pattern;
    double c_flat = std::numeric_limits<double>::infinity(), c_pattern = c_flat;
    for (int e = -2; e <= 20; ++e) {
      const double scale = std::pow(10.0, e);
      std::vector<double> flat(np, scale), pattern(np);
      for (std::size_t k = 0; k < np; ++k) pattern[k] = scale * 6.0 * paths[k].three_j * paths[k].three_j;
      const double cf = model.evaluate(flat, r, nullptr);
      const double cp = model.evaluate(pattern, r, nullptr);
      if (cf < c_flat) { c_flat = cf; best_flat = flat; }
      if (cp < c_pattern) { c_pattern = cp; best_pattern = pattern; }
    }
    if (!best_flat.empty()) starts.push_back(best_flat);
    if (!best_pattern.empty()) starts.push_back(best_pattern);
  }

  LmResult best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    auto res = levenberg_marquardt(model, starts[i]);
    ranked.emplace_back(res.cost, i);
    if (res.cost < best.cost) best = std::move(res);
  }
  // Fall back to coordinate scans from the two most promising starts when
  // none reached the data scale.
  const double data_sq = Eigen::Map<const Eigen::VectorXd>(response.data(), static_cast<Eigen::Index>(response.size())).squaredNorm();
  if (best.cost > 1e-16 * data_sq) {
    std::sort(ranked.begin(), ranked.end());
    for (std::size_t r = 0; r < std::min<std::size_t>(2, ranked.size()); ++r) {
      auto s0 = starts[ranked[r].second];
      coordinate_scan(model, s0);
      auto res = levenberg_marquardt(model, s0);
      if (res.cost < best.cost) best = std::move(res);
    }
  }
  // Paths the field does not drive leave no feature to pull their strength
  // back to zero, so try switching them off explicitly: each polarization
  // class (a polarization component vanishes for all its paths at once),
  // then single paths.
  std::vector<std::vector<bool>> masks;
  for (const auto& in_class : {std::function<bool(int)>([](int q) { return q == 0; }),
                               std::function<bool(int)>([](int q) { return q == 1; }),
                               std::function<bool(int)>([](int q) { return q == -1; }),
                               std::function<bool(int)>([](int q) { return q != 0; })}) {
    std::vector<bool> m(np);
    for (std::size_t k = 0; k < np; ++k) m[k] = in_class(paths[k].q);
    masks.push_back(m);
  }
  for (std::size_t k = 0; k < np; ++k) {
    std::vector<bool> m(np, false);
    m[k] = true;
    masks.push_back(m);
  }
  for (std::size_t pass = 0; pass < np; ++pass) {
    bool pruned = false;
    for (const auto& m : masks) {
      auto trial = best.s;
      double removed = 0.0, total = 0.0;
      for (std::size_t k = 0; k < np; ++k) {
        total += trial[k];
        if (m[k]) {
          removed += trial[k];
          trial[k] = 0.0;
        }
      }
      // Only weak groups are candidates for being undriven.
      if (!(removed > 0.0) || removed > 0.2 * total) continue;
      auto res = levenberg_marquardt(model, trial);
      if (res.cost < best.cost * (1.0 - 1e-9)) {
        best = std::move(res);
        pruned = true;
        break;
      }
    }
    if (!pruned) break;
  }
  out.strength = std::move(best.s);
  out.rms = std::sqrt(best.cost / static_cast<double>(grid.size()));
  out.iterations = best.iterations;
  return out;
}

EitSpectrum analyze_spectrum(const LadderConfig& cfg, std::vector<TransitionPath> paths, std::vector<double> grid,
                             std::vector<double> response) {
  if (grid.size() != response.size()) fail(ErrorKind::invalid_input, "spectrum: grid/response size mismatch");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) fail(ErrorKind::invalid_input, "spectrum: grid must be strictly increasing");

  EitSpectrum s;
  s.detuning_grid = std::move(grid);
  s.response = std::move(response);
  s.paths = std::move(paths);

  for (const auto& p : s.paths) {
    const double pole = pole_position(cfg, p);
    if (pole < s.detuning_grid.front() || pole > s.detuning_grid.back())
      s.warnings.push_back("grid does not cover the " + p.label() + " resonance");
  }

  const auto [mn, mx] = std::minmax_element(s.response.begin(), s.response.end());
  const double span = *mx - *mn;
  s.peaks = find_peaks(s.detuning_grid, s.response, 1e-3 * span);

  const auto fit = fit_path_strengths(cfg, s.paths, s.detuning_grid, s.response);
  s.path_strength = fit.strength;
  s.fit_residual = fit.rms;

  // Label each peak with the nearest pole of a path that carries strength.
  double total = 0.0;
  for (double v : s.path_strength) total += v;
  for (auto& pk : s.peaks) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.paths.size(); ++k) {
      if (!(s.path_strength[k] > 1e-9 * total)) continue;
      const double dist = std::abs(pole_position(cfg, s.paths[k]) - pk.center);
      if (dist < best) {
        best = dist;
        pk.path = k;
      }
    }
    if (pk.path && best > pk.fwhm) pk.path.reset();
    if (pk.path) pk.strength = s.path_strength[*pk.path];
  }
  // Resolvability: two strong poles inside one peak, or two peaks claiming one path.
  for (auto& pk : s.peaks) {
    int inside = 0;
    for (std::size_t k = 0; k < s.paths.size(); ++k)
      if (s.path_strength[k] > 1e-9 * total && std::abs(pole_position(cfg, s.paths[k]) - pk.center) < 0.5 * pk.fwhm)
        ++inside;
    if (inside > 1) pk.unresolved = true;
  }
  for (std::size_t a = 0; a < s.peaks.size(); ++a)
    for (std::size_t b = a + 1; b < s.peaks.size(); ++b)
      if (s.peaks[a].path && s.peaks[a].path == s.peaks[b].path) s.peaks[a].unresolved = s.peaks[b].unresolved = true;
  for (const auto& pk : s.peaks)
    if (pk.unresolved) {
      s.warnings.push_back("unresolved peak near " + std::to_string(pk.center / c::mhz) + " MHz");
    }
  return s;
}

EitSpectrum sweep_spectrum(const LadderConfig& cfg, const fields::SphericalDecomposition& decomp,
                           double field_along_axis, std::vector<double> grid, Exec exec) {
  auto paths = enumerate_paths(cfg, decomp, field_along_axis, PathOptions{.include_dark = true});
  auto response = sweep_response(cfg, paths, grid, ResponseModel::analytic, exec);
  return analyze_spectrum(cfg, std::move(paths), std::move(grid), std::move(response));
}

EitSpectrum sweep_spectrum(const LadderConfig& cfg, const fields::SphericalDecomposition& decomp,
                           const fields::BiasField& bias, std::vector<double> grid, Exec exec) {
  return sweep_spectrum(cfg, decomp, bias.projected(), std::move(grid), exec);
}

}  // namespace rydoa::spectroscopy
