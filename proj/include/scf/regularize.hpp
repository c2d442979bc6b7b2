#pragma once

// Procedures that replace a channel, a Lindbladian, a Markovian channel or a
// product of Markovian factors by a nearby member of the same class whose
// eigenvalues are all simple, together with an exceptional-point scanner for
// straight-line paths between two maps.
//
// "Simple" is numerical: min_gap(eig) > tau_gap (absolute, default 1e-8).

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include "scf/bounds.hpp"
#include "scf/constructions.hpp"

namespace scf {

inline constexpr double kGapTolerance = 1e-8;
inline constexpr int kScheduleLength = 16;
inline constexpr int kTimeGridPoints = 64;

enum class BudgetNorm { fro, diamond_upper };
enum class ChannelClass { automatic, cptp, unital, ptp };

struct RegularizeOptions {
  double tau_gap = kGapTolerance;
  std::uint64_t seed = 0;  // certificate sampling
  Tolerances tolerances{};
};

struct RegularizationReport {
  BudgetNorm budget = BudgetNorm::fro;
  double lambda = 0.0;
  std::vector<double> time_factors;
  double budget_distance = 0.0;  // D = ||input - target|| in the budget norm
  double achieved_gap = kInfiniteGap;
  double fro_distance = 0.0;
  double diamond_upper = 0.0;
  /// Lindbladian-contraction chain bound (Markovian procedures only).
  std::optional<double> telescoped_upper;
  /// Whether max|Im spec(L)| * t_max < pi held for the Markovian time window.
  std::optional<bool> strip_condition;
  ClassCertificate input_cert;
  ClassCertificate output_cert;
  int attempts = 0;
  std::vector<Complex> output_spectrum;
};

struct Regularized {
  Superoperator output;
  RegularizationReport report;
};

struct MarkovianRegularized {
  Superoperator channel;
  /// Generators whose exponentials multiply to `channel`, already time-scaled.
  std::vector<Superoperator> generators;
  RegularizationReport report;
};

struct GapCheck {
  bool simple = false;
  double gap = kInfiniteGap;
};

inline GapCheck is_simple(const Superoperator& s, double tau_gap = kGapTolerance) {
  const double gap = min_gap(eig(s.mat));
  return {gap > tau_gap, gap};
}

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline double budget_distance(const Superoperator& a, const Superoperator& b, BudgetNorm norm) {
  const Superoperator d = a - b;
  return norm == BudgetNorm::fro ? d.mat.norm() : diamond_bounds(d).upper;
}

inline void require_class(const ClassCertificate& c, ChannelClass cls) {
  if (!c.tp) throw Error(ErrorKind::NotTP, "input is not trace preserving");
  switch (cls) {
    case ChannelClass::automatic: return;
    case ChannelClass::cptp:
      if (!c.cp) throw Error(ErrorKind::NotCP, "input is not completely positive");
      return;
    case ChannelClass::unital:
      if (!c.cp) throw Error(ErrorKind::NotCP, "input is not completely positive");
      if (!c.unital) throw Error(ErrorKind::NotUnital, "input is not unital");
      return;
    case ChannelClass::ptp:
      if (!c.positive_heuristic) throw Error(ErrorKind::NotPositive, "sampling found a negative output");
      return;
  }
}

inline void require_positive_budget(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::OutOfRange, "eps must be positive and finite");
}

/// Convex path (1 - lambda) x + lambda target over the decreasing schedule
/// lambda_j = lambda_0 (1 - j/16), lambda_0 = min(eps / D, 1/2).
inline Regularized convex_schedule(const Superoperator& x, const Superoperator& target, double eps,
                                   BudgetNorm budget, const RegularizeOptions& opt) {
  Regularized out{x, {}};
  RegularizationReport& r = out.report;
  r.budget = budget;
  r.budget_distance = budget_distance(x, target, budget);
  if (eps < 1e-14 * r.budget_distance) throw Error(ErrorKind::BudgetTooTight, "eps underflows the mixing weight");
  const double lambda0 = r.budget_distance == 0.0 ? 0.5 : std::min(eps / r.budget_distance, 0.5);
  for (int j = 0; j < kScheduleLength; ++j) {
    const double lambda = lambda0 * (1.0 - static_cast<double>(j) / kScheduleLength);
    Superoperator candidate{x.n, (1.0 - lambda) * x.mat + lambda * target.mat};
    const Spectrum s = eig(candidate.mat);
    const double gap = min_gap(s);
    if (gap > opt.tau_gap) {
      r.lambda = lambda;
      r.attempts = j + 1;
      r.achieved_gap = gap;
      r.output_spectrum = s.eigenvalues;
      const Superoperator diff = x - candidate;
      r.fro_distance = diff.mat.norm();
      r.diamond_upper = diamond_bounds(diff).upper;
      out.output = std::move(candidate);
      return out;
    }
  }
  throw Error(ErrorKind::ScheduleExhausted, "all 16 mixing weights hit an exceptional point");
}

inline Regularized unchanged_scalar_map(const Superoperator& x, MapKind kind, const RegularizeOptions& opt) {
  Regularized out{x, {}};
  out.report.input_cert = out.report.output_cert = certify(x, kind, opt.seed, opt.tolerances);
  out.report.output_spectrum = eig(x.mat).eigenvalues;
  return out;
}

}  // namespace detail

/// Phi_eps = (1 - lambda) Phi + lambda Psi(n), the first admissible weight of
/// the schedule. Psi is unital CPTP, so CPTP, unital and PTP inputs stay in
/// their class by convexity.
inline Regularized regularize_channel(const Superoperator& phi, double eps, BudgetNorm budget = BudgetNorm::fro,
                                      ChannelClass cls = ChannelClass::automatic, const RegularizeOptions& opt = {}) {
  detail::require_positive_budget(eps);
  if (phi.n == 1) return detail::unchanged_scalar_map(phi, MapKind::channel, opt);
  const ClassCertificate input = certify(phi, MapKind::channel, opt.seed, opt.tolerances);
  detail::require_class(input, cls);
  Regularized out = detail::convex_schedule(phi, build_psi(phi.n).superop, eps, budget, opt);
  out.report.input_cert = input;
  out.report.output_cert = certify(out.output, MapKind::channel, opt.seed, opt.tolerances);
  return out;
}

/// L = Phi - id.
inline Superoperator markovian_approximation(const Superoperator& phi, const RegularizeOptions& opt = {}) {
  const ClassCertificate c = certify(phi, MapKind::channel, opt.seed, opt.tolerances);
  detail::require_class(c, ChannelClass::cptp);
  return phi - Superoperator::identity(phi.n);
}

/// L_eps = (1 - lambda) L + lambda (Psi - id); the Lie wedge is convex, so the
/// output is again a Lindbladian.
inline Regularized regularize_generator(const Superoperator& l, double eps, BudgetNorm budget = BudgetNorm::fro,
                                        const RegularizeOptions& opt = {}) {
  detail::require_positive_budget(eps);
  const ClassCertificate input = certify(l, MapKind::generator, opt.seed, opt.tolerances);
  if (!input.gksl) throw Error(ErrorKind::NotGKSL, "input is not a GKSL generator");
  if (l.n == 1) return detail::unchanged_scalar_map(l, MapKind::generator, opt);
  const Superoperator target = build_psi(l.n).superop - Superoperator::identity(l.n);
  Regularized out = detail::convex_schedule(l, target, eps, budget, opt);
  out.report.input_cert = input;
  out.report.output_cert = certify(out.output, MapKind::generator, opt.seed, opt.tolerances);
  return out;
}

namespace detail {

inline void require_nonzero_gksl(const Superoperator& l, const RegularizeOptions& opt) {
  if (l.mat.norm() == 0.0) throw Error(ErrorKind::ZeroGenerator, "generator is zero");
  if (!certify(l, MapKind::generator, opt.seed, opt.tolerances).gksl)
    throw Error(ErrorKind::NotGKSL, "input is not a GKSL generator");
}

inline double max_abs_imag(const std::vector<Complex>& values) {
  double m = 0.0;
  for (Complex z : values) m = std::max(m, std::abs(z.imag()));
  return m;
}

}  // namespace detail

/// Time-independent Markovian channel e^L replaced by e^{t L_eps}: L_eps from
/// regularize_generator(L, eps/2) under the diamond upper-bound budget, then t
/// is the grid point 1 + Delta k/64 (k = 1..64, nearest to 1 first) whose
/// exponential has simple spectrum, Delta = min(1/2, eps / (2 ||L_eps||_ub)).
inline MarkovianRegularized regularize_markovian(const Superoperator& l, double eps, const RegularizeOptions& opt = {}) {
  detail::require_positive_budget(eps);
  detail::require_nonzero_gksl(l, opt);

  const Regularized gen = regularize_generator(l, 0.5 * eps, BudgetNorm::diamond_upper, opt);
  const Superoperator& l_eps = gen.output;
  const double l_eps_norm = diamond_bounds(l_eps).upper;
  double delta = std::min(0.5, eps / (2.0 * l_eps_norm));

  const double imag = detail::max_abs_imag(gen.report.output_spectrum);
  bool strip = imag * (1.0 + delta) < std::numbers::pi;
  if (!strip && imag < std::numbers::pi) {
    delta = std::min(delta, 0.5 * (std::numbers::pi / imag - 1.0));
    strip = true;
  }

  const Superoperator original = exp_map(l);
  for (int k = 1; k <= kTimeGridPoints; ++k) {
    const double t = 1.0 + delta * k / kTimeGridPoints;
    Superoperator channel = exp_map(t * l_eps);
    const Spectrum s = eig(channel.mat);
    const double gap = min_gap(s);
    if (gap <= opt.tau_gap) continue;

    MarkovianRegularized out{std::move(channel), {t * l_eps}, {}};
    RegularizationReport& r = out.report;
    r.budget = BudgetNorm::diamond_upper;
    r.lambda = gen.report.lambda;
    r.budget_distance = gen.report.budget_distance;
    r.time_factors = {t};
    r.attempts = gen.report.attempts + k;
    r.achieved_gap = gap;
    r.output_spectrum = s.eigenvalues;
    r.strip_condition = strip;
    const Superoperator diff = original - out.channel;
    r.fro_distance = diff.mat.norm();
    r.telescoped_upper = gen.report.diamond_upper + (t - 1.0) * l_eps_norm;
    r.diamond_upper = std::min(diamond_bounds(diff).upper, *r.telescoped_upper);
    r.input_cert = certify(l, MapKind::generator, opt.seed, opt.tolerances);
    r.output_cert = certify(out.channel, MapKind::channel, opt.seed, opt.tolerances);
    return out;
  }
  throw Error(ErrorKind::ScanExhausted, "all 64 time factors hit an exceptional point");
}

/// Product e^{L_1} ... e^{L_m} replaced factor by factor: L_1 via
/// regularize_markovian(L_1, eps/(2m)); each later L_{k+1} is scaled by the
/// largest t_{k+1} on a 64-point grid over [1 - eps/(2m ||L_{k+1}||_ub), 1]
/// keeping the partial product simple.
inline MarkovianRegularized regularize_markovian_product(const std::vector<Superoperator>& ls, double eps,
                                                         const RegularizeOptions& opt = {}) {
  detail::require_positive_budget(eps);
  if (ls.empty()) throw Error(ErrorKind::OutOfRange, "empty generator list");
  const int n = ls.front().n;
  for (const Superoperator& l : ls) {
    if (l.n != n) throw Error(ErrorKind::DimensionMismatch, "generators differ in dimension");
    detail::require_nonzero_gksl(l, opt);
  }
  const double m = static_cast<double>(ls.size());

  MarkovianRegularized out = regularize_markovian(ls.front(), eps / (2.0 * m), opt);
  if (ls.size() == 1) return out;

  RegularizationReport& r = out.report;
  double telescoped = r.diamond_upper;
  CMatrix original = expm(ls.front().mat);
  CMatrix prefix = out.channel.mat;
  for (std::size_t k = 1; k < ls.size(); ++k) {
    const Superoperator& l = ls[k];
    original = original * expm(l.mat);
    const double l_norm = diamond_bounds(l).upper;
    const double lo = std::max(0.0, 1.0 - eps / (2.0 * m * l_norm));
    bool accepted = false;
    for (int i = 0; i < kTimeGridPoints; ++i) {
      const double t = 1.0 - (1.0 - lo) * i / (kTimeGridPoints - 1);
      CMatrix candidate = prefix * expm(t * l.mat);
      const Spectrum s = eig(candidate);
      const double gap = min_gap(s);
      if (gap <= opt.tau_gap) continue;
      prefix = std::move(candidate);
      out.generators.push_back(t * l);
      r.time_factors.push_back(t);
      r.attempts += i + 1;
      r.achieved_gap = gap;
      r.output_spectrum = s.eigenvalues;
      telescoped += (1.0 - t) * l_norm;
      accepted = true;
      break;
    }
    if (!accepted) throw Error(ErrorKind::ScanExhausted, "all 64 time factors hit an exceptional point");
  }

  out.channel = Superoperator{n, prefix};
  const Superoperator reference{n, original};
  const Superoperator diff = reference - out.channel;
  r.fro_distance = diff.mat.norm();
  r.telescoped_upper = telescoped;
  r.diamond_upper = std::min(diamond_bounds(diff).upper, telescoped);
  r.input_cert = certify(reference, MapKind::channel, opt.seed, opt.tolerances);
  r.output_cert = certify(out.channel, MapKind::channel, opt.seed, opt.tolerances);
  return out;
}

struct PathScanReport {
  std::vector<double> grid;
  std::vector<double> gaps;
  std::vector<std::vector<Complex>> spectra;
  std::vector<std::pair<double, double>> exceptional_intervals;
  double tau_gap = kGapTolerance;
};

/// Minimum eigenvalue gap along (1 - t) X + t Z on a uniform grid over [0, 1].
/// Each run of sub-threshold grid points becomes one interval whose open ends
/// are refined by bisection on the gap to width `refine_width`; intervals are
/// outer enclosures.
inline PathScanReport scan_path(const Superoperator& x, const Superoperator& z, int grid_size,
                                double tau_gap = kGapTolerance, double refine_width = 1e-6) {
  if (x.n != z.n) throw Error(ErrorKind::DimensionMismatch, "scan_path endpoints differ in dimension");
  if (grid_size < 2) throw Error(ErrorKind::OutOfRange, "scan_path needs grid_size >= 2");

  auto point = [&](double t) { return CMatrix((1.0 - t) * x.mat + t * z.mat); };
  auto exceptional = [&](double t) { return min_gap(eig(point(t))) <= tau_gap; };

  PathScanReport r;
  r.tau_gap = tau_gap;
  const auto count = static_cast<std::size_t>(grid_size);
  r.grid.resize(count);
  r.gaps.resize(count);
  r.spectra.resize(count);
  for (std::size_t i = 0; i < count; ++i) r.grid[i] = static_cast<double>(i) / (grid_size - 1);
  detail::parallel_for(count, [&](std::size_t i) {
    Spectrum s = eig(point(r.grid[i]));
    r.gaps[i] = min_gap(s);
    r.spectra[i] = std::move(s.eigenvalues);
  });

  auto refine = [&](double ok, double bad) {
    while (std::abs(ok - bad) > refine_width) {
      const double mid = 0.5 * (ok + bad);
      (exceptional(mid) ? bad : ok) = mid;
    }
    return ok;
  };
  std::size_t i = 0;
  while (i < count) {
    if (r.gaps[i] > tau_gap) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < count && r.gaps[j + 1] <= tau_gap) ++j;
    const double lo = i == 0 ? r.grid.front() : refine(r.grid[i - 1], r.grid[i]);
    const double hi = j + 1 == count ? r.grid.back() : refine(r.grid[j + 1], r.grid[j]);
    r.exceptional_intervals.emplace_back(lo, hi);
    i = j + 1;
  }
  return r;
}

/// Greedy nearest-neighbour relabelling of consecutive spectra so each column
/// follows one eigenvalue branch. Labels may swap at exceptional points.
inline std::vector<std::vector<Complex>> track_eigenvalues(const std::vector<std::vector<Complex>>& spectra) {
  std::vector<std::vector<Complex>> tracked;
  tracked.reserve(spectra.size());
  for (const auto& current : spectra) {
    if (tracked.empty()) {
      std::vector<Complex> first = current;
      std::sort(first.begin(), first.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
      });
      tracked.push_back(std::move(first));
      continue;
    }
    const auto& prev = tracked.back();
    struct Pair {
      double d;
      std::size_t p;
      std::size_t c;
    };
    std::vector<Pair> pairs;
    for (std::size_t p = 0; p < prev.size(); ++p)
      for (std::size_t c = 0; c < current.size(); ++c) pairs.push_back({std::abs(prev[p] - current[c]), p, c});
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
    std::vector<Complex> next(prev.size());
    std::vector<bool> used_p(prev.size(), false);
    std::vector<bool> used_c(current.size(), false);
    for (const Pair& pr : pairs) {
      if (used_p[pr.p] || used_c[pr.c]) continue;
      used_p[pr.p] = used_c[pr.c] = true;
      next[pr.p] = current[pr.c];
    }
    tracked.push_back(std::move(next));
  }
  return tracked;
}

}  // namespace scf
