#include "cadkit/wos.hpp"

#include "cadkit/error.hpp"

#include <cmath>

namespace cadkit {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <class Walk>
WosEstimate run(const WosOptions& opts, Walk&& walk) {
  if (opts.walks < 2) throw ParameterError("walk-on-spheres needs at least two walks");
  WosEstimate e;
  double sum = 0.0, sum2 = 0.0, steps = 0.0;
  long done = 0;
  for (long w = 0; w < opts.walks; ++w) {
    long n = 0;
    const auto v = walk(static_cast<std::uint64_t>(w), n);
    steps += static_cast<double>(n);
    if (!v) {
      ++e.diverged;
      continue;
    }
    sum += *v;
    sum2 += *v * *v;
    ++done;
  }
  e.walks = opts.walks;
  e.mean_steps = steps / static_cast<double>(opts.walks);
  if (done < 2) throw SolverError("every walk exhausted its step budget", kInf);
  e.mean = sum / done;
  const double var = std::max(0.0, (sum2 - done * e.mean * e.mean) / (done - 1));
  e.stderr_ = std::sqrt(var / done);
  return e;
}

}  // namespace

nlohmann::json WosEstimate::to_json() const {
  return {{"mean", mean}, {"stderr", stderr_}, {"walks", walks}, {"diverged", diverged}, {"mean_steps", mean_steps}};
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t z = splitmix64(splitmix64(seed ^ splitmix64(stream)) + counter);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

namespace {

std::optional<BoundaryPoint> walk2(const Domain& domain, const Point2& x, const WosOptions& opts, std::uint64_t w,
                                   long& n) {
  const double eps = opts.shell * domain.boundary_diameter();
  Point2 p = x;
  for (n = 0; n < opts.max_steps; ++n) {
    const double r = domain.delta(p);
    if (r < eps) return domain.boundary().nearest(p);
    const double th = 2.0 * kPi * counter_uniform(opts.seed, w, static_cast<std::uint64_t>(n));
    p += r * Point2(std::cos(th), std::sin(th));
  }
  return std::nullopt;
}

}  // namespace

WosEstimate walk_on_spheres(const Domain& domain, const Point2& x, const BoundaryData& f, const WosOptions& opts) {
  if (!domain.inside(x)) throw PreconditionError("walk start outside the domain");
  return run(opts, [&](std::uint64_t w, long& n) -> std::optional<double> {
    const auto hit = walk2(domain, x, opts, w, n);
    if (!hit) return std::nullopt;
    return f(*hit);
  });
}

EllipticMeasureEstimate wos_measure(const Domain& domain, const Point2& x, const DyadicGrid& grid, int k,
                                    const WosOptions& opts) {
  if (!domain.inside(x)) throw PreconditionError("walk start outside the domain");
  if (k < 0 || k > grid.depth()) throw RangeError("generation outside the grid");
  const auto gen = grid.generation(k);
  std::vector<int> pos(grid.size(), -1);
  for (std::size_t i = 0; i < gen.size(); ++i) pos[gen[i]] = static_cast<int>(i);
  std::vector<double> count(gen.size(), 0.0);
  long done = 0;
  for (long w = 0; w < opts.walks; ++w) {
    long n = 0;
    const auto hit = walk2(domain, x, opts, static_cast<std::uint64_t>(w), n);
    if (!hit) continue;
    ++done;
    const int id = grid.locate(k, *hit);
    if (id >= 0 && pos[id] >= 0) count[pos[id]] += 1.0;
  }
  if (done < 2) throw SolverError("every walk exhausted its step budget", kInf);
  EllipticMeasureEstimate e;
  e.pole = x;
  e.generation = k;
  e.cubes.assign(gen.begin(), gen.end());
  for (double c : count) {
    const double p = c / done;
    e.mass.push_back(p);
    e.stderr_.push_back(std::sqrt(p * (1.0 - p) / done));
  }
  return e;
}

WosEstimate walk_on_spheres3(const Domain3& domain, const Point3& x, const std::function<double(const Point3&)>& f,
                             const WosOptions& opts) {
  if (!domain.inside(x)) throw PreconditionError("walk start outside the domain");
  const double eps = opts.shell * domain.boundary_diameter();
  return run(opts, [&](std::uint64_t w, long& n) -> std::optional<double> {
    Point3 p = x;
    for (n = 0; n < opts.max_steps; ++n) {
      const double r = domain.unsigned_distance(p);
      if (r < eps) return f(domain.nearest(p));
      const double z = 2.0 * counter_uniform(opts.seed, w, 2 * static_cast<std::uint64_t>(n)) - 1.0;
      const double ph = 2.0 * kPi * counter_uniform(opts.seed, w, 2 * static_cast<std::uint64_t>(n) + 1);
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      p += r * Point3(s * std::cos(ph), s * std::sin(ph), z);
    }
    return std::nullopt;
  });
}

WosEstimate green3_wos(const Domain3& domain, const Point3& x, const Point3& y, const WosOptions& opts) {
  if (!domain.inside(y)) throw PreconditionError("Green pole outside the domain");
  if ((x - y).norm() == 0.0) throw PreconditionError("Green function evaluated at its pole");
  auto gamma = [&](const Point3& z) { return 1.0 / (4.0 * kPi * (z - y).norm()); };
  WosEstimate e = walk_on_spheres3(domain, x, gamma, opts);
  e.mean = gamma(x) - e.mean;
  return e;
}

}  // namespace cadkit
