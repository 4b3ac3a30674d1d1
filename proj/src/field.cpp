#include "cadkit/field.hpp"

#include "cadkit/error.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

namespace cadkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double half_gap(const std::vector<double>& v, int i) {
  const double lo = i > 0 ? v[i] - v[i - 1] : 0.0;
  const double hi = i + 1 < static_cast<int>(v.size()) ? v[i + 1] - v[i] : 0.0;
  if (i == 0) return hi;
  if (i + 1 == static_cast<int>(v.size())) return lo;
  return 0.5 * (lo + hi);
}

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InputError("truncated field file");
  return v;
}

}  // namespace

double FieldSample::cell_area(int i, int j) const { return half_gap(xs, i) * half_gap(ys, j); }

std::optional<Point2> FieldSample::gradient(int i, int j) const {
  if (!active(i, j)) return std::nullopt;
  const double u = at(i, j);
  auto axis = [&](const std::vector<double>& c, int k, bool l, bool r, double ul, double ur) -> std::optional<double> {
    if (l && r) {
      // Three-point derivative on a possibly uneven stencil; exact for quadratics.
      const double hl = c[k] - c[k - 1], hr = c[k + 1] - c[k];
      return (hl * hl * (ur - u) + hr * hr * (u - ul)) / (hl * hr * (hl + hr));
    }
    if (r) return (ur - u) / (c[k + 1] - c[k]);
    if (l) return (u - ul) / (c[k] - c[k - 1]);
    return std::nullopt;
  };
  const bool xl = active(i - 1, j), xr = active(i + 1, j);
  const bool yl = active(i, j - 1), yr = active(i, j + 1);
  const auto gx = axis(xs, i, xl, xr, xl ? at(i - 1, j) : 0.0, xr ? at(i + 1, j) : 0.0);
  const auto gy = axis(ys, j, yl, yr, yl ? at(i, j - 1) : 0.0, yr ? at(i, j + 1) : 0.0);
  if (!gx || !gy) return std::nullopt;
  return Point2(*gx, *gy);
}

std::optional<Eigen::Matrix2d> FieldSample::hessian(int i, int j) const {
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      if (!active(i + di, j + dj)) return std::nullopt;
    }
  }
  const double hl = xs[i] - xs[i - 1], hr = xs[i + 1] - xs[i];
  const double hd = ys[j] - ys[j - 1], hu = ys[j + 1] - ys[j];
  auto first = [](double hm, double hp, double um, double u, double up) {
    return (hm * hm * (up - u) + hp * hp * (u - um)) / (hm * hp * (hm + hp));
  };
  auto second = [](double hm, double hp, double um, double u, double up) {
    return 2.0 * ((up - u) / hp - (u - um) / hm) / (hm + hp);
  };
  Eigen::Matrix2d H;
  H(0, 0) = second(hl, hr, at(i - 1, j), at(i, j), at(i + 1, j));
  H(1, 1) = second(hd, hu, at(i, j - 1), at(i, j), at(i, j + 1));
  double gx[3];
  for (int dj = -1; dj <= 1; ++dj) gx[dj + 1] = first(hl, hr, at(i - 1, j + dj), at(i, j + dj), at(i + 1, j + dj));
  H(0, 1) = H(1, 0) = first(hd, hu, gx[0], gx[1], gx[2]);
  return H;
}

FieldSample FieldSample::uniform(const Domain& domain, const Box2& box, double h) {
  if (!(h > 0.0)) throw RangeError("field pitch must be positive");
  std::vector<double> xs, ys;
  const int nx = static_cast<int>(std::floor(box.size().x() / h + 1e-9)) + 1;
  const int ny = static_cast<int>(std::floor(box.size().y() / h + 1e-9)) + 1;
  for (int i = 0; i < nx; ++i) xs.push_back(box.lo.x() + i * h);
  for (int j = 0; j < ny; ++j) ys.push_back(box.lo.y() + j * h);
  FieldSample f = tensor(domain, std::move(xs), std::move(ys));
  f.pitch = h;
  return f;
}

FieldSample FieldSample::tensor(const Domain& domain, std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() < 2 || ys.size() < 2) throw RangeError("field grid needs at least two nodes per axis");
  FieldSample f;
  f.xs = std::move(xs);
  f.ys = std::move(ys);
  f.values.assign(f.xs.size() * f.ys.size(), kNaN);
  for (int j = 0; j < f.ny(); ++j) {
    for (int i = 0; i < f.nx(); ++i) {
      const Point2 p = f.node(i, j);
      if (domain.delta(p) > 0.0 && domain.inside(p)) f.at(i, j) = 0.0;
    }
  }
  return f;
}

void FieldSample::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write field file " + path.string());
  out.write("CADF", 4);
  put<std::int32_t>(out, nx());
  put<std::int32_t>(out, ny());
  put<double>(out, pitch);
  put<double>(out, xs.front());
  put<double>(out, ys.front());
  if (pitch == 0.0) {
    for (double x : xs) put<double>(out, x);
    for (double y : ys) put<double>(out, y);
  }
  for (double v : values) put<double>(out, v);
}

FieldSample FieldSample::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read field file " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CADF", 4) != 0) throw InputError("not a field file: " + path.string());
  const int nx = get<std::int32_t>(in), ny = get<std::int32_t>(in);
  if (nx < 2 || ny < 2) throw InputError("field file with fewer than two nodes per axis");
  FieldSample f;
  f.pitch = get<double>(in);
  const double x0 = get<double>(in), y0 = get<double>(in);
  f.xs.resize(nx);
  f.ys.resize(ny);
  if (f.pitch == 0.0) {
    for (auto& x : f.xs) x = get<double>(in);
    for (auto& y : f.ys) y = get<double>(in);
  } else {
    for (int i = 0; i < nx; ++i) f.xs[i] = x0 + i * f.pitch;
    for (int j = 0; j < ny; ++j) f.ys[j] = y0 + j * f.pitch;
  }
  f.values.resize(static_cast<std::size_t>(nx) * ny);
  for (auto& v : f.values) v = get<double>(in);
  return f;
}

}  // namespace cadkit
