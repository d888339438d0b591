#include "kgelab/grid_fields.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <fftw3.h>

namespace kgelab {

namespace {

using Complex = std::complex<double>;

/// FFTW plans plus the wavenumber tables for one grid shape and box.
struct Spectral {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::size_t real_size = 0;
  std::size_t complex_size = 0;
  int last_half = 0;  // N_last/2 + 1
  std::vector<double> k_squared;             // per complex index
  std::vector<double> weight;                // Parseval weight (1 or 2)
  std::vector<std::vector<double>> k_axis;   // per axis, per complex index; Nyquist -> 0

  ~Spectral() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

std::mutex g_plan_mutex;

const Spectral& spectral_for(const Grid& grid) {
  using Key = std::pair<std::vector<int>, std::vector<double>>;
  static std::map<Key, std::unique_ptr<Spectral>> cache;

  std::lock_guard<std::mutex> lock(g_plan_mutex);
  Key key{grid.points(), grid.lengths()};
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  auto s = std::make_unique<Spectral>();
  const int dim = grid.dim();
  const auto& n = grid.points();
  s->real_size = grid.size();
  s->last_half = n.back() / 2 + 1;
  s->complex_size = grid.size() / n.back() * s->last_half;

  {
    std::vector<double> rbuf(s->real_size);
    std::vector<Complex> cbuf(s->complex_size);
    auto* cptr = reinterpret_cast<fftw_complex*>(cbuf.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    s->forward = fftw_plan_dft_r2c(dim, n.data(), rbuf.data(), cptr, flags);
    s->backward = fftw_plan_dft_c2r(dim, n.data(), cptr, rbuf.data(), flags);
  }

  s->k_squared.assign(s->complex_size, 0.0);
  s->weight.assign(s->complex_size, 1.0);
  s->k_axis.assign(dim, std::vector<double>(s->complex_size, 0.0));

  std::vector<int> cshape(n.begin(), n.end());
  cshape.back() = s->last_half;
  std::vector<int> idx(dim, 0);
  for (std::size_t c = 0; c < s->complex_size; ++c) {
    std::size_t rem = c;
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % cshape[a]);
      rem /= cshape[a];
    }
    double ksq = 0.0;
    for (int a = 0; a < dim; ++a) {
      const int na = n[a];
      const double base = 2.0 * std::numbers::pi / grid.lengths()[a];
      int m = idx[a];
      if (a < dim - 1 && m >= na / 2) m -= na;  // full axes: {-N/2..N/2-1}
      const bool nyquist = (na % 2 == 0) && (std::abs(m) == na / 2);
      const double k = base * m;
      ksq += k * k;
      s->k_axis[a][c] = nyquist ? 0.0 : k;
    }
    s->k_squared[c] = ksq;
    const int last = idx[dim - 1];
    const bool self_conjugate = last == 0 || (n.back() % 2 == 0 && last == n.back() / 2);
    s->weight[c] = self_conjugate ? 1.0 : 2.0;
  }

  auto& ref = *s;
  cache.emplace(std::move(key), std::move(s));
  return ref;
}

std::vector<Complex> forward_transform(const Spectral& s, const ScalarField& f) {
  std::vector<Complex> out(s.complex_size);
  // Out-of-place r2c preserves its input.
  fftw_execute_dft_r2c(s.forward, const_cast<double*>(f.values().data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

ScalarField backward_transform(const Spectral& s, const Grid& grid,
                               std::vector<Complex>& spectrum) {
  ScalarField out(grid);
  fftw_execute_dft_c2r(s.backward, reinterpret_cast<fftw_complex*>(spectrum.data()),
                       out.values().data());
  const double norm = 1.0 / static_cast<double>(s.real_size);
  for (auto& v : out.values()) v *= norm;
  return out;
}

void require_finite(const ScalarField& f, const char* op) {
  if (f.overflowed() || !f.all_finite())
    throw DomainError(std::string(op) + ": field contains non-finite values");
}

template <class Multiplier>
ScalarField apply_multiplier(const ScalarField& f, Multiplier&& mult) {
  const Spectral& s = spectral_for(f.grid());
  auto spec = forward_transform(s, f);
  for (std::size_t c = 0; c < s.complex_size; ++c) spec[c] *= mult(s, c);
  return backward_transform(s, f.grid(), spec);
}

/// Neumaier-compensated sum in fixed index order.
template <class Term>
double compensated_sum(std::size_t n, Term&& term) {
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = term(i);
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(std::vector<int> points, std::vector<double> lengths, std::size_t max_points)
    : points_(std::move(points)), lengths_(std::move(lengths)) {
  if (points_.empty() || points_.size() > 3)
    throw std::invalid_argument("grid: dimension must be 1, 2 or 3");
  if (points_.size() != lengths_.size())
    throw std::invalid_argument("grid: points and lengths differ in length");
  size_ = 1;
  for (std::size_t a = 0; a < points_.size(); ++a) {
    if (points_[a] < 8 || points_[a] % 2 != 0)
      throw std::invalid_argument("grid: every axis needs an even count >= 8");
    if (!std::has_single_bit(static_cast<unsigned>(points_[a])))
      throw std::invalid_argument("grid: axis counts must be powers of two");
    if (!(lengths_[a] > 0.0) || !std::isfinite(lengths_[a]))
      throw std::invalid_argument("grid: box lengths must be positive");
    size_ *= static_cast<std::size_t>(points_[a]);
  }
  if (size_ > max_points)
    throw std::invalid_argument("grid: point count exceeds the memory budget");
}

Grid Grid::cube(int dim, int points, double length) {
  return Grid(std::vector<int>(dim, points), std::vector<double>(dim, length));
}

double Grid::cell_volume() const {
  double h = 1.0;
  for (int a = 0; a < dim(); ++a) h *= spacing(a);
  return h;
}

double Grid::volume() const {
  double v = 1.0;
  for (double l : lengths_) v *= l;
  return v;
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("field: value count does not match the grid");
}

ScalarField ScalarField::from_function(
    const Grid& grid, const std::function<double(std::span<const double>)>& f) {
  ScalarField out(grid);
  const int dim = grid.dim();
  std::vector<int> idx(dim, 0);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::size_t rem = i;
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % grid.points()[a]);
      rem /= grid.points()[a];
      x[a] = grid.coordinate(a, idx[a]);
    }
    out.values_[i] = f(x);
  }
  return out;
}

ScalarField ScalarField::constant(const Grid& grid, double value) {
  return ScalarField(grid, std::vector<double>(grid.size(), value));
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(v));
  }
  return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  overflowed_ = overflowed_ || other.overflowed_;
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  overflowed_ = overflowed_ || other.overflowed_;
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

ScalarField axpy(const ScalarField& a, double s, const ScalarField& b) {
  require_same_grid(a, b);
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
  return out;
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw DomainError("fields live on different grids");
}

// ---------------------------------------------------------------------------
// Spectral operators

ScalarField laplacian(const ScalarField& f) {
  require_finite(f, "laplacian");
  return apply_multiplier(f, [](const Spectral& s, std::size_t c) { return -s.k_squared[c]; });
}

ScalarField partial_derivative(const ScalarField& f, int axis) {
  require_finite(f, "partial_derivative");
  if (axis < 0 || axis >= f.grid().dim()) throw std::out_of_range("partial_derivative: axis");
  return apply_multiplier(f, [axis](const Spectral& s, std::size_t c) {
    return Complex(0.0, s.k_axis[axis][c]);
  });
}

ScalarField inverse_helmholtz(const ScalarField& f, double shift) {
  require_finite(f, "inverse_helmholtz");
  if (!(shift > 0.0)) throw std::invalid_argument("inverse_helmholtz: shift must be positive");
  return apply_multiplier(
      f, [shift](const Spectral& s, std::size_t c) { return 1.0 / (s.k_squared[c] + shift); });
}

double integrate(const ScalarField& f) {
  if (f.overflowed()) return std::numeric_limits<double>::infinity();
  const auto v = f.values();
  return f.grid().cell_volume() * compensated_sum(v.size(), [&](std::size_t i) { return v[i]; });
}

double integrate_product(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  if (a.overflowed() || b.overflowed()) return std::numeric_limits<double>::infinity();
  const auto x = a.values();
  const auto y = b.values();
  return a.grid().cell_volume() *
         compensated_sum(x.size(), [&](std::size_t i) { return x[i] * y[i]; });
}

double gradient_norm_sq(const ScalarField& f) {
  if (f.overflowed()) return std::numeric_limits<double>::infinity();
  require_finite(f, "gradient_norm_sq");
  const Spectral& s = spectral_for(f.grid());
  const auto spec = forward_transform(s, f);
  const double sum = compensated_sum(s.complex_size, [&](std::size_t c) {
    return s.weight[c] * s.k_squared[c] * std::norm(spec[c]);
  });
  // Parseval: sum_x |g|^2 = (1/N) sum_k |g_k|^2, then multiply by the cell volume.
  const double n = static_cast<double>(s.real_size);
  return f.grid().cell_volume() * sum / n;
}

// ---------------------------------------------------------------------------
// Snapshot I/O

namespace {

template <class Seq>
std::string join(const Seq& seq) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& x : seq) {
    if (!first) os << ',';
    os << x;
    first = false;
  }
  return os.str();
}

std::uint64_t to_little_endian(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(bits);
  return bits;
}

std::string header_value(const std::string& header, const std::string& key) {
  const std::string tag = key + "=";
  std::size_t pos = 0;
  while ((pos = header.find(tag, pos)) != std::string::npos) {
    if (pos == 0 || header[pos - 1] == ' ' || header[pos - 1] == ';') break;
    pos += tag.size();
  }
  if (pos == std::string::npos) throw std::runtime_error("snapshot: header lacks " + key);
  const auto start = pos + tag.size();
  const auto end = header.find(';', start);
  return header.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v)) throw std::runtime_error("snapshot: malformed list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

void write_snapshot(std::ostream& os, const ScalarField& f) {
  const Grid& g = f.grid();
  os << "KGELAB-FIELD v1; dim=" << g.dim() << "; points=" << join(g.points())
     << "; lengths=" << join(g.lengths()) << "; encoding=f64le\n";
  for (double v : f.values()) {
    std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!os) throw std::runtime_error("snapshot: write failed");
}

ScalarField read_snapshot(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("KGELAB-FIELD v1;", 0) != 0)
    throw std::runtime_error("snapshot: missing KGELAB-FIELD v1 header");
  if (header_value(header, "encoding") != "f64le")
    throw std::runtime_error("snapshot: unsupported encoding");
  const int dim = std::stoi(header_value(header, "dim"));
  Grid grid(parse_list<int>(header_value(header, "points")),
            parse_list<double>(header_value(header, "lengths")));
  if (grid.dim() != dim) throw std::runtime_error("snapshot: dim does not match points");
  std::vector<double> values(grid.size());
  for (auto& v : values) {
    std::uint64_t bits = 0;
    if (!is.read(reinterpret_cast<char*>(&bits), sizeof bits))
      throw std::runtime_error("snapshot: truncated payload");
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  return ScalarField(std::move(grid), std::move(values));
}

void save_snapshot(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("snapshot: cannot open " + path);
  write_snapshot(os, f);
}

ScalarField load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("snapshot: cannot open " + path);
  return read_snapshot(is);
}

ScalarField random_band_limited(const Grid& grid, std::uint64_t seed, int max_mode,
                                double amplitude) {
  if (max_mode < 1) throw std::invalid_argument("random_band_limited: max_mode must be >= 1");
  for (int a = 0; a < grid.dim(); ++a)
    if (2 * max_mode >= grid.points()[a])
      throw std::invalid_argument("random_band_limited: max_mode not resolved by the grid");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  struct Mode {
    int k[3];
    double c, phi;
  };
  std::vector<Mode> modes;
  const int dim = grid.dim();
  const int span = 2 * max_mode + 1;
  int total = 1;
  for (int a = 0; a < dim; ++a) total *= span;
  for (int m = 0; m < total; ++m) {
    Mode mode{{0, 0, 0}, 0.0, 0.0};
    int rest = m;
    double k2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      mode.k[a] = rest % span - max_mode;
      rest /= span;
      k2 += double(mode.k[a]) * mode.k[a];
    }
    mode.c = coef(rng) / (1.0 + k2);
    mode.phi = phase(rng);
    modes.push_back(mode);
  }
  return ScalarField::from_function(grid, [&](std::span<const double> x) {
    double sum = 0.0;
    for (const auto& mode : modes) {
      double arg = mode.phi;
      for (int a = 0; a < dim; ++a)
        arg += 2.0 * std::numbers::pi * mode.k[a] * x[a] / grid.lengths()[a];
      sum += mode.c * std::cos(arg);
    }
    return amplitude * sum;
  });
}

}  // namespace kgelab
