#ifndef KGELAB_GRID_FIELDS_HPP
#define KGELAB_GRID_FIELDS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgelab {

/// Raised when an operation receives a non-finite field or mismatched grids.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Periodic box [-L/2, L/2)^dim sampled on a uniform tensor grid.
///
/// The box stands in for R^n; results depend on the box size and it is the
/// caller's job to check convergence under enlargement.
class Grid {
public:
  /// Default cap on the number of grid points (2^24 doubles per field).
  static constexpr std::size_t kDefaultMaxPoints = std::size_t{1} << 24;

  Grid(std::vector<int> points, std::vector<double> lengths,
       std::size_t max_points = kDefaultMaxPoints);

  /// Uniform grid: same count and length on every axis.
  static Grid cube(int dim, int points, double length);

  int dim() const { return static_cast<int>(points_.size()); }
  const std::vector<int>& points() const { return points_; }
  const std::vector<double>& lengths() const { return lengths_; }
  double spacing(int axis) const { return lengths_[axis] / points_[axis]; }
  std::size_t size() const { return size_; }
  double cell_volume() const;
  double volume() const;

  /// Physical coordinate of index i along the axis; the box is centred at 0.
  double coordinate(int axis, int i) const {
    return -0.5 * lengths_[axis] + i * spacing(axis);
  }

  bool operator==(const Grid& other) const {
    return points_ == other.points_ && lengths_ == other.lengths_;
  }

private:
  std::vector<int> points_;
  std::vector<double> lengths_;
  std::size_t size_ = 0;
};

/// Real samples of one field on a Grid, row-major over axes.
class ScalarField {
public:
  explicit ScalarField(Grid grid);
  ScalarField(Grid grid, std::vector<double> values);

  /// Samples f(x) at every grid point; x has grid.dim() entries.
  static ScalarField from_function(
      const Grid& grid, const std::function<double(std::span<const double>)>& f);
  static ScalarField constant(const Grid& grid, double value);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Set when the field left the representable range (blow-up terminal state).
  bool overflowed() const { return overflowed_; }
  void mark_overflowed() { overflowed_ = true; }

  bool all_finite() const;
  double sup_norm() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);

private:
  Grid grid_;
  std::vector<double> values_;
  bool overflowed_ = false;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
/// Pointwise product.
ScalarField hadamard(const ScalarField& a, const ScalarField& b);
/// a + s*b without a temporary.
ScalarField axpy(const ScalarField& a, double s, const ScalarField& b);

/// Throws DomainError unless both fields live on identical grids.
void require_same_grid(const ScalarField& a, const ScalarField& b);

/// Periodic spectral Laplacian.
ScalarField laplacian(const ScalarField& f);

/// Spectral partial derivative along one axis; the Nyquist mode is dropped.
ScalarField partial_derivative(const ScalarField& f, int axis);

/// (-Laplacian + shift)^{-1} f, shift > 0.
ScalarField inverse_helmholtz(const ScalarField& f, double shift);

/// Rectangle-rule integral over the box; +inf for an overflowed field.
double integrate(const ScalarField& f);

/// Integral of a product, fused to avoid a temporary field.
double integrate_product(const ScalarField& a, const ScalarField& b);

/// Integral of |grad f|^2, evaluated in Fourier space via Parseval.
double gradient_norm_sq(const ScalarField& f);

/// Smooth periodic test field: a random cosine series over the wave vectors
/// with |k_i| <= max_mode, coefficients damped by 1/(1+|k|^2). Deterministic
/// for a given seed.
ScalarField random_band_limited(const Grid& grid, std::uint64_t seed, int max_mode = 3,
                                double amplitude = 1.0);

// Snapshot files: one text header line, then little-endian float64 payload.
void write_snapshot(std::ostream& os, const ScalarField& f);
ScalarField read_snapshot(std::istream& is);
void save_snapshot(const std::string& path, const ScalarField& f);
ScalarField load_snapshot(const std::string& path);

}  // namespace kgelab

#endif  // KGELAB_GRID_FIELDS_HPP
