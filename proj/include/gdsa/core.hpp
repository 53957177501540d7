// Dense vectors, tolerances and seeded sampling shared by every gdsa module.
#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdsa {

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual, const std::string& where);
};

/// Fixed-dimension real vector with value semantics.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  static Vector zeros(std::size_t dim) { return Vector(dim, 0.0); }

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool is_finite() const noexcept;

  Vector& operator+=(const Vector& rhs);
  Vector& operator-=(const Vector& rhs);
  Vector& operator*=(double s) noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector lhs, const Vector& rhs);
Vector operator-(Vector lhs, const Vector& rhs);
Vector operator-(Vector v);
Vector operator*(double s, Vector v);
Vector operator*(Vector v, double s);

/// Throws DimensionMismatch unless both operands have the same dimension.
void require_same_dim(const Vector& x, const Vector& y, const char* where);

double inner(const Vector& x, const Vector& y);
double norm(const Vector& x);
double squared_norm(const Vector& x);
/// norm(x - y), computed so that distance(x, y) == distance(y, x) bit for bit.
double distance(const Vector& x, const Vector& y);
double squared_distance(const Vector& x, const Vector& y);
/// Minimum distance from x to a finite, nonempty point sample.
double dist_to_point_set(const Vector& x, std::span<const Vector> sample);

/// x + s * d
Vector axpy(const Vector& x, double s, const Vector& d);

struct Tolerances {
  double eq_tol = 1e-10;
  double conv_tol = 1e-8;
  double slack_tol = 1e-12;
  double subgrad_zero_tol = 1e-12;

  /// Throws std::invalid_argument on non-positive values or a broken ordering.
  void validate() const;
};

/// Seeded source of samples. Every random draw in the library goes through one of these.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  double uniform(double lo, double hi);
  double normal();
  /// Uniform point of the box center + [-half_width, half_width]^n.
  Vector uniform_box(const Vector& center, double half_width);
  /// Uniformly distributed direction on the unit sphere.
  Vector unit_vector(std::size_t dim);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace gdsa
