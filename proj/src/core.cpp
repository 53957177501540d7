#include "gdsa/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace gdsa {

DimensionMismatch::DimensionMismatch(std::size_t expected, std::size_t actual,
                                     const std::string& where)
    : std::invalid_argument(
          fmt::format("{}: dimension mismatch (expected {}, got {})", where, expected, actual)) {}

bool Vector::is_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Vector& Vector::operator+=(const Vector& rhs) {
  require_same_dim(*this, rhs, "Vector::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& rhs) {
  require_same_dim(*this, rhs, "Vector::operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Vector& Vector::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

Vector operator+(Vector lhs, const Vector& rhs) { return lhs += rhs; }
Vector operator-(Vector lhs, const Vector& rhs) { return lhs -= rhs; }
Vector operator-(Vector v) { return v *= -1.0; }
Vector operator*(double s, Vector v) { return v *= s; }
Vector operator*(Vector v, double s) { return v *= s; }

void require_same_dim(const Vector& x, const Vector& y, const char* where) {
  if (x.size() != y.size()) throw DimensionMismatch(x.size(), y.size(), where);
}

double inner(const Vector& x, const Vector& y) {
  require_same_dim(x, y, "inner");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum;
}

double squared_norm(const Vector& x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return sum;
}

double norm(const Vector& x) { return std::sqrt(squared_norm(x)); }

// Squaring makes the sign of each difference irrelevant, so operand order never
// changes the result.
double squared_distance(const Vector& x, const Vector& y) {
  require_same_dim(x, y, "distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return sum;
}

double distance(const Vector& x, const Vector& y) { return std::sqrt(squared_distance(x, y)); }

double dist_to_point_set(const Vector& x, std::span<const Vector> sample) {
  if (sample.empty()) throw std::invalid_argument("dist_to_point_set: empty sample");
  double best = std::numeric_limits<double>::infinity();
  for (const Vector& y : sample) best = std::min(best, distance(x, y));
  return best;
}

Vector axpy(const Vector& x, double s, const Vector& d) {
  require_same_dim(x, d, "axpy");
  Vector out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * d[i];
  return out;
}

void Tolerances::validate() const {
  if (!(eq_tol > 0 && conv_tol > 0 && slack_tol > 0 && subgrad_zero_tol > 0)) {
    throw std::invalid_argument("tolerances must be strictly positive");
  }
  if (!(slack_tol <= eq_tol && eq_tol <= conv_tol)) {
    throw std::invalid_argument("tolerances must satisfy slack_tol <= eq_tol <= conv_tol");
  }
}

double Rng::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(engine_);
}

double Rng::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

Vector Rng::uniform_box(const Vector& center, double half_width) {
  Vector out(center.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = uniform(center[i] - half_width, center[i] + half_width);
  }
  return out;
}

Vector Rng::unit_vector(std::size_t dim) {
  for (;;) {
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = normal();
    const double n = norm(v);
    if (n > 1e-12) return v *= (1.0 / n);
  }
}

}  // namespace gdsa
