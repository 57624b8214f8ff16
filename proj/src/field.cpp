#include "coopsym/field.hpp"

#include <cmath>

#include "coopsym/error.hpp"

namespace coopsym {

VectorField::VectorField(GridPtr grid, int components)
    : grid_(std::move(grid)), m_(components), data_(static_cast<size_t>(components) * grid_->node_count(), 0.0) {
  if (components < 1) throw InvalidArgument("a field needs at least one component");
}

VectorField::VectorField(GridPtr grid, int components, std::vector<double> values)
    : grid_(std::move(grid)), m_(components), data_(std::move(values)) {
  if (components < 1) throw InvalidArgument("a field needs at least one component");
  if (data_.size() != static_cast<size_t>(components) * grid_->node_count())
    throw InvalidArgument("field value count does not match grid and component count");
}

std::span<double> VectorField::component(int c) {
  return std::span<double>(data_).subspan(static_cast<size_t>(c) * node_count(), node_count());
}

std::span<const double> VectorField::component(int c) const {
  return std::span<const double>(data_).subspan(static_cast<size_t>(c) * node_count(), node_count());
}

void VectorField::gather(int node, std::span<double> out) const {
  for (int c = 0; c < m_; ++c) out[c] = at(c, node);
}

double VectorField::max_abs() const {
  double v = 0.0;
  for (double x : data_) v = std::max(v, std::abs(x));
  return v;
}

double VectorField::weighted_dot(const VectorField& other) const {
  if (other.size() != size()) throw InvalidArgument("field shape mismatch");
  const auto& w = grid_->cell_weights;
  double s = 0.0;
  for (int c = 0; c < m_; ++c)
    for (int n = 0; n < node_count(); ++n) s += w[n] * at(c, n) * other.at(c, n);
  return s;
}

double VectorField::weighted_norm() const {
  return std::sqrt(weighted_dot(*this));
}

bool VectorField::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

VectorField VectorField::permuted(const std::vector<int>& perm) const {
  VectorField out(grid_, m_);
  for (int c = 0; c < m_; ++c)
    for (int n = 0; n < node_count(); ++n) out.at(c, n) = at(c, perm[n]);
  return out;
}

VectorField VectorField::restricted(const Region& region) const {
  VectorField out(*this);
  for (int c = 0; c < m_; ++c)
    for (int n = 0; n < node_count(); ++n)
      if (!region.contains(n)) out.at(c, n) = 0.0;
  return out;
}

VectorField& VectorField::operator+=(const VectorField& other) {
  if (other.size() != size()) throw InvalidArgument("field shape mismatch");
  for (size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  if (other.size() != size()) throw InvalidArgument("field shape mismatch");
  for (size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

VectorField operator-(VectorField a, const VectorField& b) {
  a -= b;
  return a;
}

MatrixField MatrixField::symmetrized() const {
  MatrixField out(nodes, m);
  for (int n = 0; n < nodes; ++n)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) out(n, i, j) = 0.5 * ((*this)(n, i, j) + (*this)(n, j, i));
  return out;
}

MatrixField MatrixField::negated() const {
  MatrixField out(*this);
  for (double& v : out.values) v = -v;
  return out;
}

}  // namespace coopsym
