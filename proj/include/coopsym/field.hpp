#pragma once

#include <span>
#include <vector>

#include "coopsym/grid.hpp"

namespace coopsym {

/// m-component grid function.  Storage is component-major, then radial-major:
/// index = c * node_count + i * ntheta + j.
class VectorField {
 public:
  VectorField() = default;
  VectorField(GridPtr grid, int components);
  VectorField(GridPtr grid, int components, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int components() const { return m_; }
  int node_count() const { return grid_->node_count(); }
  size_t size() const { return data_.size(); }

  double& at(int c, int node) { return data_[static_cast<size_t>(c) * node_count() + node]; }
  double at(int c, int node) const { return data_[static_cast<size_t>(c) * node_count() + node]; }

  std::span<double> component(int c);
  std::span<const double> component(int c) const;

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Node values of all components gathered at one node.
  void gather(int node, std::span<double> out) const;

  double max_abs() const;
  /// sqrt(sum_c sum_n w_n v^2)
  double weighted_norm() const;
  double weighted_dot(const VectorField& other) const;
  bool all_finite() const;

  /// Field composed with a node permutation: out(n) = this(perm[n]).
  VectorField permuted(const std::vector<int>& perm) const;
  /// Copy with every node outside `region` set to zero.
  VectorField restricted(const Region& region) const;

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s);

 private:
  GridPtr grid_;
  int m_ = 0;
  std::vector<double> data_;
};

VectorField operator-(VectorField a, const VectorField& b);

/// One m x m matrix per node (row-major blocks, node-major storage).  Carries
/// potentials D(x), Jacobians J_F(|x|, U(x)) and reflection coefficients.
struct MatrixField {
  int nodes = 0;
  int m = 0;
  std::vector<double> values;

  MatrixField() = default;
  MatrixField(int node_count, int components)
      : nodes(node_count), m(components), values(static_cast<size_t>(node_count) * components * components, 0.0) {}

  std::span<double> at(int node) {
    return std::span<double>(values).subspan(static_cast<size_t>(node) * m * m, m * m);
  }
  std::span<const double> at(int node) const {
    return std::span<const double>(values).subspan(static_cast<size_t>(node) * m * m, m * m);
  }
  double operator()(int node, int i, int j) const { return values[(static_cast<size_t>(node) * m + i) * m + j]; }
  double& operator()(int node, int i, int j) { return values[(static_cast<size_t>(node) * m + i) * m + j]; }

  /// Pointwise (D + D^t) / 2.
  MatrixField symmetrized() const;
  MatrixField negated() const;
};

}  // namespace coopsym
