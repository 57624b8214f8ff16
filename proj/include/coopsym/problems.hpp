#pragma once

// Nonlinearities F(|x|, U) of the system -Delta U = F(|x|, U).

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace coopsym {

enum class Tag { GradientType, HamiltonianType, ConvexDerivatives, RadialWeight };

std::string to_string(Tag tag);

/// Raw evaluation interface implemented by every catalog entry.  J is written
/// row-major: out[i * m + j] = d f_i / d u_j.
class Nonlinearity {
 public:
  virtual ~Nonlinearity() = default;
  virtual int components() const = 0;
  virtual void F(double r, std::span<const double> u, std::span<double> out) const = 0;
  virtual void J(double r, std::span<const double> u, std::span<double> out) const = 0;
};

class Problem {
 public:
  Problem(std::string name, std::map<std::string, double> params,
          std::shared_ptr<const Nonlinearity> impl, std::set<Tag> tags,
          std::vector<std::string> notes = {});

  const std::string& name() const { return name_; }
  int components() const { return m_; }
  const std::map<std::string, double>& params() const { return params_; }
  const std::set<Tag>& tags() const { return tags_; }
  bool has_tag(Tag t) const { return tags_.count(t) != 0; }
  /// Human-readable remarks, e.g. symmetry hypotheses the parameters violate.
  const std::vector<std::string>& notes() const { return notes_; }
  const Nonlinearity& impl() const { return *impl_; }

  /// Checked evaluation; throws InvalidArgument on non-finite input.
  void eval_F(double r, std::span<const double> u, std::span<double> out) const;
  void eval_J(double r, std::span<const double> u, std::span<double> out) const;

  Eigen::VectorXd eval_F(double r, const Eigen::VectorXd& u) const;
  Eigen::MatrixXd eval_J(double r, const Eigen::VectorXd& u) const;

 private:
  std::string name_;
  int m_;
  std::map<std::string, double> params_;
  std::shared_ptr<const Nonlinearity> impl_;
  std::set<Tag> tags_;
  std::vector<std::string> notes_;
};

/// f1 = |u2|^{p-1} u2, f2 = |u1|^{q-1} u1.
Problem power_system(double p, double q);
/// Scalar -Delta z = |z|^{p-1} z.
Problem scalar_lane_emden(double p);
/// f1 = r^alpha |u2|^{p-1} u2, f2 = r^beta |u1|^{q-1} u1.
Problem henon(double p, double q, double alpha, double beta);
/// F(U) = -A U.
Problem linear_constant(const Eigen::MatrixXd& a);

/// Builds a catalog entry by name ("power", "lane_emden", "henon", "linear").
/// The linear entry reads "m" and one-based entries "a11", "a12", ...
Problem make_problem(const std::string& name, const std::map<std::string, double>& params);

struct CatalogEntry {
  std::string name;
  std::vector<std::string> parameters;
  std::string description;
};
std::vector<CatalogEntry> catalog();

/// Randomized midpoint-convexity test of every d f_i / d u_j in S.
bool sample_convex_derivatives(const Nonlinearity& f, int samples = 1000, double tol = 1e-12,
                               std::uint64_t seed = 0x5eed);

/// |s|^{p-1} s and its derivative p |s|^{p-1} with 0^0 = 1.
double signed_power(double s, double p);
double signed_power_derivative(double s, double p);

}  // namespace coopsym
