#include "coopsym/problems.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "coopsym/error.hpp"

namespace coopsym {

std::string to_string(Tag tag) {
  switch (tag) {
    case Tag::GradientType: return "gradient_type";
    case Tag::HamiltonianType: return "hamiltonian_type";
    case Tag::ConvexDerivatives: return "convex_derivatives";
    case Tag::RadialWeight: return "radial_weight";
  }
  return "unknown";
}

double signed_power(double s, double p) {
  return std::pow(std::abs(s), p - 1.0) * s;
}

double signed_power_derivative(double s, double p) {
  // std::pow(0, 0) == 1 gives the p == 1 convention; p > 1 yields 0 at s = 0.
  return p * std::pow(std::abs(s), p - 1.0);
}

namespace {

class PowerNonlinearity final : public Nonlinearity {
 public:
  PowerNonlinearity(double p, double q, double alpha, double beta)
      : p_(p), q_(q), alpha_(alpha), beta_(beta) {}

  int components() const override { return 2; }

  void F(double r, std::span<const double> u, std::span<double> out) const override {
    out[0] = weight(r, alpha_) * signed_power(u[1], p_);
    out[1] = weight(r, beta_) * signed_power(u[0], q_);
  }

  void J(double r, std::span<const double> u, std::span<double> out) const override {
    out[0] = 0.0;
    out[1] = weight(r, alpha_) * signed_power_derivative(u[1], p_);
    out[2] = weight(r, beta_) * signed_power_derivative(u[0], q_);
    out[3] = 0.0;
  }

 private:
  static double weight(double r, double exponent) { return exponent == 0.0 ? 1.0 : std::pow(r, exponent); }

  double p_, q_, alpha_, beta_;
};

class LaneEmdenNonlinearity final : public Nonlinearity {
 public:
  explicit LaneEmdenNonlinearity(double p) : p_(p) {}
  int components() const override { return 1; }
  void F(double, std::span<const double> u, std::span<double> out) const override {
    out[0] = signed_power(u[0], p_);
  }
  void J(double, std::span<const double> u, std::span<double> out) const override {
    out[0] = signed_power_derivative(u[0], p_);
  }

 private:
  double p_;
};

class LinearNonlinearity final : public Nonlinearity {
 public:
  explicit LinearNonlinearity(Eigen::MatrixXd a) : a_(std::move(a)) {}
  int components() const override { return static_cast<int>(a_.rows()); }
  void F(double, std::span<const double> u, std::span<double> out) const override {
    const int m = components();
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < m; ++j) s -= a_(i, j) * u[j];
      out[i] = s;
    }
  }
  void J(double, std::span<const double>, std::span<double> out) const override {
    const int m = components();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) out[i * m + j] = -a_(i, j);
  }

 private:
  Eigen::MatrixXd a_;
};

void check_finite(double r, std::span<const double> u) {
  if (!std::isfinite(r) || r < 0.0) throw InvalidArgument("radius must be finite and nonnegative");
  for (double v : u)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite state passed to a nonlinearity");
}

void require_exponent(double p, const char* name) {
  if (!std::isfinite(p) || p < 1.0)
    throw InvalidArgument(std::string("exponent ") + name + " must be >= 1");
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

Problem::Problem(std::string name, std::map<std::string, double> params,
                 std::shared_ptr<const Nonlinearity> impl, std::set<Tag> tags,
                 std::vector<std::string> notes)
    : name_(std::move(name)),
      m_(impl->components()),
      params_(std::move(params)),
      impl_(std::move(impl)),
      tags_(std::move(tags)),
      notes_(std::move(notes)) {}

void Problem::eval_F(double r, std::span<const double> u, std::span<double> out) const {
  if (static_cast<int>(u.size()) != m_ || static_cast<int>(out.size()) != m_)
    throw InvalidArgument("state size does not match component count");
  check_finite(r, u);
  impl_->F(r, u, out);
}

void Problem::eval_J(double r, std::span<const double> u, std::span<double> out) const {
  if (static_cast<int>(u.size()) != m_ || static_cast<int>(out.size()) != m_ * m_)
    throw InvalidArgument("state size does not match component count");
  check_finite(r, u);
  impl_->J(r, u, out);
}

Eigen::VectorXd Problem::eval_F(double r, const Eigen::VectorXd& u) const {
  Eigen::VectorXd out(m_);
  eval_F(r, std::span<const double>(u.data(), u.size()), std::span<double>(out.data(), m_));
  return out;
}

Eigen::MatrixXd Problem::eval_J(double r, const Eigen::VectorXd& u) const {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(m_, m_);
  eval_J(r, std::span<const double>(u.data(), u.size()), std::span<double>(out.data(), m_ * m_));
  return out;
}

bool sample_convex_derivatives(const Nonlinearity& f, int samples, double tol, std::uint64_t seed) {
  const int m = f.components();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radius(0.05, 2.0);
  std::uniform_real_distribution<double> state(-2.0, 2.0);
  std::vector<double> a(m), b(m), mid(m), ja(m * m), jb(m * m), jm(m * m);
  for (int s = 0; s < samples; ++s) {
    const double r = radius(rng);
    for (int k = 0; k < m; ++k) {
      a[k] = state(rng);
      b[k] = state(rng);
      mid[k] = 0.5 * (a[k] + b[k]);
    }
    f.J(r, a, ja);
    f.J(r, b, jb);
    f.J(r, mid, jm);
    for (int k = 0; k < m * m; ++k) {
      const double chord = 0.5 * (ja[k] + jb[k]);
      if (jm[k] > chord + tol * (1.0 + std::abs(chord))) return false;
    }
  }
  return true;
}

namespace {

std::set<Tag> with_convexity(std::set<Tag> tags, const Nonlinearity& f) {
  if (sample_convex_derivatives(f)) tags.insert(Tag::ConvexDerivatives);
  return tags;
}

std::vector<std::string> exponent_notes(std::initializer_list<double> exponents) {
  std::vector<std::string> notes;
  for (double e : exponents)
    if (e < 2.0) {
      notes.push_back("exponent " + fmt(e) +
                      " < 2: J_F is only Holder continuous at zeros, outside the "
                      "smoothness the symmetry hypotheses assume");
      break;
    }
  return notes;
}

}  // namespace

Problem power_system(double p, double q) {
  require_exponent(p, "p");
  require_exponent(q, "q");
  auto impl = std::make_shared<PowerNonlinearity>(p, q, 0.0, 0.0);
  auto tags = with_convexity({Tag::HamiltonianType}, *impl);
  return Problem("power", {{"p", p}, {"q", q}}, impl, tags, exponent_notes({p, q}));
}

Problem scalar_lane_emden(double p) {
  require_exponent(p, "p");
  auto impl = std::make_shared<LaneEmdenNonlinearity>(p);
  auto tags = with_convexity({Tag::GradientType}, *impl);
  return Problem("lane_emden", {{"p", p}}, impl, tags, exponent_notes({p}));
}

Problem henon(double p, double q, double alpha, double beta) {
  require_exponent(p, "p");
  require_exponent(q, "q");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw InvalidArgument("Henon weights need alpha, beta >= 0");
  auto impl = std::make_shared<PowerNonlinearity>(p, q, alpha, beta);
  std::set<Tag> tags{Tag::HamiltonianType};
  if (alpha != 0.0 || beta != 0.0) tags.insert(Tag::RadialWeight);
  tags = with_convexity(tags, *impl);
  return Problem("henon", {{"p", p}, {"q", q}, {"alpha", alpha}, {"beta", beta}}, impl, tags,
                 exponent_notes({p, q}));
}

Problem linear_constant(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() < 1) throw InvalidArgument("linear problem needs a square matrix");
  if (!a.allFinite()) throw InvalidArgument("linear problem matrix must be finite");
  const int m = static_cast<int>(a.rows());
  std::map<std::string, double> params{{"m", m}};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) params["a" + std::to_string(i + 1) + std::to_string(j + 1)] = a(i, j);
  auto impl = std::make_shared<LinearNonlinearity>(a);
  std::set<Tag> tags;
  if ((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0) tags.insert(Tag::GradientType);
  tags = with_convexity(tags, *impl);
  return Problem("linear", params, impl, tags);
}

namespace {

double param(const std::map<std::string, double>& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) throw InvalidArgument("missing problem parameter '" + key + "'");
  return it->second;
}

double param_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

Problem make_problem(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "power") return power_system(param(params, "p"), param(params, "q"));
  if (name == "lane_emden") return scalar_lane_emden(param(params, "p"));
  if (name == "henon")
    return henon(param(params, "p"), param(params, "q"), param_or(params, "alpha", 0.0),
                 param_or(params, "beta", 0.0));
  if (name == "linear") {
    const double mv = param(params, "m");
    if (mv < 1 || mv > 9 || mv != std::floor(mv)) throw InvalidArgument("linear problem needs integer m in [1, 9]");
    const int m = static_cast<int>(mv);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = param_or(params, "a" + std::to_string(i + 1) + std::to_string(j + 1), 0.0);
    return linear_constant(a);
  }
  throw InvalidArgument("unknown problem '" + name + "'");
}

std::vector<CatalogEntry> catalog() {
  return {
      {"power", {"p", "q"}, "-Delta u1 = |u2|^{p-1} u2, -Delta u2 = |u1|^{q-1} u1"},
      {"lane_emden", {"p"}, "-Delta z = |z|^{p-1} z"},
      {"henon", {"p", "q", "alpha", "beta"}, "-Delta u1 = r^alpha |u2|^{p-1} u2, -Delta u2 = r^beta |u1|^{q-1} u1"},
      {"linear", {"m", "a11", "a12", "..."}, "-Delta U = -A U (testing)"},
  };
}

}  // namespace coopsym
