#pragma once

// Sparse multivariate polynomials with real coefficients.
//
// Terms are keyed by exponent vectors and kept in graded lexicographic
// order (total degree first, then lexicographic on the exponents with the
// first variable most significant among equal-degree monomials ordered
// ascending). Every container and loop in the library that touches
// monomials relies on this ordering being deterministic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace psos {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponent vector alpha in N^n.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::size_t dim) : exps_(dim, 0) {}
  Monomial(std::initializer_list<int> exps) : exps_(exps) { check(); }
  explicit Monomial(std::vector<int> exps) : exps_(std::move(exps)) { check(); }

  static Monomial variable(std::size_t dim, std::size_t index, int power = 1) {
    Monomial m(dim);
    m.exps_.at(index) = power;
    return m;
  }

  std::size_t dim() const { return exps_.size(); }
  int degree() const { return std::accumulate(exps_.begin(), exps_.end(), 0); }
  int operator[](std::size_t i) const { return exps_[i]; }
  const std::vector<int>& exponents() const { return exps_; }
  bool is_constant() const { return degree() == 0; }

  /// Product of monomials (exponent addition).
  Monomial operator*(const Monomial& other) const {
    if (other.dim() != dim()) throw DimensionError("monomial dimension mismatch");
    Monomial out(*this);
    for (std::size_t i = 0; i < exps_.size(); ++i) out.exps_[i] += other.exps_[i];
    return out;
  }

  /// True when every exponent of this monomial is <= the other's.
  bool divides(const Monomial& other) const {
    for (std::size_t i = 0; i < exps_.size(); ++i)
      if (exps_[i] > other.exps_[i]) return false;
    return true;
  }

  bool all_even() const {
    return std::all_of(exps_.begin(), exps_.end(), [](int e) { return e % 2 == 0; });
  }

  /// Indices of variables with a nonzero exponent.
  std::vector<int> support() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < exps_.size(); ++i)
      if (exps_[i] != 0) out.push_back(static_cast<int>(i));
    return out;
  }

  double eval(std::span<const double> point) const {
    double v = 1.0;
    for (std::size_t i = 0; i < exps_.size(); ++i)
      for (int e = 0; e < exps_[i]; ++e) v *= point[i];
    return v;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

  std::string str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < exps_.size(); ++i) os << (i ? "," : "") << exps_[i];
    os << ']';
    return os.str();
  }

 private:
  void check() const {
    for (int e : exps_)
      if (e < 0) throw std::invalid_argument("negative exponent");
  }
  std::vector<int> exps_;
};

/// Graded lexicographic order.
struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    const int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    return a.exponents() < b.exponents();
  }
};

/// Ordered list of monomials covering N^n_d.
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(std::size_t dim, int degree, std::vector<Monomial> monos)
      : dim_(dim), degree_(degree), monos_(std::move(monos)) {}

  std::size_t dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return monos_.size(); }
  const Monomial& operator[](std::size_t i) const { return monos_[i]; }
  auto begin() const { return monos_.begin(); }
  auto end() const { return monos_.end(); }
  const std::vector<Monomial>& monomials() const { return monos_; }

 private:
  std::size_t dim_ = 0;
  int degree_ = 0;
  std::vector<Monomial> monos_;
};

namespace detail {

inline void compositions(std::size_t dim, int total, std::size_t pos, std::vector<int>& cur,
                         std::vector<Monomial>& out) {
  if (pos + 1 == dim) {
    cur[pos] = total;
    out.emplace_back(cur);
    return;
  }
  // Ascending lexicographic order within a fixed degree: small leading exponents first.
  for (int e = 0; e <= total; ++e) {
    cur[pos] = e;
    compositions(dim, total - e, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace detail

/// All exponent vectors with total degree <= degree, in grlex order.
inline MonomialBasis basis(std::size_t dim, int degree) {
  if (dim == 0) throw std::invalid_argument("basis: dimension must be positive");
  if (degree < 0) throw std::invalid_argument("basis: degree must be nonnegative");
  std::vector<Monomial> out;
  std::vector<int> cur(dim, 0);
  for (int d = 0; d <= degree; ++d) detail::compositions(dim, d, 0, cur, out);
  return MonomialBasis(dim, degree, std::move(out));
}

/// Basis over a subset of variables, embedded in the ambient dimension.
inline MonomialBasis basis(std::size_t ambient_dim, int degree, std::span<const int> vars) {
  if (vars.empty()) {
    return MonomialBasis(ambient_dim, degree, {Monomial(ambient_dim)});
  }
  const MonomialBasis local = basis(vars.size(), degree);
  std::vector<Monomial> out;
  out.reserve(local.size());
  for (const Monomial& m : local) {
    std::vector<int> e(ambient_dim, 0);
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (vars[i] < 0 || static_cast<std::size_t>(vars[i]) >= ambient_dim)
        throw std::out_of_range("basis: variable index out of range");
      e[static_cast<std::size_t>(vars[i])] = m[i];
    }
    out.emplace_back(std::move(e));
  }
  return MonomialBasis(ambient_dim, degree, std::move(out));
}

/// binomial(n, k) as a size; used for cardinality checks.
inline std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GrlexLess>;

  Polynomial() = default;
  explicit Polynomial(std::size_t dim) : dim_(dim) {}

  static Polynomial constant(std::size_t dim, double c) {
    Polynomial p(dim);
    p.add_term(Monomial(dim), c);
    return p;
  }
  static Polynomial variable(std::size_t dim, std::size_t index) {
    Polynomial p(dim);
    p.add_term(Monomial::variable(dim, index), 1.0);
    return p;
  }
  static Polynomial monomial(const Monomial& m, double c = 1.0) {
    Polynomial p(m.dim());
    p.add_term(m, c);
    return p;
  }

  std::size_t dim() const { return dim_; }
  const TermMap& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  /// Adds c * m; a resulting exact zero removes the term.
  void add_term(const Monomial& m, double c) {
    if (m.dim() != dim_) throw DimensionError("term dimension mismatch");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }

  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  double max_abs_coeff() const {
    double v = 0.0;
    for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
    return v;
  }

  /// Variables appearing with a nonzero exponent in some term.
  std::vector<int> support() const {
    std::vector<bool> used(dim_, false);
    for (const auto& [m, c] : terms_)
      for (int v : m.support()) used[static_cast<std::size_t>(v)] = true;
    std::vector<int> out;
    for (std::size_t i = 0; i < dim_; ++i)
      if (used[i]) out.push_back(static_cast<int>(i));
    return out;
  }

  double eval(std::span<const double> point) const {
    if (point.size() != dim_) throw DimensionError("eval: point dimension mismatch");
    double s = 0.0;
    for (const auto& [m, c] : terms_) s += c * m.eval(point);
    return s;
  }
  double operator()(std::span<const double> point) const { return eval(point); }
  double operator()(std::initializer_list<double> point) const {
    return eval(std::span<const double>(point.begin(), point.size()));
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_dim(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check_dim(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_dim(b);
    Polynomial out(a.dim_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
    return out;
  }

  Polynomial pow(int e) const {
    if (e < 0) throw std::invalid_argument("negative power");
    Polynomial out = constant(dim_, 1.0);
    for (int i = 0; i < e; ++i) out = out * *this;
    return out;
  }

  /// Partial derivative with respect to variable `var`.
  Polynomial derivative(std::size_t var) const {
    if (var >= dim_) throw std::out_of_range("derivative: variable index out of range");
    Polynomial out(dim_);
    for (const auto& [m, c] : terms_) {
      if (m[var] == 0) continue;
      std::vector<int> e = m.exponents();
      const int k = e[var]--;
      out.add_term(Monomial(std::move(e)), c * k);
    }
    return out;
  }

  /// Drops terms with |coefficient| <= threshold. Only meant for solver output.
  Polynomial cleaned(double threshold = 1e-12) const {
    Polynomial out(dim_);
    for (const auto& [m, c] : terms_)
      if (std::abs(c) > threshold) out.terms_.emplace(m, c);
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << (c < 0 ? " - " : " + ");
      else if (c < 0) os << "-";
      first = false;
      os << std::abs(c);
      for (std::size_t i = 0; i < m.dim(); ++i) {
        if (m[i] == 0) continue;
        os << "*x" << (i + 1);
        if (m[i] > 1) os << '^' << m[i];
      }
    }
    return os.str();
  }

 private:
  void check_dim(const Polynomial& o) const {
    if (o.dim_ != dim_) throw DimensionError("polynomial dimension mismatch");
  }

  std::size_t dim_ = 0;
  TermMap terms_;
};

/// Views p(u_1..u_k) as a polynomial in a larger ring where u_i becomes
/// variable source_dims[i]. Indices must be strictly increasing.
inline Polynomial embed(const Polynomial& p, std::span<const int> source_dims, std::size_t target_dim) {
  if (source_dims.size() != p.dim())
    throw DimensionError("embed: index list length must equal polynomial dimension");
  for (std::size_t i = 0; i < source_dims.size(); ++i) {
    if (source_dims[i] < 0 || static_cast<std::size_t>(source_dims[i]) >= target_dim)
      throw std::out_of_range("embed: index out of range");
    if (i > 0 && source_dims[i] <= source_dims[i - 1])
      throw std::invalid_argument("embed: indices must be strictly increasing");
  }
  Polynomial out(target_dim);
  for (const auto& [m, c] : p.terms()) {
    std::vector<int> e(target_dim, 0);
    for (std::size_t i = 0; i < source_dims.size(); ++i) e[static_cast<std::size_t>(source_dims[i])] = m[i];
    out.add_term(Monomial(std::move(e)), c);
  }
  return out;
}

inline Polynomial embed(const Polynomial& p, std::initializer_list<int> source_dims, std::size_t target_dim) {
  return embed(p, std::span<const int>(source_dims.begin(), source_dims.size()), target_dim);
}

/// Substitutes x_i -> shift_i + scale_i * x_i.
inline Polynomial compose_affine(const Polynomial& p, std::span<const double> shift, std::span<const double> scale) {
  const std::size_t n = p.dim();
  if (shift.size() != n || scale.size() != n) throw DimensionError("compose_affine: dimension mismatch");
  std::vector<Polynomial> lin;
  lin.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    lin.push_back(Polynomial::constant(n, shift[i]) + scale[i] * Polynomial::variable(n, i));
  // Cache powers per variable.
  std::vector<std::vector<Polynomial>> powers(n);
  Polynomial out(n);
  for (const auto& [m, c] : p.terms()) {
    Polynomial t = Polynomial::constant(n, c);
    for (std::size_t i = 0; i < n; ++i) {
      if (m[i] == 0) continue;
      auto& pw = powers[i];
      if (pw.empty()) pw.push_back(Polynomial::constant(n, 1.0));
      while (pw.size() <= static_cast<std::size_t>(m[i])) pw.push_back(pw.back() * lin[i]);
      t = t * pw[static_cast<std::size_t>(m[i])];
    }
    out += t;
  }
  return out;
}

}  // namespace psos
