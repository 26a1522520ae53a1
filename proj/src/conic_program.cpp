#include "rsma/conic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rsma::conic {

AffineExpr AffineExpr::variable(int index, double coef) {
  AffineExpr e;
  e.add_term(index, coef);
  return e;
}

AffineExpr& AffineExpr::add_term(int index, double coef) {
  if (coef != 0.0) terms_.emplace_back(index, coef);
  return *this;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  constant_ += other.constant_;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) {
  for (const auto& [i, v] : other.terms_) terms_.emplace_back(i, -v);
  constant_ -= other.constant_;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double scale) {
  for (auto& t : terms_) t.second *= scale;
  constant_ *= scale;
  return *this;
}

double AffineExpr::evaluate(const Eigen::VectorXd& x) const {
  double v = constant_;
  for (const auto& [i, c] : terms_) v += c * x(i);
  return v;
}

double AffineExpr::max_abs_coefficient() const {
  double m = std::abs(constant_);
  for (const auto& t : terms_) m = std::max(m, std::abs(t.second));
  return m;
}

AffineExpr& AffineExpr::compress() {
  std::map<int, double> acc;
  for (const auto& [i, v] : terms_) acc[i] += v;
  terms_.clear();
  for (const auto& [i, v] : acc) {
    if (v != 0.0) terms_.emplace_back(i, v);
  }
  return *this;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator-(AffineExpr a) { return a *= -1.0; }
AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
AffineExpr operator*(AffineExpr a, double s) { return a *= s; }

// ---------------------------------------------------------------------------

int ConicProgram::add_variable(std::string name) {
  const int index = num_variables();
  if (name.empty()) name = "x" + std::to_string(index);
  names_.push_back(std::move(name));
  objective_.push_back(0.0);
  return index;
}

void ConicProgram::check_expr(const AffineExpr& expr) const {
  for (const auto& [i, v] : expr.terms()) {
    if (i < 0 || i >= num_variables()) {
      throw std::invalid_argument("conic: expression references undeclared variable " +
                                  std::to_string(i));
    }
    if (!std::isfinite(v)) throw std::invalid_argument("conic: non-finite coefficient");
  }
  if (!std::isfinite(expr.constant())) throw std::invalid_argument("conic: non-finite constant");
}

void ConicProgram::minimize(const AffineExpr& objective) {
  check_expr(objective);
  std::fill(objective_.begin(), objective_.end(), 0.0);
  for (const auto& [i, v] : objective.terms()) objective_[i] += v;
  objective_constant_ = objective.constant();
  maximize_ = false;
}

void ConicProgram::maximize(const AffineExpr& objective) {
  minimize(-objective);
  maximize_ = true;
}

void ConicProgram::add_equality(const AffineExpr& expr) {
  check_expr(expr);
  AffineExpr e = expr;
  e.compress();
  SparseRow row;
  row.entries = e.terms();
  row.rhs = -e.constant();
  eq_rows_.push_back(std::move(row));
}

void ConicProgram::push_cone_row(const AffineExpr& slack) {
  // s = a'x + c0  ->  G row = -a, h = c0.
  check_expr(slack);
  AffineExpr e = slack;
  e.compress();
  SparseRow row;
  for (const auto& [i, v] : e.terms()) row.entries.emplace_back(i, -v);
  row.rhs = e.constant();
  cone_rows_.push_back(std::move(row));
}

void ConicProgram::add_nonnegative(const AffineExpr& expr) {
  push_cone_row(expr);
  if (!blocks_.empty() && blocks_.back().kind == ConeKind::nonnegative) {
    ++blocks_.back().size;
  } else {
    blocks_.push_back({ConeKind::nonnegative, 1});
  }
}

void ConicProgram::add_less_equal(const AffineExpr& lhs, const AffineExpr& rhs) {
  add_nonnegative(rhs - lhs);
}

void ConicProgram::add_second_order(const std::vector<AffineExpr>& rows) {
  if (rows.size() < 2) throw std::invalid_argument("conic: second-order block needs >= 2 rows");
  for (const auto& r : rows) push_cone_row(r);
  blocks_.push_back({ConeKind::second_order, static_cast<int>(rows.size())});
}

void ConicProgram::add_exponential(const AffineExpr& u, const AffineExpr& v, const AffineExpr& w) {
  push_cone_row(u);
  push_cone_row(v);
  push_cone_row(w);
  blocks_.push_back({ConeKind::exponential, 3});
}

void ConicProgram::validate() const {
  int rows = 0;
  for (const auto& b : blocks_) {
    if (b.size <= 0) throw std::invalid_argument("conic: empty cone block");
    if (b.kind == ConeKind::exponential && b.size != 3) {
      throw std::invalid_argument("conic: exponential block must have length 3");
    }
    if (b.kind == ConeKind::second_order && b.size < 2) {
      throw std::invalid_argument("conic: second-order block must have length >= 2");
    }
    rows += b.size;
  }
  if (rows != num_cone_rows()) throw std::invalid_argument("conic: cone rows/blocks mismatch");
  auto check_rows = [&](const std::vector<SparseRow>& rs) {
    for (const auto& r : rs) {
      for (const auto& [i, v] : r.entries) {
        if (i < 0 || i >= num_variables() || !std::isfinite(v)) {
          throw std::invalid_argument("conic: malformed row entry");
        }
      }
      if (!std::isfinite(r.rhs)) throw std::invalid_argument("conic: non-finite right-hand side");
    }
  };
  check_rows(eq_rows_);
  check_rows(cone_rows_);
}

std::string ConicProgram::dump() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "conic n=" << num_variables() << " p=" << eq_rows_.size() << " m=" << cone_rows_.size()
     << "\n";
  for (int j = 0; j < num_variables(); ++j) {
    if (objective_[j] != 0.0) os << "c " << j << " " << objective_[j] << "\n";
  }
  os << "c0 " << objective_constant_ << "\n";
  for (std::size_t r = 0; r < eq_rows_.size(); ++r) {
    for (const auto& [j, v] : eq_rows_[r].entries) os << "A " << r << " " << j << " " << v << "\n";
    os << "b " << r << " " << eq_rows_[r].rhs << "\n";
  }
  for (std::size_t r = 0; r < cone_rows_.size(); ++r) {
    for (const auto& [j, v] : cone_rows_[r].entries) os << "G " << r << " " << j << " " << v << "\n";
    os << "h " << r << " " << cone_rows_[r].rhs << "\n";
  }
  for (const auto& b : blocks_) {
    const char tag = b.kind == ConeKind::nonnegative ? 'l' : b.kind == ConeKind::second_order ? 'q' : 'e';
    os << "K " << tag << " " << b.size << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

void add_log_lower_bound(ConicProgram& program, const AffineExpr& t, const AffineExpr& x) {
  const double scale = x.max_abs_coefficient();
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("add_log_lower_bound: argument expression is identically zero");
  }
  // e^t <= x  <=>  e^(t - ln S) <= x / S.
  program.add_exponential(t - AffineExpr(std::log(scale)), AffineExpr(1.0), (1.0 / scale) * x);
}

void add_quadratic_upper_bound(ConicProgram& program, const std::vector<QuadTerm>& terms,
                               const AffineExpr& rhs, double scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("add_quadratic_upper_bound: bad scale");
  }
  const bool automatic = scale == 0.0;
  if (automatic) scale = rhs.max_abs_coefficient();
  for (const auto& q : terms) {
    if (!(q.coef >= 0.0)) {
      throw std::invalid_argument("add_quadratic_upper_bound: negative coefficient");
    }
    const double m = q.expr.max_abs_coefficient();
    if (automatic) scale = std::max(scale, q.coef * m * m);
  }
  if (!(scale > 0.0)) scale = 1.0;
  // sum (c/S) e^2 <= r/S  <=>  ||(2 sqrt(c/S) e, r/S - 1)|| <= r/S + 1.
  const AffineExpr r = (1.0 / scale) * rhs;
  std::vector<AffineExpr> rows;
  rows.reserve(terms.size() + 2);
  rows.push_back(r + AffineExpr(1.0));
  for (const auto& q : terms) {
    if (q.coef == 0.0) continue;
    rows.push_back((2.0 * std::sqrt(q.coef / scale)) * q.expr);
  }
  rows.push_back(r - AffineExpr(1.0));
  program.add_second_order(rows);
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

}  // namespace rsma::conic
