#pragma once

// Conic programs over the zero, nonnegative, second-order and exponential
// cones, plus a homogeneous self-dual interior-point solver.
//
// Standard form (minimization):
//
//   minimize    c'x + c0
//   subject to  A x = b
//               G x + s = h,   s in K = K_1 x ... x K_m
//
// The exponential cone is K_exp = cl{(u, v, w) : v > 0, v exp(u/v) <= w}.
// Second-order blocks are (t, x) with ||x||_2 <= t.

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace rsma::conic {

/// Sparse affine function of the program variables.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)

  static AffineExpr variable(int index, double coef = 1.0);

  AffineExpr& add_term(int index, double coef);
  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);
  AffineExpr& operator*=(double scale);

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }
  double evaluate(const Eigen::VectorXd& x) const;
  double max_abs_coefficient() const;

  // Merges duplicate indices and drops exact zeros.
  AffineExpr& compress();

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a);
AffineExpr operator*(double s, AffineExpr a);
AffineExpr operator*(AffineExpr a, double s);

enum class ConeKind { nonnegative, second_order, exponential };

struct ConeBlock {
  ConeKind kind = ConeKind::nonnegative;
  int size = 0;
};

/// Row of a sparse matrix together with its right-hand side.
struct SparseRow {
  std::vector<std::pair<int, double>> entries;
  double rhs = 0.0;
};

class ConicProgram {
 public:
  int add_variable(std::string name = {});
  int num_variables() const { return static_cast<int>(names_.size()); }
  const std::string& variable_name(int index) const { return names_.at(index); }

  /// Sets the objective to minimize.
  void minimize(const AffineExpr& objective);
  /// Sets the objective to maximize; the solver still minimizes the negation,
  /// objective values reported by solve() refer to the minimized form.
  void maximize(const AffineExpr& objective);

  void add_equality(const AffineExpr& expr);             // expr == 0
  void add_nonnegative(const AffineExpr& expr);          // expr >= 0
  void add_less_equal(const AffineExpr& lhs, const AffineExpr& rhs);  // lhs <= rhs
  /// rows[0] >= ||rows[1..]||_2. Needs at least two rows.
  void add_second_order(const std::vector<AffineExpr>& rows);
  /// (u, v, w) in K_exp.
  void add_exponential(const AffineExpr& u, const AffineExpr& v, const AffineExpr& w);

  // Standard-form data.
  const std::vector<double>& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }
  bool is_maximization() const { return maximize_; }
  const std::vector<SparseRow>& equality_rows() const { return eq_rows_; }
  const std::vector<SparseRow>& cone_rows() const { return cone_rows_; }
  const std::vector<ConeBlock>& cone_blocks() const { return blocks_; }
  int num_cone_rows() const { return static_cast<int>(cone_rows_.size()); }

  /// Throws std::invalid_argument if any index is out of range or a block is
  /// malformed.
  void validate() const;

  /// Sparse triplet dump:
  ///   line 1: "conic n=<vars> p=<eq rows> m=<cone rows>"
  ///   "c <col> <value>", "c0 <value>"
  ///   "A <row> <col> <value>", "b <row> <value>"
  ///   "G <row> <col> <value>", "h <row> <value>"
  ///   "K <l|q|e> <size>" per block in order.
  std::string dump() const;

 private:
  void push_cone_row(const AffineExpr& slack);
  void check_expr(const AffineExpr& expr) const;

  std::vector<std::string> names_;
  std::vector<double> objective_;
  double objective_constant_ = 0.0;
  bool maximize_ = false;
  std::vector<SparseRow> eq_rows_;
  std::vector<SparseRow> cone_rows_;
  std::vector<ConeBlock> blocks_;
};

/// Appends one exponential-cone block encoding t <= ln(x) (and x > 0).
/// The argument is rescaled by its largest coefficient so that the block stays
/// well conditioned; the shift ln(scale) moves onto t.
void add_log_lower_bound(ConicProgram& program, const AffineExpr& t, const AffineExpr& x);

struct QuadTerm {
  double coef = 0.0;  // must be >= 0
  AffineExpr expr;
};

/// Appends one second-order block encoding sum_i coef_i * expr_i^2 <= rhs via
/// the rotated-cone identity 4 q <= (r + 1)^2 - (r - 1)^2. Both sides are
/// divided by `scale` first; 0 picks the largest coefficient. Callers that know
/// the typical value of rhs should pass it.
/// Throws std::invalid_argument on a negative coefficient or scale.
void add_quadratic_upper_bound(ConicProgram& program, const std::vector<QuadTerm>& terms,
                               const AffineExpr& rhs, double scale = 0.0);

// ---------------------------------------------------------------------------

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

std::string to_string(SolveStatus status);

struct SolverSettings {
  double tol = 1e-8;
  int max_iters = 150;
  // Neighbourhood widths for the predictor and for accepting a corrected point.
  double predictor_neighbourhood = 0.8;
  double corrector_neighbourhood = 0.45;
  int max_correctors = 4;
  bool equilibrate = true;
  bool verbose = false;
};

struct Residuals {
  double primal = 0.0;  // relative ||Ax - b||, ||Gx + s - h||
  double dual = 0.0;    // relative ||A'y + G'z + c||
  double gap = 0.0;     // relative |primal obj - dual obj|
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd primal;      // x
  Eigen::VectorXd slack;       // s
  Eigen::VectorXd dual_eq;     // y, one per equality row
  Eigen::VectorXd dual_cone;   // z, one per cone row
  double objective_value = 0.0;       // c'x + c0 of the minimized form
  double dual_objective_value = 0.0;  // -b'y - h'z + c0
  int iterations = 0;
  Residuals residuals;
  std::string message;

  bool optimal() const { return status == SolveStatus::optimal; }
};

/// Solves the program. Infeasibility and unboundedness are reported through
/// status (with certificates in dual_* / primal respectively), never thrown.
ConicSolution solve(const ConicProgram& program, const SolverSettings& settings = {});

}  // namespace rsma::conic
