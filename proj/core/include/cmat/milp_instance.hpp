#pragma once

#include <map>
#include <string>
#include <vector>

namespace cmat {

enum class VarKind { continuous, integer, binary };

enum class RowSense { le, ge, eq };

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lb = 0.0;
  double ub = 0.0;
};

struct RowTerm {
  int var = 0;  ///< column index
  double coeff = 0.0;
};

struct Row {
  std::string name;
  std::vector<RowTerm> terms;
  RowSense sense = RowSense::eq;
  double rhs = 0.0;
};

/// A mixed-integer program in minimize form. Columns double as role
/// indices: solutions are plain vectors aligned with variables().
class MilpInstance {
 public:
  std::string name;

  /// Adds a column and returns its index. Names must be unique and bounds
  /// ordered; binaries get their bounds clipped to [0, 1].
  int add_variable(const std::string& name, VarKind kind, double lb, double ub);

  void add_row(const std::string& name, std::vector<RowTerm> terms,
               RowSense sense, double rhs);

  int index_of(const std::string& var_name) const;  ///< throws if unknown
  bool has_variable(const std::string& var_name) const;

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }

  std::vector<double>& objective() { return objective_; }
  const std::vector<double>& objective() const { return objective_; }
  void set_objective(int var, double coeff);
  double objective_constant = 0.0;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  std::vector<double> objective_;
  std::map<std::string, int> index_;
};

double eval_row(const Row& row, const std::vector<double>& x);

double eval_objective(const MilpInstance& mi, const std::vector<double>& x);

/// True when x meets every bound, row and integrality requirement.
bool satisfies(const MilpInstance& mi, const std::vector<double>& x,
               double row_tol = 1e-6, double int_tol = 1e-6);

/// Names of violated rows/bounds, for diagnostics. Empty means feasible.
std::vector<std::string> violations(const MilpInstance& mi,
                                    const std::vector<double>& x,
                                    double row_tol = 1e-6,
                                    double int_tol = 1e-6);

}  // namespace cmat
