#include <cmat/milp_instance.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmat {

int MilpInstance::add_variable(const std::string& name, VarKind kind,
                               double lb, double ub) {
  if (kind == VarKind::binary) {
    lb = std::max(lb, 0.0);
    ub = std::min(ub, 1.0);
  }
  if (lb > ub) {
    throw std::invalid_argument("variable " + name + ": lb > ub");
  }
  if (!index_.emplace(name, static_cast<int>(vars_.size())).second) {
    throw std::invalid_argument("duplicate variable name: " + name);
  }
  vars_.push_back(Variable{name, kind, lb, ub});
  objective_.push_back(0.0);
  return static_cast<int>(vars_.size()) - 1;
}

void MilpInstance::add_row(const std::string& name, std::vector<RowTerm> terms,
                           RowSense sense, double rhs) {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= static_cast<int>(vars_.size())) {
      throw std::out_of_range("row " + name + ": bad column index");
    }
  }
  rows_.push_back(Row{name, std::move(terms), sense, rhs});
}

int MilpInstance::index_of(const std::string& var_name) const {
  auto it = index_.find(var_name);
  if (it == index_.end()) {
    throw std::out_of_range("no variable named " + var_name);
  }
  return it->second;
}

bool MilpInstance::has_variable(const std::string& var_name) const {
  return index_.count(var_name) != 0;
}

void MilpInstance::set_objective(int var, double coeff) {
  objective_.at(static_cast<std::size_t>(var)) = coeff;
}

double eval_row(const Row& row, const std::vector<double>& x) {
  double v = 0.0;
  for (const auto& t : row.terms) {
    v += t.coeff * x[static_cast<std::size_t>(t.var)];
  }
  return v;
}

double eval_objective(const MilpInstance& mi, const std::vector<double>& x) {
  double v = mi.objective_constant;
  const auto& c = mi.objective();
  for (std::size_t j = 0; j < c.size(); ++j) v += c[j] * x[j];
  return v;
}

std::vector<std::string> violations(const MilpInstance& mi,
                                    const std::vector<double>& x,
                                    double row_tol, double int_tol) {
  std::vector<std::string> out;
  if (x.size() != mi.variables().size()) {
    out.push_back("solution size mismatch");
    return out;
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& v = mi.variables()[j];
    if (x[j] < v.lb - row_tol || x[j] > v.ub + row_tol) {
      out.push_back("bound " + v.name);
    }
    if (v.kind != VarKind::continuous &&
        std::abs(x[j] - std::round(x[j])) > int_tol) {
      out.push_back("integrality " + v.name);
    }
  }
  for (const auto& row : mi.rows()) {
    double lhs = eval_row(row, x);
    bool ok = true;
    switch (row.sense) {
      case RowSense::le: ok = lhs <= row.rhs + row_tol; break;
      case RowSense::ge: ok = lhs >= row.rhs - row_tol; break;
      case RowSense::eq: ok = std::abs(lhs - row.rhs) <= row_tol; break;
    }
    if (!ok) out.push_back("row " + row.name);
  }
  return out;
}

bool satisfies(const MilpInstance& mi, const std::vector<double>& x,
               double row_tol, double int_tol) {
  return violations(mi, x, row_tol, int_tol).empty();
}

}  // namespace cmat
