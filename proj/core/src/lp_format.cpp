#include <cmat/lp_format.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cmat {

namespace {

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> sanitized_names(const MilpInstance& mi) {
  std::vector<std::string> out;
  std::set<std::string> used;
  out.reserve(mi.variables().size());
  for (const auto& v : mi.variables()) {
    std::string s;
    for (char c : v.name) {
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
        s += c;
      } else if (c == ']') {
        // closing bracket carries no information once '[' became '_'
      } else {
        s += '_';
      }
    }
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) {
      s = "x" + s;
    }
    std::string candidate = s;
    int k = 1;
    while (!used.insert(candidate).second) {
      candidate = s + "_" + std::to_string(k++);
    }
    out.push_back(candidate);
  }
  return out;
}

void append_terms(std::ostream& os, const std::vector<RowTerm>& terms,
                  const std::vector<std::string>& names) {
  int on_line = 0;
  bool first = true;
  for (const auto& t : terms) {
    if (t.coeff == 0.0) continue;
    double mag = t.coeff < 0 ? -t.coeff : t.coeff;
    if (first) {
      if (t.coeff < 0) os << "- ";
      first = false;
    } else {
      os << (t.coeff < 0 ? " - " : " + ");
    }
    if (mag != 1.0) os << fmt_num(mag) << " ";
    os << names[static_cast<std::size_t>(t.var)];
    if (++on_line % 8 == 0) os << "\n   ";
  }
  if (first) os << "0 " << names[0];
}

}  // namespace

std::string to_lp_format(const MilpInstance& mi) {
  if (mi.variables().empty()) {
    throw std::invalid_argument("to_lp_format: empty instance");
  }
  const auto names = sanitized_names(mi);
  std::ostringstream os;
  os << "\\ " << (mi.name.empty() ? "milp" : mi.name) << "\n";
  os << "Minimize\n obj: ";
  std::vector<RowTerm> obj_terms;
  for (std::size_t j = 0; j < mi.objective().size(); ++j) {
    obj_terms.push_back(RowTerm{static_cast<int>(j), mi.objective()[j]});
  }
  append_terms(os, obj_terms, names);
  if (mi.objective_constant != 0.0) {
    os << (mi.objective_constant < 0 ? " - " : " + ")
       << fmt_num(std::abs(mi.objective_constant));
  }
  os << "\nSubject To\n";
  std::set<std::string> row_names;
  for (const auto& row : mi.rows()) {
    std::string rn;
    for (char c : row.name) {
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
        rn += c;
      } else if (c != ']') {
        rn += '_';
      }
    }
    if (rn.empty() || !std::isalpha(static_cast<unsigned char>(rn[0]))) {
      rn = "r" + rn;
    }
    std::string candidate = rn;
    int k = 1;
    while (!row_names.insert(candidate).second) {
      candidate = rn + "_" + std::to_string(k++);
    }
    os << " " << candidate << ": ";
    append_terms(os, row.terms, names);
    switch (row.sense) {
      case RowSense::le: os << " <= "; break;
      case RowSense::ge: os << " >= "; break;
      case RowSense::eq: os << " = "; break;
    }
    os << fmt_num(row.rhs) << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < mi.variables().size(); ++j) {
    const auto& v = mi.variables()[j];
    if (v.lb == v.ub) {
      os << " " << names[j] << " = " << fmt_num(v.lb) << "\n";
    } else {
      os << " " << fmt_num(v.lb) << " <= " << names[j] << " <= "
         << fmt_num(v.ub) << "\n";
    }
  }
  bool any_general = false;
  bool any_binary = false;
  for (const auto& v : mi.variables()) {
    any_general |= v.kind == VarKind::integer;
    any_binary |= v.kind == VarKind::binary;
  }
  if (any_general) {
    os << "Generals\n";
    for (std::size_t j = 0; j < mi.variables().size(); ++j) {
      if (mi.variables()[j].kind == VarKind::integer) {
        os << " " << names[j] << "\n";
      }
    }
  }
  if (any_binary) {
    os << "Binaries\n";
    for (std::size_t j = 0; j < mi.variables().size(); ++j) {
      if (mi.variables()[j].kind == VarKind::binary) {
        os << " " << names[j] << "\n";
      }
    }
  }
  os << "End\n";
  return os.str();
}

void write_lp_file(const MilpInstance& mi, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  out << to_lp_format(mi);
}

}  // namespace cmat
