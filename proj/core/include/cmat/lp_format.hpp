#pragma once

#include <cmat/milp_instance.hpp>

#include <string>

namespace cmat {

/// Renders the instance in CPLEX LP text format (Minimize / Subject To /
/// Bounds / Generals / Binaries). Names are sanitized to the LP character
/// set and uniquified if sanitizing collides.
std::string to_lp_format(const MilpInstance& mi);

void write_lp_file(const MilpInstance& mi, const std::string& path);

}  // namespace cmat
