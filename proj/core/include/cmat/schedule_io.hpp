#pragma once

#include <cmat/baselines.hpp>
#include <cmat/schedule.hpp>

#include <filesystem>
#include <string>
#include <variant>

namespace cmat {

/// Either controller the simulator accepts.
using Controller = std::variant<CyclicSchedule, SignalPlan>;

/// Schedule files are JSON, one controller per file.
///
/// Common envelope:
///   format   "cmat-schedule"
///   version  1
///   type     "cyclic" | "fixed_time"
///   params   { v_f, l, tau_f, tau_c, tau_star, lambda, c_bar }
///
/// type "cyclic" carries the CyclicSchedule fields:
///   cycle      seconds
///   movements  { id: { red, green, platoon, offset, occupancy } }
///   nodes      { id: { first, second, tau_lead, tau_wrap, z } }
///   arrivals   { movement id: { node id: seconds } }
///
/// type "fixed_time" carries the SignalPlan fields:
///   cycle          seconds
///   intersections  [ { id, offset, nodes: [...],
///                      phases: [ { movements: [...], green, lost } ] } ]
///
/// Numbers are written with enough digits to parse back bit-identical, so a
/// write/read cycle is lossless.

std::string to_json(const CyclicSchedule& s);
std::string to_json(const SignalPlan& p);

/// Parses one controller from JSON text. Throws std::invalid_argument naming
/// the first missing or ill-typed field.
Controller controller_from_json(const std::string& text);

/// Writes `c` to `file`, replacing any previous content. Throws
/// std::runtime_error when the file cannot be written.
void write_controller(const Controller& c, const std::filesystem::path& file);

/// Reads one controller back. Throws std::invalid_argument on unreadable
/// files or invalid content.
Controller read_controller(const std::filesystem::path& file);

}  // namespace cmat
