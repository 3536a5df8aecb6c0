#pragma once

#include <iosfwd>
#include <string>

#include "pdmp/sim.hpp"

namespace pdmp {

/// Delimited trajectory format, version 1:
///
///   # pdmpnet-trajectory v1
///   # model=<id> seed=<seed> n=<n> t_end=<t_end>
///   record,t,i,j,xi,amount,x1,...,xn
///   init,0,,,,,<x0>
///   event,<t>,<i>,<j>,<xi>,<amount>,<post-event state>
///   sample,<t>,,,,,<state>
///
/// Patch indices are 1-based; reals are written with 17 significant digits so
/// reading back restores every double exactly.
void write_trajectory(std::ostream& os, const Trajectory& traj);
std::string trajectory_to_string(const Trajectory& traj);

/// Throws ConfigError on a malformed or wrong-version file.
Trajectory read_trajectory(std::istream& is);
Trajectory read_trajectory_file(const std::string& path);
void write_trajectory_file(const std::string& path, const Trajectory& traj);

}  // namespace pdmp
