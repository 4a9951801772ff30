#pragma once

#include <iosfwd>
#include <string>

#include "rlop/mdp.hpp"

namespace rlop {

// Self-describing text format for finite MDPs.
//
//   rlop-mdp 1
//   n_states <int>
//   n_actions <int>
//   gamma <double>
//   transition
//   <s> <a> <s'> <p>      (one quadruple per line; omitted entries are 0)
//   end
//   reward
//   <s> <a> <s'> <r>
//   end
//
// '#' starts a comment that runs to end of line. Doubles are written with 17
// significant digits, so save followed by load reproduces every value
// bit-for-bit.

std::string format_double(double value); // %.17g, shared by all writers

void save_mdp(const Mdp& m, std::ostream& out);
void save_mdp_file(const Mdp& m, const std::string& path);

// Throws std::runtime_error with a line-numbered message on malformed input
// and on MDPs that fail validate_mdp.
Mdp load_mdp(std::istream& in);
Mdp load_mdp_file(const std::string& path);

} // namespace rlop
