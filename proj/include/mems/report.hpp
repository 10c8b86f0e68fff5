#pragma once

#include "mems/simulation.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mems {

/// One row of the touchdown table. Point coordinates are stored as ';'-separated lists
/// in the x_i and y_i columns so that the schema has a fixed width.
struct TouchdownRow {
  double eps = 0.0;
  int N = 0;
  double t_touch = 0.0;
  std::vector<Vec2> points;
  double u_min = 0.0;
};

TouchdownRow touchdown_row(const TouchdownReport& r);
void write_touchdown_header(std::ostream& out);
void write_touchdown_row(std::ostream& out, const TouchdownRow& row);
/// Parses a table written by the functions above; throws DomainError on malformed input.
std::vector<TouchdownRow> read_touchdown_csv(std::istream& in);

/// Troughs (all local minima below the trough level) as CSV.
void write_troughs_csv(std::ostream& out, const TouchdownReport& r);

/// Accepts "a,b,c", a single value, or "lo:hi:n" (n values spaced geometrically).
std::vector<double> parse_eps_list(const std::string& spec);

}  // namespace mems
