#include "mems/report.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace mems {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError("cannot parse " + what + " from '" + s + "'");
  }
}

}  // namespace

TouchdownRow touchdown_row(const TouchdownReport& r) {
  TouchdownRow row;
  row.eps = r.eps;
  row.N = r.N;
  row.t_touch = r.touched ? r.t_touch : r.t_final;
  for (const auto& p : r.points) row.points.push_back(p.point);
  row.u_min = r.min_u;
  return row;
}

void write_touchdown_header(std::ostream& out) {
  out << "# mems-touchdown v1\n";
  out << "eps,N,t_touch,n_points,x_i,y_i,u_min\n";
}

void write_touchdown_row(std::ostream& out, const TouchdownRow& row) {
  std::ostringstream xs, ys;
  xs << std::setprecision(10);
  ys << std::setprecision(10);
  for (size_t k = 0; k < row.points.size(); ++k) {
    if (k) {
      xs << ';';
      ys << ';';
    }
    xs << row.points[k].x();
    ys << row.points[k].y();
  }
  out << std::setprecision(10) << row.eps << ',' << row.N << ',' << row.t_touch << ',' << row.points.size() << ','
      << xs.str() << ',' << ys.str() << ',' << row.u_min << '\n';
}

std::vector<TouchdownRow> read_touchdown_csv(std::istream& in) {
  std::vector<TouchdownRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("eps,", 0) != 0) throw DomainError("touchdown table: missing header line");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 7) throw DomainError("touchdown table: expected 7 columns in '" + line + "'");
    TouchdownRow r;
    r.eps = to_double(f[0], "eps");
    r.N = static_cast<int>(to_double(f[1], "N"));
    r.t_touch = to_double(f[2], "t_touch");
    const int n = static_cast<int>(to_double(f[3], "n_points"));
    const auto xs = f[4].empty() ? std::vector<std::string>{} : split(f[4], ';');
    const auto ys = f[5].empty() ? std::vector<std::string>{} : split(f[5], ';');
    if (static_cast<int>(xs.size()) != n || static_cast<int>(ys.size()) != n)
      throw DomainError("touchdown table: point count mismatch in '" + line + "'");
    for (int k = 0; k < n; ++k) r.points.emplace_back(to_double(xs[k], "x"), to_double(ys[k], "y"));
    r.u_min = to_double(f[6], "u_min");
    rows.push_back(std::move(r));
  }
  if (!header) throw DomainError("touchdown table: empty input");
  return rows;
}

void write_troughs_csv(std::ostream& out, const TouchdownReport& r) {
  out << "# mems-troughs v1\n";
  out << "eps,x,y,u,touchdown\n";
  out << std::setprecision(10);
  for (const auto& t : r.troughs) {
    bool td = false;
    for (const auto& p : r.points) td = td || p.vertex == t.vertex;
    out << r.eps << ',' << t.point.x() << ',' << t.point.y() << ',' << t.value << ',' << (td ? 1 : 0) << '\n';
  }
}

std::vector<double> parse_eps_list(const std::string& spec) {
  std::vector<double> out;
  const auto range = split(spec, ':');
  if (range.size() == 3) {
    const double lo = to_double(range[0], "eps"), hi = to_double(range[1], "eps");
    const int n = static_cast<int>(to_double(range[2], "count"));
    if (n < 1 || !(lo > 0.0) || !(hi > 0.0)) throw DomainError("eps range needs lo, hi > 0 and n >= 1");
    for (int k = 0; k < n; ++k)
      out.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
  } else {
    for (const auto& s : split(spec, ',')) out.push_back(to_double(s, "eps"));
  }
  if (out.empty()) throw DomainError("empty eps list");
  for (double e : out)
    if (!(e > 0.0)) throw DomainError("eps values must be positive");
  return out;
}

}  // namespace mems
