#include "mudra/md/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mudra::md {

namespace {

std::pair<std::size_t, std::size_t> ordered(std::size_t a, std::size_t b) { return {std::min(a, b), std::max(a, b)}; }

[[noreturn]] void fail_line(std::size_t lineno, const std::string &what) {
  throw TopologyError("topology line " + std::to_string(lineno) + ": " + what);
}

} // namespace

bool Topology::excluded(std::size_t a, std::size_t b) const {
  return std::binary_search(exclusions.begin(), exclusions.end(), ordered(a, b));
}

void Topology::derive_exclusions() {
  exclusions.clear();
  for (const auto &b : bonds) {
    exclusions.push_back(ordered(b.i, b.j));
  }
  for (const auto &a : angles) {
    exclusions.push_back(ordered(a.i, a.k));
  }
  std::sort(exclusions.begin(), exclusions.end());
  exclusions.erase(std::unique(exclusions.begin(), exclusions.end()), exclusions.end());
}

void Topology::validate() const {
  const auto n = n_atoms();
  if (n == 0) {
    throw TopologyError("topology has no atoms");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(masses[i] > 0.0) || !std::isfinite(masses[i])) {
      throw TopologyError("atom " + std::to_string(i) + " has non-positive mass");
    }
  }
  for (const auto &b : bonds) {
    if (b.i >= n || b.j >= n) {
      throw TopologyError("bond index out of range");
    }
    if (b.i == b.j) {
      throw TopologyError("bond joins atom " + std::to_string(b.i) + " to itself");
    }
    if (!(b.r0 > 0.0) || !(b.k >= 0.0)) {
      throw TopologyError("bond needs r0 > 0 and k >= 0");
    }
  }
  for (const auto &a : angles) {
    if (a.i >= n || a.j >= n || a.k >= n) {
      throw TopologyError("angle index out of range");
    }
    if (a.i == a.j || a.j == a.k || a.i == a.k) {
      throw TopologyError("angle atoms must be distinct");
    }
    if (!(a.k_theta >= 0.0)) {
      throw TopologyError("angle needs k_theta >= 0");
    }
  }
  if (!(lj.sigma > 0.0) || !(lj.epsilon >= 0.0) || !(lj.cutoff >= lj.sigma)) {
    throw TopologyError("lj needs sigma > 0, epsilon >= 0, cutoff >= sigma");
  }
  for (const auto &[a, b] : exclusions) {
    if (a >= n || b >= n || a >= b) {
      throw TopologyError("exclusion pair must be ordered and in range");
    }
  }
}

Topology build_chain(std::size_t n, const ChainParams &p) {
  if (n < 2) {
    throw TopologyError("a chain needs at least 2 beads");
  }
  Topology top;
  top.masses.assign(n, p.mass);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    top.bonds.push_back({i, i + 1, p.r0, p.k_bond});
  }
  for (std::size_t i = 0; i + 2 < n; ++i) {
    top.angles.push_back({i, i + 1, i + 2, p.theta0, p.k_theta});
  }
  top.lj = {p.epsilon, p.sigma, p.cutoff};
  top.derive_exclusions();
  top.validate();
  return top;
}

std::vector<Vec3> zigzag_chain(std::size_t n, const ChainParams &p) {
  const double dx = p.r0 * std::sin(p.theta0 / 2.0);
  const double dy = p.r0 * std::cos(p.theta0 / 2.0);
  std::vector<Vec3> pos(n);
  const double x0 = -0.5 * dx * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = {x0 + dx * static_cast<double>(i), (i % 2 == 0 ? -0.5 : 0.5) * dy, 0.0};
  }
  return pos;
}

Topology read_topology(std::istream &in) {
  Topology top;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  bool have_lj = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) {
      continue;
    }
    if (first.front() == '[') {
      if (first != "[atoms]" && first != "[bonds]" && first != "[angles]" && first != "[lj]") {
        fail_line(lineno, "unknown section " + first);
      }
      section = first;
      continue;
    }
    ss.clear();
    ss.str(line);
    std::string extra;
    if (section == "[atoms]") {
      std::size_t idx = 0;
      double mass = 0.0;
      if (!(ss >> idx >> mass) || (ss >> extra)) {
        fail_line(lineno, "expected: index mass");
      }
      if (idx != top.masses.size()) {
        fail_line(lineno, "atom indices must be consecutive from 0");
      }
      top.masses.push_back(mass);
    } else if (section == "[bonds]") {
      Bond b;
      if (!(ss >> b.i >> b.j >> b.r0 >> b.k) || (ss >> extra)) {
        fail_line(lineno, "expected: i j r0 k");
      }
      top.bonds.push_back(b);
    } else if (section == "[angles]") {
      Angle a;
      if (!(ss >> a.i >> a.j >> a.k >> a.theta0 >> a.k_theta) || (ss >> extra)) {
        fail_line(lineno, "expected: i j k theta0 ktheta");
      }
      top.angles.push_back(a);
    } else if (section == "[lj]") {
      if (!(ss >> top.lj.epsilon >> top.lj.sigma >> top.lj.cutoff) || (ss >> extra)) {
        fail_line(lineno, "expected: epsilon sigma cutoff");
      }
      have_lj = true;
    } else {
      fail_line(lineno, "data outside a section");
    }
  }
  if (!have_lj) {
    throw TopologyError("topology is missing the [lj] section");
  }
  top.derive_exclusions();
  top.validate();
  return top;
}

Topology load_topology(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw TopologyError("cannot open topology file " + path);
  }
  return read_topology(in);
}

void write_topology(std::ostream &out, const Topology &top) {
  char buf[160];
  out << "[atoms]\n";
  for (std::size_t i = 0; i < top.n_atoms(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu %.17g\n", i, top.masses[i]);
    out << buf;
  }
  out << "[bonds]\n";
  for (const auto &b : top.bonds) {
    std::snprintf(buf, sizeof buf, "%zu %zu %.17g %.17g\n", b.i, b.j, b.r0, b.k);
    out << buf;
  }
  out << "[angles]\n";
  for (const auto &a : top.angles) {
    std::snprintf(buf, sizeof buf, "%zu %zu %zu %.17g %.17g\n", a.i, a.j, a.k, a.theta0, a.k_theta);
    out << buf;
  }
  out << "[lj]\n";
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", top.lj.epsilon, top.lj.sigma, top.lj.cutoff);
  out << buf;
}

} // namespace mudra::md
