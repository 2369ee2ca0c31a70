// SPDX-License-Identifier: Apache-2.0
// Discrete measures shared by the mixing machinery: weighted atoms in C^2,
// optionally with the exact one-step pushforward permutation (periodic
// ensembles), so composition with f^n is an index shift instead of a
// numerically drifting orbit.

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "henonlab/grid.hpp"
#include "henonlab/observable.hpp"
#include "henonlab/sampler.hpp"

namespace henonlab {

struct DiscreteMeasure {
  std::vector<std::array<double, 4>> atoms;  // (Re x, Im x, Re y, Im y)
  std::vector<double> weight;                // normalized to total 1
  std::vector<std::int32_t> next;            // exact cycle pushforward, or empty
  std::string descriptor;

  std::size_t size() const { return atoms.size(); }
  bool exact_cycles() const { return !next.empty(); }
};

/// Uniform weights on all period-n points; exactly invariant by construction.
inline DiscreteMeasure ensemble_measure(const PeriodicEnsemble& ens, bool allow_incomplete = false) {
  if (!ens.complete && !allow_incomplete)
    throw std::runtime_error("ensemble_measure: ensemble incomplete (override to force)");
  DiscreteMeasure m;
  std::size_t total = ens.total_points();
  if (total == 0) throw std::runtime_error("ensemble_measure: empty ensemble");
  double w = 1.0 / double(total);
  for (const auto& orbit : ens.orbits) {
    std::int32_t base = std::int32_t(m.atoms.size());
    int p = int(orbit.points.size());
    for (int j = 0; j < p; ++j) {
      const auto& q = orbit.points[std::size_t(j)];
      m.atoms.push_back({q[0], 0.0, q[1], 0.0});
      m.weight.push_back(w);
      m.next.push_back(base + std::int32_t((j + 1) % p));
    }
  }
  m.descriptor = "periodic:" + std::to_string(ens.period);
  return m;
}

/// Atoms at the centers of cells carrying mass; weights renormalized to 1.
inline DiscreteMeasure atoms_from_cells(const CellMeasure& cm, double mass_floor = 0.0) {
  DiscreteMeasure m;
  double total = 0.0;
  for (std::size_t i = 0; i < cm.mass.size(); ++i) {
    if (cm.mass[i] > mass_floor) total += cm.mass[i];
  }
  if (!(total > 0.0)) throw std::runtime_error("atoms_from_cells: no mass above floor");
  for (std::size_t i = 0; i < cm.mass.size(); ++i) {
    if (cm.mass[i] > mass_floor) {
      m.atoms.push_back(cm.grid.center(cm.grid.unflatten(i)));
      m.weight.push_back(cm.mass[i] / total);
    }
  }
  m.descriptor = "grid";
  return m;
}

/// Plane observables read the real section (Re x, Re y) of an atom.
inline double observe(const Observable& phi, const std::array<double, 4>& atom) {
  return phi(std::array<double, 2>{atom[0], atom[2]});
}

inline double measure_mean(const DiscreteMeasure& m, const Observable& phi) {
  std::vector<double> terms(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) terms[i] = m.weight[i] * observe(phi, m.atoms[i]);
  return pairwise_sum(terms);
}

}  // namespace henonlab
