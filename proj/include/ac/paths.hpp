#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ac/calibrate.hpp"
#include "ac/energy.hpp"
#include "ac/epsilon.hpp"
#include "ac/hypersurface.hpp"
#include "ac/metric.hpp"

namespace ac {

// One leg of the sweep. Parameters are strictly increasing; consecutive
// fields stay within delta_path in L2(dvol) (the builder doubles the sample
// count until they do). Every sample keeps its energy report; the fields
// themselves are decimated to at most 64 per leg, always retaining the first
// and last verbatim so consecutive legs weld bitwise.
struct PathSegment {
  std::string label;
  std::vector<double> params;
  std::vector<EnergyReport> energies;
  std::vector<double> tangential;      // tangential share of the gradient term
  std::vector<std::size_t> stored_at;  // sample indices of the retained fields
  std::vector<Field> fields;
  double bound = 0.0;  // leading cap the leg is reported against
  double max_energy = 0.0;
  double max_step_l2 = 0.0;
  double delta_path = 0.0;       // 0.05 sqrt(vol N)
  double max_even_defect = 0.0;  // reflection defect about the section
};

struct CompositePath {
  std::vector<PathSegment> segments;
  double max_energy = 0.0;
  double sigma_gap = 0.0;  // 2 area(M) - max_energy
  Field final_field;
};

// Hole function: the double transition over the section, collapsed over the
// excised ball. All constructions below require an admissible eps (checked
// against the calibrated margins; pass force to bypass) and a vertical-profile
// metric.
Field build_f(const Hypersurface& S, const Metric& m, const CalibratedConstants& cc,
              const UnstableRegion& ur, Epsilon eps, bool force = false);

// u = -1 to f, sliding the collapse offset back from full depth. f must come
// from build_f on the same data.
PathSegment slide_to_minus_one(const Field& f, const Hypersurface& S, const Metric& m,
                               const CalibratedConstants& cc, const UnstableRegion& ur,
                               Epsilon eps, bool force = false);

// f to the punctured pair of graphs shifted by t0 * phi_tilde.
PathSegment open_graph_deformation(const Field& f, const Hypersurface& S, const Metric& m,
                                   const CalibratedConstants& cc, const UnstableRegion& ur,
                                   Epsilon eps, bool force = false);

// Fill the hole back in over the shifted slab. g must be the final field of
// open_graph_deformation.
PathSegment close_hole(const Field& g, const Hypersurface& S, const Metric& m,
                       const CalibratedConstants& cc, const UnstableRegion& ur, Epsilon eps,
                       bool force = false);

// Slide both sheets out to the mean-convex tube boundary. g must be the final
// field of close_hole; the last field is the endpoint h, +1 across the c0
// tube.
PathSegment push_out(const Field& g, const Hypersurface& S, const Metric& m,
                     const CalibratedConstants& cc, const UnstableRegion& ur, Epsilon eps,
                     bool force = false);

// All four legs, welded bitwise, starting at u = -1 exactly.
CompositePath composite_path(const Hypersurface& S, const Metric& m,
                             const CalibratedConstants& cc, const UnstableRegion& ur,
                             Epsilon eps, bool force = false);

struct Barrier {
  Field field;
  double mu = 0.0;                     // 2 sup |first variation of the barrier|
  double min_negative_gradient = 0.0;  // nodewise floor of the perturbed descent direction
};

// Static barrier under the pushed endpoint h: the profile across the slab of
// semi-width z0 * eta. Throws when m <= h fails nodewise or the perturbed
// descent direction loses positivity.
Barrier build_barrier(const Field& h, const Hypersurface& S, const Metric& m,
                      const CalibratedConstants& cc, const UnstableRegion& ur, Epsilon eps,
                      bool force = false);

// Per-sample table for one leg: energy, running max, and margin against the
// leg's cap.
struct SegmentProfile {
  std::vector<double> param;
  std::vector<double> energy;
  std::vector<double> running_max;
  std::vector<double> margin;
};

SegmentProfile profile_energy(const PathSegment& seg);

}  // namespace ac
