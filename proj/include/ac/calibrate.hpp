#pragma once

#include <array>
#include <string>
#include <vector>

#include "ac/distance.hpp"
#include "ac/epsilon.hpp"
#include "ac/jacobi.hpp"

namespace ac {

// Instability certificate around the eta-minimizing point b: the capacity
// test function phi_tilde = eta * (1 - taper(r)) vanishes identically on
// r <= 1.1 R0 (covering the hole ball of radius R = 0.45 R0) and ramps up
// with a raised-cosine taper reaching eta at the antipode. Radii and r are
// intrinsic arclength along the section; R0 starts at one eighth of the
// section period and halves (at most twelve times) until the index form
// goes negative.
struct UnstableRegion {
  std::size_t center_index = 0;
  double center_arc = 0.0;
  double R = 0.0;
  double R0 = 0.0;
  Field phi_tilde;
  Field eta;       // first eigenfunction restricted to the section nodes
  double Q = 0.0;  // index form value, negative on success
  int shrink_steps = 0;
  double intrinsic_period = 0.0;
  std::vector<double> arc;  // node arclength positions
};

UnstableRegion unstable_region(const Hypersurface& S, const Metric& m, const JacobiData& jd);

// Outputs of the one-time geometric search. All heights are metric heights
// over the section; omega is the semi-width of the vertical tubular
// neighbourhood (half the vertical period), omega1 the clearance of the
// z0-tube from both the section and the cut locus.
struct CalibratedConstants {
  double omega = 0.0;
  double omega1 = 0.0;
  double t0 = 0.0;
  double c0 = 0.0;
  double tau = 0.0;
  double z0 = 0.0;
  double K_A = 0.0;
  double area_M = 0.0;
  double area_B = 0.0;
  double lambda = 0.0;
  double eta_min = 0.0;
  double eta_max = 0.0;
  double R = 0.0;
  double R0 = 0.0;
  double center_arc = 0.0;
  double margin_hole = 0.0;   // excised-area bound, min slack over the family
  double margin_slide = 0.0;  // full-slide area bound, min slack
};

struct CalibrationReport {
  struct Line {
    std::string name;
    double margin = 0.0;  // checked inequality slack, >= 0 on success
  };
  std::vector<Line> lines;
  double refine_worst = 0.0;  // worst relative drift at doubled resolution
  double verify_worst = 0.0;  // worst relative disagreement of the alternate evaluators
};

// Derives t0, c0, tau, z0 (capped by z0_cap), K_A, omega, omega1 and the area
// bookkeeping for the section. Every selected inequality is re-verified by
// alternate evaluators sharing no code with the search, and the constants are
// re-derived at doubled resolution; drifts beyond 2% throw.
CalibratedConstants calibrate_constants(const Hypersurface& S, const Metric& m,
                                        const UnstableRegion& ur, const JacobiData& jd,
                                        double z0_cap, CalibrationReport* report = nullptr);

// The four smallness conditions for a given epsilon; margin[k] > 0 passes.
struct Admissibility {
  double eps = 0.0;
  std::array<double, 4> margin{};
  std::array<bool, 4> ok{};
  bool pass = false;
};

Admissibility epsilon_admissibility(const Hypersurface& S, const Metric& m,
                                    const CalibratedConstants& cc, const JacobiData& jd,
                                    Epsilon eps);

// Largest admissible epsilon (the verdict is monotone in eps).
double epsilon_star(const Hypersurface& S, const Metric& m, const CalibratedConstants& cc,
                    const JacobiData& jd);

}  // namespace ac
