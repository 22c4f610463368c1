#pragma once

#include <cstddef>
#include <vector>

#include "ac/jacobi.hpp"

namespace ac {

// Index form on the two-sheeted cover of a section: two labelled copies with
// the deck swap i <-> i + n as the default involution. A test function splits
// into even and odd parts under the involution, and the cross term vanishes
// for isometries, so q_total = q_even + q_odd.
struct CoverSplit {
  double q_total = 0.0;
  double q_even = 0.0;
  double q_odd = 0.0;
  Field phi_even, phi_odd;
};

CoverSplit double_cover_splitting(const Hypersurface& S, const Metric& m, const Field& phi2,
                                  const std::vector<std::size_t>* involution = nullptr);

}  // namespace ac
