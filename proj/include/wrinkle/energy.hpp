#pragma once

// Finite-width excess energy of a displacement field, term by term. The
// membrane and shear terms mix sampled products with difference quotients,
// the bending terms come straight from coefficients; every y-average is a
// rectangle sum over one period cell and every x-integral the open
// trapezoid on (-1, 1].

#include <vector>

#include "wrinkle/measure.hpp"
#include "wrinkle/recovery.hpp"

namespace wrinkle {

struct EnergyBreakdown {
  double t1 = 0.0;      // membrane-x: L^2 avg (w1_,x + u_,x^2/(2L^2) - 1)^2
  double offset = 0.0;  // -L^2/3, the flat-state membrane-y budget
  double t2 = 0.0;      // membrane-y: L^2 avg (w2_,y + u_,y^2/2 - x)^2
  double t3 = 0.0;      // shear: avg (L^2 w1_,y + w2_,x + u_,x u_,y)^2
  double t4 = 0.0;      // bending main: avg (u_,x^2 + u_,yy^2)
  double t5 = 0.0;      // bending minor: L^-2 avg (2 u_,xy^2 + L^-2 u_,xx^2)
  double total = 0.0;   // t1 + offset + t2 + t3 + t4 + t5
};

/**
 * Evaluate the excess energy on a field. Derivative conventions match the
 * construction: x-quotients via diff_x, y-derivatives spectral, products
 * sampled on the field's cell grid (which must resolve twice the
 * coefficient band; throws otherwise). L is taken from the caller rather
 * than the metadata so hand-built fields evaluate too.
 */
EnergyBreakdown eval_F_L(const DisplacementField& f, double L);

struct GammaRow {
  double L = 0.0;
  EnergyBreakdown fl;
  double f_limit = 0.0;  // limit objective of the source table
  double gap = 0.0;      // fl.total - f_limit
};

/**
 * Build the recovery field of t at each half-width and report the excess
 * energy against the table's limit objective. Rows keep the full breakdown
 * so callers can track which term dominates the gap.
 */
std::vector<GammaRow> gamma_gap(const MeasureTable& t, const std::vector<double>& Ls,
                                const RecoveryOptions& opts = {});

}  // namespace wrinkle
