#pragma once

// File interchange for tables, solver reports, built fields, and the SVG
// inspection plots. Every writer funnels numbers through the same
// shortest-round-trip formatter, so a rerun with the same inputs produces
// byte-identical files.

#include <string>
#include <vector>

#include "wrinkle/energy.hpp"
#include "wrinkle/measure.hpp"
#include "wrinkle/recovery.hpp"
#include "wrinkle/solver.hpp"

namespace wrinkle {

/** Shortest decimal string that parses back to exactly v. */
std::string fmt(double v);

/**
 * Table as CSV rows `x,k,b,b_x` (row-major by x) next to a .json sidecar
 * {lambda, L_eff, k_max, b_min, scheme} carrying the grid bookkeeping the
 * samples alone cannot. `path` names the CSV; the sidecar swaps its
 * extension for .json. lambda records the right end of the x-domain, which
 * doubles as the stretch factor of dilated tables.
 */
void write_measure(const MeasureTable& t, const std::string& path);

/**
 * Inverse of write_measure. Grids are rebuilt from the sidecar plus the
 * sample coordinates, and the stored slope column goes through the checked
 * constructor, so a hand-edited derivative that contradicts its table is
 * rejected instead of silently patched. Tables whose domain starts at the
 * origin round-trip bit for bit. Throws std::runtime_error on missing or
 * malformed files.
 */
MeasureTable load_measure(const std::string& path);

/**
 * Minimizer table as a measure pair whose sidecar also carries the run
 * summary {objective, kkt_residual, k_min, residuals: [{k, r_k, lambda_k},
 * ...]} and convergence bookkeeping. load_measure reads the pair back; the
 * extra keys ride along.
 */
void write_minimizer_report(const MinimizerReport& r, const std::string& csv_path);

/**
 * Field exports: sample triplets `x,y,w` to <stem>_w1.csv and
 * <stem>_w2.csv, mode coefficients `x,k,a` to <stem>_modes.csv, and the
 * construction parameters to <stem>_params.json.
 */
void write_field(const DisplacementField& f, const std::string& stem);

/** Gap table CSV with header `L,t1,offset,t2,t3,t4,t5,total,F_inf,gap`. */
void write_gamma_report(const std::vector<GammaRow>& rows, const std::string& path);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/**
 * Minimal standalone polyline plot: fixed palette, five ticks per axis,
 * legend from the series labels. Points that cannot sit on a log axis are
 * dropped from that series. Returns the SVG document.
 */
std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& opts);

/** Write content verbatim; throws std::runtime_error when opening fails. */
void write_text(const std::string& path, const std::string& content);

}  // namespace wrinkle
