#include "wrinkle/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace wrinkle {

namespace {

constexpr const char* kSlopeScheme = "ghost-zero-forward-difference";

std::string sidecar_path(const std::string& csv) {
  auto dot = csv.find_last_of('.');
  auto slash = csv.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return csv + ".json";
  return csv.substr(0, dot) + ".json";
}

double parse_double(std::string_view s, const char* where) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error(std::string(where) + ": bad number '" + std::string(s) + "'");
  return v;
}

// coordinate with two decimals is plenty for a plot and keeps files stable
std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string fmt(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("fmt: value does not format");
  return std::string(buf, p);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("short write to " + path);
}

namespace {

std::string measure_csv(const MeasureTable& t) {
  std::string csv = "x,k,b,b_x\n";
  for (int i = 0; i < t.x.n; ++i) {
    std::string xs = fmt(t.x.node(i));
    for (int j = 0; j < t.b.cols; ++j) {
      csv += xs;
      csv += ',';
      csv += fmt(t.k.k[j]);
      csv += ',';
      csv += fmt(t.b(i, j));
      csv += ',';
      csv += fmt(t.b_x(i, j));
      csv += '\n';
    }
  }
  return csv;
}

nlohmann::ordered_json measure_meta(const MeasureTable& t) {
  nlohmann::ordered_json meta;
  meta["lambda"] = t.x.right;
  meta["L_eff"] = t.k.L_eff;
  meta["k_max"] = t.k.k_max;
  meta["b_min"] = t.b_min;
  meta["scheme"] = kSlopeScheme;
  return meta;
}

}  // namespace

void write_measure(const MeasureTable& t, const std::string& path) {
  write_text(path, measure_csv(t));
  write_text(sidecar_path(path), measure_meta(t).dump(2) + "\n");
}

MeasureTable load_measure(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  if (!std::getline(in, header) || header != "x,k,b,b_x")
    throw std::runtime_error(path + ": expected header x,k,b,b_x");

  std::vector<double> xs, ks, bs, bxs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view v(line);
    double cell[4];
    for (int c = 0; c < 4; ++c) {
      auto comma = v.find(',');
      bool last = c == 3;
      if (last != (comma == std::string_view::npos))
        throw std::runtime_error(path + ": expected 4 columns");
      cell[c] = parse_double(last ? v : v.substr(0, comma), path.c_str());
      if (!last) v.remove_prefix(comma + 1);
    }
    xs.push_back(cell[0]);
    ks.push_back(cell[1]);
    bs.push_back(cell[2]);
    bxs.push_back(cell[3]);
  }
  if (xs.empty()) throw std::runtime_error(path + ": no samples");

  std::ifstream sin(sidecar_path(path), std::ios::binary);
  if (!sin) throw std::runtime_error("cannot open " + sidecar_path(path));
  nlohmann::json meta = nlohmann::json::parse(sin, nullptr, true);
  for (const char* key : {"lambda", "L_eff", "k_max", "b_min", "scheme"})
    if (!meta.contains(key))
      throw std::runtime_error(sidecar_path(path) + ": missing key " + key);
  if (meta["scheme"].get<std::string>() != kSlopeScheme)
    throw std::runtime_error(sidecar_path(path) + ": unknown slope scheme");

  // the k block of the first row fixes the column count
  int nk = 1;
  while (nk < static_cast<int>(xs.size()) && xs[nk] == xs[0]) ++nk;
  if (xs.size() % nk != 0) throw std::runtime_error(path + ": ragged row blocks");
  int nx = static_cast<int>(xs.size()) / nk;
  if (nx < 2) throw std::runtime_error(path + ": need at least two rows");

  double right = meta["lambda"].get<double>();
  double left = xs[0] - (xs[nk] - xs[0]);
  if (std::abs(left) <= 1e-12 * (1.0 + std::abs(right))) left = 0.0;
  XGrid x = make_x_grid(nx, left, right);
  KGrid k = make_k_grid(meta["L_eff"].get<double>(), meta["k_max"].get<double>(),
                        ks.front() < 0.0);
  if (static_cast<int>(k.k.size()) != nk)
    throw std::runtime_error(path + ": frequency comb does not match the sidecar");

  Table b(nx, nk), bx(nx, nk);
  for (int i = 0; i < nx; ++i) {
    if (std::abs(xs[i * nk] - x.node(i)) > 1e-9 * (1.0 + std::abs(right)))
      throw std::runtime_error(path + ": sample coordinates are not a uniform grid");
    for (int j = 0; j < nk; ++j) {
      std::size_t r = static_cast<std::size_t>(i) * nk + j;
      if (xs[r] != xs[i * nk])
        throw std::runtime_error(path + ": row block mixes x coordinates");
      if (std::abs(ks[r] - k.k[j]) > 1e-12 * (1.0 + k.k_max))
        throw std::runtime_error(path + ": frequency column out of order");
      b(i, j) = bs[r];
      bx(i, j) = bxs[r];
    }
  }
  return make_measure_table(x, k, std::move(b), std::move(bx),
                            meta["b_min"].get<double>());
}

void write_minimizer_report(const MinimizerReport& r, const std::string& csv_path) {
  write_text(csv_path, measure_csv(r.table));
  nlohmann::ordered_json doc = measure_meta(r.table);
  doc["objective"] = r.objective;
  doc["kkt_residual"] = r.kkt_residual;
  doc["k_min"] = r.support_k_min;
  doc["residuals"] = nlohmann::ordered_json::array();
  for (const auto& row : r.per_k) {
    if (!row.active) continue;
    nlohmann::ordered_json e;
    e["k"] = row.k;
    e["r_k"] = row.r_k;
    e["lambda_k"] = row.lambda_k;
    doc["residuals"].push_back(std::move(e));
  }
  doc["global_residual"] = r.global_residual;
  doc["iterations"] = r.iterations;
  doc["converged"] = r.converged;
  write_text(sidecar_path(csv_path), doc.dump(2) + "\n");
}

void write_field(const DisplacementField& f, const std::string& stem) {
  auto sample_csv = [&](const Table& w) {
    std::string csv = "x,y,w\n";
    for (int i = 0; i < f.u.x.n; ++i) {
      std::string xs = fmt(f.u.x.node(i));
      for (int j = 0; j < f.y.m; ++j) {
        csv += xs;
        csv += ',';
        csv += fmt(f.y.node(j));
        csv += ',';
        csv += fmt(w(i, j));
        csv += '\n';
      }
    }
    return csv;
  };
  write_text(stem + "_w1.csv", sample_csv(f.w1));
  write_text(stem + "_w2.csv", sample_csv(f.w2));

  std::string modes = "x,k,a\n";
  for (int i = 0; i < f.u.x.n; ++i) {
    std::string xs = fmt(f.u.x.node(i));
    for (int j = 0; j < f.u.a.cols; ++j) {
      modes += xs;
      modes += ',';
      modes += fmt(f.u.k.k[j]);
      modes += ',';
      modes += fmt(f.u.a(i, j));
      modes += '\n';
    }
  }
  write_text(stem + "_modes.csv", modes);

  nlohmann::ordered_json meta;
  meta["L"] = f.params.L;
  meta["M"] = f.params.M;
  meta["eps"] = f.params.eps;
  meta["delta"] = f.params.delta;
  meta["lambda"] = f.params.lambda;
  meta["lambda_bar"] = f.params.lambda_bar;
  meta["L0"] = f.params.L0;
  meta["n"] = f.params.n;
  write_text(stem + "_params.json", meta.dump(2) + "\n");
}

void write_gamma_report(const std::vector<GammaRow>& rows, const std::string& path) {
  std::string csv = "L,t1,offset,t2,t3,t4,t5,total,F_inf,gap\n";
  for (const auto& r : rows) {
    const EnergyBreakdown& e = r.fl;
    for (double v : {r.L, e.t1, e.offset, e.t2, e.t3, e.t4, e.t5, e.total,
                     r.f_limit, r.gap}) {
      csv += fmt(v);
      csv += ',';
    }
    csv.back() = '\n';
  }
  write_text(path, csv);
}

std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& opts) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  const int ml = 70, mr = 20, mt = 34, mb = 48;
  const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;

  auto tx = [&](double v) { return opts.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return opts.log_y ? std::log10(v) : v; };
  auto usable = [&](double vx, double vy) {
    return std::isfinite(vx) && std::isfinite(vy) && (!opts.log_x || vx > 0.0) &&
           (!opts.log_y || vy > 0.0);
  };

  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  bool any = false;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      double vx = tx(s.x[i]), vy = ty(s.y[i]);
      if (!any) {
        x_lo = x_hi = vx;
        y_lo = y_hi = vy;
        any = true;
      }
      x_lo = std::min(x_lo, vx);
      x_hi = std::max(x_hi, vx);
      y_lo = std::min(y_lo, vy);
      y_hi = std::max(y_hi, vy);
    }
  if (!any) {
    x_lo = y_lo = 0.0;
    x_hi = y_hi = 1.0;
  }
  auto pad = [](double& lo, double& hi) {
    double d = hi - lo;
    if (d <= 0.0) d = std::max(1.0, std::abs(hi));
    lo -= 0.05 * d;
    hi += 0.05 * d;
  };
  pad(x_lo, x_hi);
  pad(y_lo, y_hi);

  auto sx = [&](double v) { return ml + (tx(v) - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double v) { return mt + (y_hi - ty(v)) / (y_hi - y_lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
      << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width << " "
      << opts.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << opts.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"monospace\" font-size=\"14\">" << opts.title << "</text>\n";

  // frame and five ticks per axis, labels in data units
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << px(pw)
      << "\" height=\"" << px(ph) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double f = i / 4.0;
    double gx = x_lo + f * (x_hi - x_lo), gy = y_lo + f * (y_hi - y_lo);
    double vx = opts.log_x ? std::pow(10.0, gx) : gx;
    double vy = opts.log_y ? std::pow(10.0, gy) : gy;
    double cx = ml + f * pw, cy = mt + (1.0 - f) * ph;
    svg << "<line x1=\"" << px(cx) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(cx)
        << "\" y2=\"" << px(mt + ph + 5) << "\" stroke=\"#333333\"/>\n"
        << "<text x=\"" << px(cx) << "\" y=\"" << px(mt + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">"
        << tick_label(vx) << "</text>\n"
        << "<line x1=\"" << ml - 5 << "\" y1=\"" << px(cy) << "\" x2=\"" << ml
        << "\" y2=\"" << px(cy) << "\" stroke=\"#333333\"/>\n"
        << "<text x=\"" << ml - 8 << "\" y=\"" << px(cy + 4)
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
        << tick_label(vy) << "</text>\n";
  }

  int ci = 0;
  for (const auto& s : series) {
    const char* color = palette[ci % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      svg << px(sx(s.x[i])) << ',' << px(sy(s.y[i])) << ' ';
    }
    svg << "\"/>\n";
    if (!s.label.empty()) {
      double lx = ml + pw - 150, ly = mt + 14 + 16 * ci;
      svg << "<rect x=\"" << px(lx) << "\" y=\"" << px(ly - 9)
          << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n"
          << "<text x=\"" << px(lx + 14) << "\" y=\"" << px(ly)
          << "\" font-family=\"monospace\" font-size=\"11\">" << s.label
          << "</text>\n";
    }
    ++ci;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace wrinkle
