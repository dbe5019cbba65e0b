#include "wembed/viz.hpp"

#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

namespace wembed {

namespace {

double scott_bandwidth(const PointCloud& cloud) {
  const double m = static_cast<double>(cloud.size());
  if (cloud.size() < 2) return 0.1;
  const Matrix centered =
      cloud.points.rowwise() - cloud.points.colwise().mean();
  double sigma = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    sigma += std::sqrt(centered.col(axis).squaredNorm() / (m - 1.0));
  }
  sigma *= 0.5;
  const double bw = std::pow(m, -1.0 / 6.0) * sigma;
  return bw > 1e-12 ? bw : 0.1;  // degenerate cloud spread
}

void check_renderable(const PointCloud& cloud) {
  cloud.validate();
  if (cloud.dim() != 2) {
    throw Error::format(
        "kde renders 2-D ground spaces only (got k={}); slice or project the "
        "cloud externally first",
        cloud.dim());
  }
}

}  // namespace

DensityGrid kde_on_extent(const PointCloud& cloud, double bandwidth,
                          int resolution, double x0, double y0, double x1,
                          double y1) {
  check_renderable(cloud);
  if (resolution < 2) throw Error("kde resolution must be >= 2");
  if (!(x1 > x0) || !(y1 > y0)) throw Error("kde extent must be nonempty");
  const double bw = bandwidth > 0.0 ? bandwidth : scott_bandwidth(cloud);

  DensityGrid g;
  g.x0 = x0;
  g.y0 = y0;
  g.x1 = x1;
  g.y1 = y1;
  g.bandwidth = bw;
  g.values = Matrix::Zero(resolution, resolution);

  const double dx = (x1 - x0) / resolution;
  const double dy = (y1 - y0) / resolution;
  const double inv2bw2 = 1.0 / (2.0 * bw * bw);
  const double norm =
      1.0 / (static_cast<double>(cloud.size()) * 2.0 * std::numbers::pi * bw *
             bw);
  for (int iy = 0; iy < resolution; ++iy) {
    const double cy = y0 + (iy + 0.5) * dy;
    for (int ix = 0; ix < resolution; ++ix) {
      const double cx = x0 + (ix + 0.5) * dx;
      double acc = 0.0;
      for (Eigen::Index p = 0; p < cloud.size(); ++p) {
        const double ddx = cx - cloud.points(p, 0);
        const double ddy = cy - cloud.points(p, 1);
        acc += std::exp(-(ddx * ddx + ddy * ddy) * inv2bw2);
      }
      g.values(iy, ix) = acc * norm;
    }
  }
  return g;
}

DensityGrid kde(const PointCloud& cloud, double bandwidth, int resolution) {
  check_renderable(cloud);
  const double bw = bandwidth > 0.0 ? bandwidth : scott_bandwidth(cloud);
  const double pad = 4.0 * bw;
  const double x0 = cloud.points.col(0).minCoeff() - pad;
  const double x1 = cloud.points.col(0).maxCoeff() + pad;
  const double y0 = cloud.points.col(1).minCoeff() - pad;
  const double y1 = cloud.points.col(1).maxCoeff() + pad;
  return kde_on_extent(cloud, bw, resolution, x0, y0, x1, y1);
}

DensityGrid resample(const DensityGrid& grid, double x0, double y0, double x1,
                     double y1, int resolution) {
  if (resolution < 2) throw Error("resample resolution must be >= 2");
  DensityGrid out;
  out.x0 = x0;
  out.y0 = y0;
  out.x1 = x1;
  out.y1 = y1;
  out.bandwidth = grid.bandwidth;
  out.values = Matrix::Zero(resolution, resolution);
  const int r_in = grid.resolution();
  const double dx = (x1 - x0) / resolution;
  const double dy = (y1 - y0) / resolution;
  for (int iy = 0; iy < resolution; ++iy) {
    const double cy = y0 + (iy + 0.5) * dy;
    // fractional node coordinates in the source grid
    const double fy = (cy - grid.y0) / grid.cell_h() - 0.5;
    for (int ix = 0; ix < resolution; ++ix) {
      const double cx = x0 + (ix + 0.5) * dx;
      const double fx = (cx - grid.x0) / grid.cell_w() - 0.5;
      if (fx < 0 || fy < 0 || fx > r_in - 1 || fy > r_in - 1) continue;
      const int jx = std::min(static_cast<int>(fx), r_in - 2);
      const int jy = std::min(static_cast<int>(fy), r_in - 2);
      const double tx = fx - jx, ty = fy - jy;
      out.values(iy, ix) =
          (1 - tx) * (1 - ty) * grid.values(jy, jx) +
          tx * (1 - ty) * grid.values(jy, jx + 1) +
          (1 - tx) * ty * grid.values(jy + 1, jx) +
          tx * ty * grid.values(jy + 1, jx + 1);
    }
  }
  return out;
}

double ContourLoop::signed_area() const {
  double twice = 0.0;
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [x1p, y1p] = points[i];
    const auto& [x2p, y2p] = points[(i + 1) % n];
    twice += x1p * y2p - x2p * y1p;
  }
  return 0.5 * twice;
}

namespace {

// Edge crossing keys: each lattice edge carries at most one iso crossing.
// Horizontal edge h(i,j) joins nodes (i,j)-(i+1,j); vertical v(i,j) joins
// (i,j)-(i,j+1).
struct Crossing {
  double x, y;
};

long hkey(int i, int j, int r) { return 2L * (static_cast<long>(j) * r + i); }
long vkey(int i, int j, int r) {
  return 2L * (static_cast<long>(j) * r + i) + 1;
}

struct Segment {
  long from, to;
};

}  // namespace

std::vector<ContourLoop> marching_squares(const Matrix& values, double iso) {
  const int r = static_cast<int>(values.rows());
  if (values.cols() != r || r < 2) {
    throw Error("marching_squares expects a square grid, >= 2 per side");
  }
  auto above = [&](int i, int j) { return values(j, i) >= iso; };
  auto interp = [&](double va, double vb) {
    const double d = vb - va;
    if (d == 0.0) return 0.5;
    double t = (iso - va) / d;
    return std::min(1.0, std::max(0.0, t));
  };

  std::map<long, Crossing> pts;
  std::map<long, Segment> by_from;
  auto add_seg = [&](long from, Crossing pf, long to, Crossing pt_) {
    pts.emplace(from, pf);
    pts.emplace(to, pt_);
    by_from[from] = Segment{from, to};
  };

  for (int j = 0; j + 1 < r; ++j) {
    for (int i = 0; i + 1 < r; ++i) {
      const bool a = above(i, j), b = above(i + 1, j), c = above(i + 1, j + 1),
                 d = above(i, j + 1);
      const int mask = (a ? 1 : 0) | (b ? 2 : 0) | (c ? 4 : 0) | (d ? 8 : 0);
      if (mask == 0 || mask == 15) continue;

      const double va = values(j, i), vb = values(j, i + 1),
                   vc = values(j + 1, i + 1), vd = values(j + 1, i);
      // crossings on the four cell edges (grid-node coordinates)
      const Crossing bottom{i + interp(va, vb), static_cast<double>(j)};
      const Crossing right{static_cast<double>(i + 1), j + interp(vb, vc)};
      const Crossing top{i + interp(vd, vc), static_cast<double>(j + 1)};
      const Crossing left{static_cast<double>(i), j + interp(va, vd)};
      const long kb = hkey(i, j, r), kr = vkey(i + 1, j, r),
                 kt = hkey(i, j + 1, r), kl = vkey(i, j, r);

      // The >= iso region stays to the left of travel.
      switch (mask) {
        case 1: add_seg(kb, bottom, kl, left); break;
        case 2: add_seg(kr, right, kb, bottom); break;
        case 3: add_seg(kr, right, kl, left); break;
        case 4: add_seg(kt, top, kr, right); break;
        case 6: add_seg(kt, top, kb, bottom); break;
        case 7: add_seg(kt, top, kl, left); break;
        case 8: add_seg(kl, left, kt, top); break;
        case 9: add_seg(kb, bottom, kt, top); break;
        case 11: add_seg(kr, right, kt, top); break;
        case 12: add_seg(kl, left, kr, right); break;
        case 13: add_seg(kb, bottom, kr, right); break;
        case 14: add_seg(kl, left, kb, bottom); break;
        case 5: {  // A,C above: saddle, disambiguate by center mean
          const double center = 0.25 * (va + vb + vc + vd);
          if (center >= iso) {
            add_seg(kb, bottom, kr, right);
            add_seg(kt, top, kl, left);
          } else {
            add_seg(kb, bottom, kl, left);
            add_seg(kt, top, kr, right);
          }
          break;
        }
        case 10: {  // B,D above
          const double center = 0.25 * (va + vb + vc + vd);
          if (center >= iso) {
            add_seg(kl, left, kb, bottom);
            add_seg(kr, right, kt, top);
          } else {
            add_seg(kr, right, kb, bottom);
            add_seg(kl, left, kt, top);
          }
          break;
        }
        default: break;
      }
    }
  }

  std::vector<ContourLoop> loops;
  while (!by_from.empty()) {
    const long start = by_from.begin()->first;
    ContourLoop loop;
    long cur = start;
    bool closed = false;
    while (true) {
      auto it = by_from.find(cur);
      if (it == by_from.end()) break;  // open chain hits the grid border
      const Crossing& p = pts.at(cur);
      loop.points.emplace_back(p.x, p.y);
      const long nxt = it->second.to;
      by_from.erase(it);
      cur = nxt;
      if (cur == start) {
        closed = true;
        break;
      }
    }
    if (closed && loop.points.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

const std::vector<std::string>& default_palette() {
  static const std::vector<std::string> palette = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
      "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};
  return palette;
}

namespace {

std::string svg_path(const std::vector<ContourLoop>& loops, double sx,
                     double sy, double ox, double oy, double canvas_h) {
  std::string d;
  for (const auto& loop : loops) {
    for (std::size_t i = 0; i < loop.points.size(); ++i) {
      const auto& [gx, gy] = loop.points[i];
      const double px = ox + gx * sx;
      const double py = canvas_h - (oy + gy * sy);  // svg y points down
      d += fmt::format("{}{:.3f},{:.3f} ", i == 0 ? "M" : "L", px, py);
    }
    d += "Z ";
  }
  return d;
}

}  // namespace

std::string level_set_overlay(const std::vector<DensityGrid>& grids,
                              const std::vector<std::string>& colors,
                              const std::vector<std::string>& labels,
                              const OverlaySpec& spec) {
  if (grids.empty()) throw Error("level_set_overlay: no grids given");
  if (colors.size() != grids.size()) {
    throw Error::format("need one color per grid ({} grids, {} colors)",
                        grids.size(), colors.size());
  }
  if (!(spec.threshold > 0.0 && spec.threshold < 1.0)) {
    throw Error::format("threshold must lie in (0,1), got {}", spec.threshold);
  }
  if (spec.bands < 1) throw Error("bands must be >= 1");

  // unify frames: everything is resampled onto the first grid's frame
  const DensityGrid& frame = grids.front();
  const int r = frame.resolution();
  std::vector<const DensityGrid*> aligned;
  std::vector<DensityGrid> storage;
  storage.reserve(grids.size());
  for (const auto& g : grids) {
    const bool same = g.resolution() == r && g.x0 == frame.x0 &&
                      g.x1 == frame.x1 && g.y0 == frame.y0 &&
                      g.y1 == frame.y1;
    if (same) {
      aligned.push_back(&g);
    } else {
      storage.push_back(resample(g, frame.x0, frame.y0, frame.x1, frame.y1, r));
      aligned.push_back(&storage.back());
    }
  }

  const double canvas = spec.canvas;
  const double sx = canvas / (r - 1);
  const double sy = canvas / (r - 1);

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" "
      "viewBox=\"0 0 {0} {0}\">\n"
      "<rect width=\"{0}\" height=\"{0}\" fill=\"#ffffff\"/>\n",
      canvas);

  for (std::size_t gi = 0; gi < aligned.size(); ++gi) {
    const Matrix& v = aligned[gi]->values;
    const double mx = v.maxCoeff();
    const std::string label =
        gi < labels.size() ? labels[gi] : fmt::format("grid{}", gi);
    svg += fmt::format("<g class=\"word\" data-label=\"{}\">\n", label);
    if (mx > 0.0) {
      for (int b = 0; b < spec.bands; ++b) {
        const double frac =
            spec.threshold +
            (1.0 - spec.threshold) * static_cast<double>(b) / spec.bands;
        const double iso = frac * mx;
        auto loops = marching_squares(v, iso);
        if (loops.empty()) continue;
        // opacity follows the band's density fraction
        const double opacity = 0.15 + 0.75 * frac;
        svg += fmt::format(
            "<path class=\"{}\" fill=\"{}\" fill-opacity=\"{:.3f}\" "
            "fill-rule=\"evenodd\" stroke=\"none\" d=\"{}\"/>\n",
            b == 0 ? "level-region" : "band", colors[gi], opacity,
            svg_path(loops, sx, sy, 0.0, 0.0, canvas));
      }
    }
    svg += "</g>\n";
  }

  // legend
  double ly = 18.0;
  for (std::size_t gi = 0; gi < aligned.size(); ++gi) {
    const std::string label =
        gi < labels.size() ? labels[gi] : fmt::format("grid{}", gi);
    svg += fmt::format(
        "<rect x=\"8\" y=\"{:.1f}\" width=\"12\" height=\"12\" fill=\"{}\"/>"
        "<text x=\"24\" y=\"{:.1f}\" font-family=\"sans-serif\" "
        "font-size=\"12\">{}</text>\n",
        ly - 10.0, colors[gi], ly, label);
    ly += 16.0;
  }
  svg += "</svg>\n";
  return svg;
}

void render_words(const EmbeddingModel& clouds,
                  const std::vector<RenderGroup>& groups,
                  const std::string& out_path, const RenderOptions& options) {
  clouds.validate();
  if (clouds.kind != ModelKind::kWasserstein) {
    throw Error("render_words requires a wasserstein model");
  }
  if (clouds.ground_dim != 2) {
    throw Error::format(
        "render_words draws 2-D ground spaces only (model has k={}); slice "
        "or project externally first",
        clouds.ground_dim);
  }
  if (groups.empty()) throw Error("render_words: no words given");
  if (clouds.labels.empty()) throw Error("model carries no vocabulary labels");

  std::unordered_map<std::string, int> index;
  for (int i = 0; i < clouds.n_objects; ++i) {
    index.emplace(clouds.labels[static_cast<std::size_t>(i)], i);
  }

  struct Entry {
    std::string word;
    std::string color;
    int id;
  };
  std::vector<Entry> entries;
  std::vector<std::string> missing;
  std::size_t palette_next = 0;
  for (const auto& g : groups) {
    if (g.words.empty()) throw Error("render group without words");
    std::string color = g.color;
    if (color.empty()) {
      color = default_palette()[palette_next % default_palette().size()];
      ++palette_next;
    }
    for (const auto& w : g.words) {
      auto it = index.find(w);
      if (it == index.end()) {
        missing.push_back(w);
      } else {
        entries.push_back({w, color, it->second});
      }
    }
  }
  if (!missing.empty()) {
    throw Error::format("words not in vocabulary: {}",
                        fmt::format("{}", fmt::join(missing, ", ")));
  }

  // shared canvas: union bounding box padded by four bandwidths
  std::vector<PointCloud> pcs;
  std::vector<double> bws;
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300, max_bw = 0.0;
  for (const auto& e : entries) {
    PointCloud pc = clouds.cloud(e.id);
    const double bw =
        options.bandwidth > 0.0 ? options.bandwidth : scott_bandwidth(pc);
    x0 = std::min(x0, pc.points.col(0).minCoeff());
    x1 = std::max(x1, pc.points.col(0).maxCoeff());
    y0 = std::min(y0, pc.points.col(1).minCoeff());
    y1 = std::max(y1, pc.points.col(1).maxCoeff());
    max_bw = std::max(max_bw, bw);
    bws.push_back(bw);
    pcs.push_back(std::move(pc));
  }
  const double pad = 4.0 * max_bw;
  x0 -= pad;
  x1 += pad;
  y0 -= pad;
  y1 += pad;

  std::vector<DensityGrid> grids;
  std::vector<std::string> colors, labels;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    grids.push_back(
        kde_on_extent(pcs[i], bws[i], options.resolution, x0, y0, x1, y1));
    colors.push_back(entries[i].color);
    labels.push_back(entries[i].word);
  }
  OverlaySpec spec;
  spec.threshold = options.threshold;
  spec.bands = options.bands;
  const std::string svg = level_set_overlay(grids, colors, labels, spec);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error::format("cannot write '{}'", out_path);
  out << svg;
  if (!out) throw Error::format("write failed for '{}'", out_path);
}

}  // namespace wembed
