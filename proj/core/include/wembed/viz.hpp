#pragma once

#include <string>
#include <vector>

#include "wembed/embedding_model.hpp"
#include "wembed/ot.hpp"

namespace wembed {

// Gaussian kernel density of a 2-D point cloud sampled on a square grid of
// cell centers. values(iy, ix) is the density at
// (x0 + (ix+0.5)dx, y0 + (iy+0.5)dy).
struct DensityGrid {
  Matrix values;  // resolution x resolution, nonnegative
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  double bandwidth = 0;

  int resolution() const { return static_cast<int>(values.rows()); }
  double cell_w() const { return (x1 - x0) / resolution(); }
  double cell_h() const { return (y1 - y0) / resolution(); }
  // cell-area-weighted total mass; ~1 for well-covered extents
  double mass() const { return values.sum() * cell_w() * cell_h(); }
};

// bandwidth <= 0 selects Scott's rule: M^(-1/6) * mean of per-axis sample
// deviations. Only 2-D ground spaces are rendered; higher-dimensional clouds
// must be sliced or projected externally first.
DensityGrid kde(const PointCloud& cloud, double bandwidth = 0.0,
                int resolution = 256);

// Same, on a caller-fixed extent (used to place several words on a shared
// canvas).
DensityGrid kde_on_extent(const PointCloud& cloud, double bandwidth,
                          int resolution, double x0, double y0, double x1,
                          double y1);

// Bilinear resample onto a new extent/resolution.
DensityGrid resample(const DensityGrid& grid, double x0, double y0, double x1,
                     double y1, int resolution);

// One closed contour in grid-node coordinates, first point == last point
// implied. Positive signed area encircles an above-threshold region, negative
// encircles a hole.
struct ContourLoop {
  std::vector<std::pair<double, double>> points;
  double signed_area() const;
};

// Marching-squares iso-contours of `values` at level `iso`, oriented so the
// region >= iso lies to the left of the travel direction.
std::vector<ContourLoop> marching_squares(const Matrix& values, double iso);

struct OverlaySpec {
  double threshold = 0.05;  // fraction of each grid's own max density
  int bands = 6;            // opacity steps between threshold and max
  int canvas = 640;         // output pixel size
};

// SVG overlay of per-grid upper level sets {density >= threshold * max},
// one color per grid, opacity increasing with density. Grids on mismatched
// extents are resampled to the first grid's frame.
std::string level_set_overlay(const std::vector<DensityGrid>& grids,
                              const std::vector<std::string>& colors,
                              const std::vector<std::string>& labels,
                              const OverlaySpec& spec);

struct RenderGroup {
  std::string name;
  std::string color;  // empty -> palette color
  std::vector<std::string> words;
};

struct RenderOptions {
  double threshold = 0.05;
  double bandwidth = 0.0;  // <= 0: Scott's rule per word
  int resolution = 256;
  int bands = 6;
};

// KDE + level-set overlay for the given words (grouped words share one
// color), written to an SVG file with a legend. The model must be a labeled
// 2-D wasserstein table.
void render_words(const EmbeddingModel& clouds,
                  const std::vector<RenderGroup>& groups,
                  const std::string& out_path, const RenderOptions& options);

// Default categorical palette used when a group does not name a color.
const std::vector<std::string>& default_palette();

}  // namespace wembed
