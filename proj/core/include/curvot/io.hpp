#pragma once

#include <string>
#include <vector>

#include "curvot/measures.hpp"
#include "curvot/shape_opt.hpp"
#include "curvot/solvers.hpp"

namespace curvot::io {

/// Grayscale image, row-major, intensities in [0, maxval].
struct GrayImage {
    int width = 0;
    int height = 0;
    double maxval = 255.0;
    std::vector<double> pixels;

    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

/// Reads a PGM image (P2 ascii or P5 binary, 8 or 16 bit).
GrayImage read_pgm(const std::string& path);

enum class IntensityMode { bright, dark };

/// Pixel (row r, col c) becomes a Dirac at ((c+0.5)/W, 1-(r+0.5)/H) with
/// weight = intensity (bright) or maxval-intensity (dark). Pixels with
/// weight <= threshold * maxval are dropped; masses are normalized.
AtomicMeasure<2> image_to_diracs(const GrayImage& img, IntensityMode mode, double threshold);

/// CSV point cloud, one point per row. With a header the columns x,y[,z]
/// and optional mass are picked by name; without one the first D columns
/// are coordinates and a (D+1)-th column, when present, is the mass.
/// Masses default to 1/n and are normalized either way.
template <int D>
AtomicMeasure<D> load_catalog(const std::string& path);

/// Polyline JSON: {"vertices": [[x,y],...], "densities": [...],
/// "disjoint_mode": bool}; densities default to length-proportional.
template <int D>
PolylineMeasure<D> read_polyline_json(const std::string& path);

template <int D>
void write_polyline_json(const PolylineMeasure<D>& nu, const std::string& path);

struct SvgStyle {
    double size = 640.0;        // canvas size of the larger bbox side
    double margin = 16.0;
    double stroke_width = 1.0;
    double point_scale = 40.0;  // circle radius per unit of (mass/max mass)
};

/// Deterministic SVG rendering: one path per chain (split at zero-density
/// segments), optional Dirac layer with radius proportional to mass.
void render_svg(const PolylineMeasure<2>& nu, const AtomicMeasure<2>* mu,
                const std::string& path, const SvgStyle& style = {});

void write_history_csv(const ConvergenceHistory& history, const std::string& path);
void write_shape_history_csv(const std::vector<ShapeIterationRecord>& history,
                             const std::string& path);
void write_potential_json(const DualPotential& phi, const std::string& path);
DualPotential read_potential_json(const std::string& path);

}  // namespace curvot::io
