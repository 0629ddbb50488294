#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rssvar/etap.hpp"
#include "rssvar/grid.hpp"

namespace rssvar {

/// dB relative to the largest valid cell. The reference cell is the first
/// (row-major) valid cell attaining the maximum; its index and position are
/// stored in metadata["peak_index"], metadata["peak_x"], metadata["peak_y"].
SurfaceGrid to_db(SurfaceGrid const& linear);

/// Sample points x_min, x_min + step, ..., x_max along the line y = const.
struct GridLine {
    double x_min = -2.0;
    double x_max = 2.0;
    double step = 0.01;
    double y = 0.1;

    std::vector<double> xs() const;
};

struct Cut {
    double parameter = 0.0;
    std::vector<double> value;
    std::vector<double> db;
    std::vector<std::uint8_t> flags;
    std::vector<std::uint8_t> hole;
};

/// Family of 1-D ETAP cuts sharing one dB reference: the maximum over every
/// unflagged sample of every cut.
struct Sweep {
    std::string parameter;
    Mechanism mechanism;
    GridLine line;
    std::vector<double> x;
    std::vector<Cut> cuts;
    double global_max = 0.0;
};

/// Reflection cuts for each path loss exponent in np_list.
Sweep sweep_np(Scenario const& base, GridLine const& line, std::span<double const> np_list,
               QuadratureSettings const& quad = {}, unsigned workers = 1);

/// Cuts with both nodes lifted to height dz for each dz in dz_list.
Sweep sweep_dz(Scenario const& base, GridLine const& line, std::span<double const> dz_list,
               Mechanism const& mechanism, QuadratureSettings const& quad = {}, unsigned workers = 1);

/// Scattering power P_s(x) at every cell center; cells on a node are holes.
SurfaceGrid cassini_surface(LinkGeometry const& link, GridSpec const& grid, double c_s);

enum class GridFormat { csv, json };

/// csv: header `x,y,value,valid`, one row per cell in row-major order, six
/// significant digits, LF line endings. json: grid spec, metadata and values
/// at full precision.
void export_grid(SurfaceGrid const& surface, std::filesystem::path const& path, GridFormat format);
SurfaceGrid import_grid(std::filesystem::path const& path, GridFormat format);

/// One cut of a sweep as `x,value,db,valid`.
void export_cut(Sweep const& sweep, std::size_t cut, std::filesystem::path const& path);

/// printf("%.6g") with nan/inf spelled so that strtod reads them back.
std::string format_g6(double v);

/// Write text to a file, raising IoError with the path on failure.
void write_text_file(std::filesystem::path const& path, std::string_view text);
std::string read_text_file(std::filesystem::path const& path);

}  // namespace rssvar
