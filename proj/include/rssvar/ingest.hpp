#pragma once

#include <cstddef>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rssvar/etap.hpp"
#include "rssvar/geometry.hpp"
#include "rssvar/grid.hpp"
#include "rssvar/stats.hpp"

namespace rssvar {

/// Surveyed node positions keyed by id. CSV header: node_id,x_m,y_m,z_m
using NodeSurvey = std::map<std::string, Vec3>;

NodeSurvey load_survey(std::filesystem::path const& path);
void write_survey(std::filesystem::path const& path, NodeSurvey const& survey);

/// One RSS sample. CSV header: time_s,tx_id,rx_id,rss_db,person_x_m,person_y_m
struct MeasurementRecord {
    double time_s = 0.0;
    std::string tx_id;
    std::string rx_id;
    double rss_db = 0.0;
    Vec2 person;

    friend bool operator==(MeasurementRecord const&, MeasurementRecord const&) = default;
};

struct RejectedRow {
    std::size_t row = 0;  // 1-based line number in the file, header is line 1
    std::string reason;
    std::string text;
};

struct MeasurementLoad {
    std::vector<MeasurementRecord> records;
    std::vector<RejectedRow> rejects;
    std::size_t rows = 0;  // data rows read, accepted or not
};

inline constexpr char const* kMeasurementHeader = "time_s,tx_id,rx_id,rss_db,person_x_m,person_y_m";
inline constexpr char const* kSurveyHeader = "node_id,x_m,y_m,z_m";

/// Parse a measurement CSV. A wrong header raises SchemaMismatch; bad rows,
/// unknown node ids and tx == rx are collected as rejects.
MeasurementLoad load_measurements(std::filesystem::path const& csv_path, NodeSurvey const& survey);
MeasurementLoad load_measurements(std::filesystem::path const& csv_path, std::filesystem::path const& survey_path);

/// Numbers are written in shortest round-trip form, so reloading gives the
/// same records.
void write_measurements(std::filesystem::path const& path, std::span<MeasurementRecord const> records);
void write_rejects(std::filesystem::path const& path, std::span<RejectedRow const> rejects);

/// Per-bin RSS variance over person positions in each link's normalized frame
/// (TX at (1, 0), RX at (-1, 0)).
struct BinnedVariance {
    GridSpec grid;
    std::size_t min_count = 10;
    std::vector<std::size_t> counts;
    std::vector<double> variance;  // NaN where count < min_count
    std::vector<std::uint8_t> valid;
    std::size_t in_grid = 0;
    std::size_t out_of_grid = 0;

    double out_of_grid_fraction() const;
    SurfaceGrid as_surface() const;
};

BinnedVariance build_variance_surface(std::span<MeasurementRecord const> records, NodeSurvey const& survey,
                                      GridSpec const& grid, std::size_t min_count = 10);

struct SurfaceComparison {
    std::size_t joint_bins = 0;
    double spearman = 0.0;
    Vec2 empirical_peak;
    Vec2 model_peak;
    double peak_distance = 0.0;
    double top_decile_jaccard = 0.0;
    /// Mean percentile rank (0 lowest, 1 highest) of the joint bins within
    /// near_node_radius of a normalized node.
    double empirical_near_node_rank = 0.0;
    double model_near_node_rank = 0.0;
    std::size_t near_node_bins = 0;
    /// Near-node mean rank minus the mean rank of joint bins within
    /// near_node_radius of the link midpoint. Positive when the nodes dominate.
    double empirical_near_node_contrast = 0.0;
    double model_near_node_contrast = 0.0;
    std::size_t centre_bins = 0;
};

inline constexpr double kNearNodeRadius = 0.3;

void to_json(nlohmann::json& j, SurfaceComparison const& c);

/// Rank agreement over bins valid in both surfaces. Raises NoOverlap with
/// fewer than 10 such bins and InvalidArgument when the grids differ.
SurfaceComparison compare_surfaces(SurfaceGrid const& empirical, SurfaceGrid const& model);
SurfaceComparison compare_surfaces(BinnedVariance const& empirical, SurfaceGrid const& model);

/// Scale of the survey's links in the normalized frame: 2 / median link
/// length, and the median node height mapped through that scale.
struct NormalizedDeployment {
    double scale = 1.0;
    double median_separation = 2.0;
    double dz = 0.0;
};

NormalizedDeployment normalized_deployment(NodeSurvey const& survey);

/// Per bin, the record-weighted mean over links of 10 log10 ETAP, each link
/// evaluated in its normalized frame with node height and person diameter
/// scaled by 2 / link length. Bins without records, or where any contributing link
/// is a hole, flagged or zero, are invalid. values are dB, valid cells only.
SurfaceGrid pooled_log_etap_surface(std::span<MeasurementRecord const> records, NodeSurvey const& survey,
                                    GridSpec const& grid, Mechanism const& mechanism, PropagationParams const& params,
                                    double diameter, double eta, QuadratureSettings const& quad = {},
                                    unsigned workers = 1);

/// Var = a2 + a1 * 10 log10(ETAP) fitted over bins valid in both surfaces.
struct VarianceMapping {
    double a1 = 0.0;
    double a2 = 0.0;
    LinearFit fit;
};

/// log_etap holds 10 log10(ETAP) per cell.
VarianceMapping fit_variance_mapping(BinnedVariance const& empirical, SurfaceGrid const& log_etap);

/// Clamped a2 + a1 * log_etap for every valid cell.
SurfaceGrid predicted_variance_surface(SurfaceGrid const& log_etap, double a1, double a2);

/// 10 log10 of a linear ETAP surface; non-positive cells become invalid.
SurfaceGrid log_surface(SurfaceGrid const& linear);

}  // namespace rssvar
