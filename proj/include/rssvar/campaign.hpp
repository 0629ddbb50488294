#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rssvar/etap.hpp"
#include "rssvar/ingest.hpp"

namespace rssvar {

/// Synthetic deployment: nodes around a room, one Poisson field per link, a
/// person dwelling at random spots while every link samples RSS.
struct CampaignSettings {
    std::vector<std::pair<std::string, Vec3>> nodes = perimeter_nodes();
    double eta = 3.0;
    double diameter = 0.4;
    double margin = 3.0;  // scatterer region extends this far beyond the nodes
    Mechanism mechanism = Mechanism::scatter();
    PropagationParams params;
    /// Each session draws fresh scatterer fields for every link; dwells are
    /// split evenly across sessions.
    std::size_t sessions = 40;
    std::size_t dwells = 2400;
    std::size_t samples_per_dwell = 10;
    double sample_period = 0.1;  // s
    double walk_inset = 0.2;     // person stays this far inside the node hull box
    double reference_db = -60.0;  // empty-room RSS of every link
    std::uint64_t seed = 1;
    unsigned workers = 1;

    /// Eight nodes on the perimeter of a side x side square at the given height.
    static std::vector<std::pair<std::string, Vec3>> perimeter_nodes(double side = 6.0, double height = 0.5);
};

struct Campaign {
    NodeSurvey survey;
    std::vector<MeasurementRecord> records;
    std::size_t links = 0;
    double median_separation = 0.0;
};

/// Records are ordered by time, then by link (tx index, rx index).
Campaign generate_campaign(CampaignSettings const& settings);

}  // namespace rssvar
