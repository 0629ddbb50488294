#include "rssvar/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "rssvar/error.hpp"
#include "rssvar/parallel.hpp"
#include "rssvar/random.hpp"
#include "rssvar/simulator.hpp"

namespace rssvar {

namespace {

constexpr std::uint64_t kPhaseStreams = 1ull << 20;
constexpr std::uint64_t kWalkStream = 1ull << 40;
constexpr std::uint64_t kSampleStreams = 1ull << 41;

}  // namespace

std::vector<std::pair<std::string, Vec3>> CampaignSettings::perimeter_nodes(double side, double height)
{
    double const h = 0.5 * side;
    std::vector<Vec2> const spots = {{0, 0}, {h, 0}, {side, 0}, {side, h}, {side, side}, {h, side}, {0, side}, {0, h}};
    std::vector<std::pair<std::string, Vec3>> out;
    for (std::size_t i = 0; i < spots.size(); ++i) {
        out.emplace_back("n" + std::to_string(i + 1), Vec3{spots[i].x, spots[i].y, height});
    }
    return out;
}

Campaign generate_campaign(CampaignSettings const& s)
{
    if (s.nodes.size() < 2) {
        throw Error(ErrorKind::invalid_argument, "a campaign needs at least two nodes");
    }
    if (!(s.eta > 0.0)) {
        throw Error(ErrorKind::no_scatterers, "scatterer density must be positive");
    }
    if (s.dwells == 0 || s.samples_per_dwell < 2) {
        throw Error(ErrorKind::invalid_argument, "a campaign needs dwells and at least two samples per dwell");
    }
    s.params.validate();

    Campaign c;
    Region box{s.nodes[0].second.x, s.nodes[0].second.x, s.nodes[0].second.y, s.nodes[0].second.y};
    for (auto const& [id, p] : s.nodes) {
        if (!c.survey.emplace(id, p).second) {
            throw Error(ErrorKind::invalid_argument, "duplicate node id '" + id + "'");
        }
        box.x_min = std::min(box.x_min, p.x);
        box.x_max = std::max(box.x_max, p.x);
        box.y_min = std::min(box.y_min, p.y);
        box.y_max = std::max(box.y_max, p.y);
    }
    Region const walk{box.x_min + s.walk_inset, box.x_max - s.walk_inset, box.y_min + s.walk_inset,
                      box.y_max - s.walk_inset};
    walk.validate();
    Region const field_region{box.x_min - s.margin, box.x_max + s.margin, box.y_min - s.margin,
                              box.y_max + s.margin};

    std::vector<std::pair<std::size_t, std::size_t>> links;
    std::vector<double> separations;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < s.nodes.size(); ++j) {
            links.emplace_back(i, j);
            separations.push_back(distance(s.nodes[i].second, s.nodes[j].second));
        }
    }
    c.links = links.size();
    std::sort(separations.begin(), separations.end());
    c.median_separation = separations.size() % 2 == 1
                              ? separations[separations.size() / 2]
                              : 0.5 * (separations[separations.size() / 2 - 1] + separations[separations.size() / 2]);

    std::vector<Vec2> spots(s.dwells);
    {
        Rng rng = make_rng(s.seed, kWalkStream);
        std::uniform_real_distribution<double> ux(walk.x_min, walk.x_max);
        std::uniform_real_distribution<double> uy(walk.y_min, walk.y_max);
        for (auto& p : spots) {
            double const x = ux(rng);
            double const y = uy(rng);
            p = {x, y};
        }
    }

    if (s.sessions == 0 || s.sessions > s.dwells) {
        throw Error(ErrorKind::invalid_argument, "sessions must be between 1 and the number of dwells");
    }
    std::size_t const per_link = s.dwells * s.samples_per_dwell;
    std::vector<std::vector<double>> rss(links.size(), std::vector<double>(per_link));
    std::size_t const tasks = links.size() * s.sessions;
    parallel_for(tasks, s.workers, [&](std::size_t task) {
        std::size_t const l = task % links.size();
        std::size_t const session = task / links.size();
        auto const& [i, j] = links[l];
        LinkGeometry const link(s.nodes[i].second, s.nodes[j].second);
        auto field =
            std::make_shared<ScattererField const>(sample_field(field_region, s.eta, derive_seed(s.seed, task)));
        auto r = synthesize_voltages(field, link, s.mechanism, s.params, derive_seed(s.seed, kPhaseStreams + task));
        double const empty = std::abs(r.v_bar);
        if (empty > 0.0) {
            double const gain = std::pow(10.0, s.reference_db / 20.0) / empty;
            for (auto& v : r.voltages) v *= gain;
        }
        std::size_t const first = session * s.dwells / s.sessions;
        std::size_t const last = (session + 1) * s.dwells / s.sessions;
        for (std::size_t d = first; d < last; ++d) {
            r.set_affected(classify_affected(r, Person(spots[d], s.diameter)));
            auto const series = simulate_rss_series(
                r, s.samples_per_dwell, derive_seed(s.seed, kSampleStreams + l * s.dwells + d));
            std::copy(series.rss_db.begin(), series.rss_db.end(),
                      rss[l].begin() + static_cast<std::ptrdiff_t>(d * s.samples_per_dwell));
        }
    });

    c.records.reserve(per_link * links.size());
    for (std::size_t d = 0; d < s.dwells; ++d) {
        for (std::size_t k = 0; k < s.samples_per_dwell; ++k) {
            std::size_t const n = d * s.samples_per_dwell + k;
            double const t = static_cast<double>(n) * s.sample_period;
            for (std::size_t l = 0; l < links.size(); ++l) {
                c.records.push_back(
                    {t, s.nodes[links[l].first].first, s.nodes[links[l].second].first, rss[l][n], spots[d]});
            }
        }
    }
    return c;
}

}  // namespace rssvar
