#include "rssvar/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "rssvar/error.hpp"
#include "rssvar/fading.hpp"
#include "rssvar/parallel.hpp"
#include "rssvar/stats.hpp"
#include "rssvar/surface.hpp"

namespace rssvar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_fields(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto const comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view s)
{
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::string shortest(double v)
{
    char buf[64];
    auto const [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Lines of a text file with any trailing CR removed.
std::vector<std::string> read_lines(std::filesystem::path const& path)
{
    std::istringstream in(read_text_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

void expect_header(std::vector<std::string> const& lines, char const* header, std::filesystem::path const& path)
{
    if (lines.empty() || lines.front() != header) {
        throw Error(ErrorKind::schema_mismatch,
                    path.string() + ": expected header '" + header + "', found '" +
                        (lines.empty() ? std::string() : lines.front()) + "'");
    }
}

std::vector<double> percentile_ranks(std::vector<double> const& v)
{
    // average ranks scaled to [0, 1]
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        double const r = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
        i = j + 1;
    }
    double const denom = v.size() > 1 ? static_cast<double>(v.size() - 1) : 1.0;
    for (auto& r : rank) r /= denom;
    return rank;
}

/// Indices of the top ceil(n / 10) values, ties broken by lower index.
std::vector<std::size_t> top_decile(std::vector<double> const& v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    order.resize((v.size() + 9) / 10);
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace

NodeSurvey load_survey(std::filesystem::path const& path)
{
    auto const lines = read_lines(path);
    expect_header(lines, kSurveyHeader, path);
    NodeSurvey survey;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto const f = split_fields(lines[i]);
        std::string const where = path.string() + ":" + std::to_string(i + 1);
        if (f.size() != 4 || f[0].empty()) {
            throw Error(ErrorKind::schema_mismatch, where + ": expected 4 fields");
        }
        auto const x = parse_number(f[1]);
        auto const y = parse_number(f[2]);
        auto const z = parse_number(f[3]);
        if (!x || !y || !z) {
            throw Error(ErrorKind::schema_mismatch, where + ": node position is not numeric");
        }
        if (!survey.emplace(f[0], Vec3{*x, *y, *z}).second) {
            throw Error(ErrorKind::schema_mismatch, where + ": duplicate node id '" + f[0] + "'");
        }
    }
    return survey;
}

void write_survey(std::filesystem::path const& path, NodeSurvey const& survey)
{
    std::string out = std::string(kSurveyHeader) + "\n";
    for (auto const& [id, p] : survey) {
        out += id + ',' + shortest(p.x) + ',' + shortest(p.y) + ',' + shortest(p.z) + '\n';
    }
    write_text_file(path, out);
}

MeasurementLoad load_measurements(std::filesystem::path const& csv_path, NodeSurvey const& survey)
{
    auto const lines = read_lines(csv_path);
    expect_header(lines, kMeasurementHeader, csv_path);
    MeasurementLoad load;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::string const& line = lines[i];
        if (line.empty()) continue;
        ++load.rows;
        auto reject = [&](std::string reason) { load.rejects.push_back({i + 1, std::move(reason), line}); };
        auto const f = split_fields(line);
        if (f.size() != 6) {
            reject("SchemaMismatch: expected 6 fields, found " + std::to_string(f.size()));
            continue;
        }
        auto const t = parse_number(f[0]);
        auto const rss = parse_number(f[3]);
        auto const px = parse_number(f[4]);
        auto const py = parse_number(f[5]);
        if (!t || !rss || !px || !py) {
            reject("SchemaMismatch: non-numeric field");
            continue;
        }
        if (!survey.contains(f[1])) {
            reject("UnknownNodeId: '" + f[1] + "'");
            continue;
        }
        if (!survey.contains(f[2])) {
            reject("UnknownNodeId: '" + f[2] + "'");
            continue;
        }
        if (f[1] == f[2]) {
            reject("InvalidArgument: tx_id equals rx_id");
            continue;
        }
        load.records.push_back({*t, f[1], f[2], *rss, {*px, *py}});
    }
    return load;
}

MeasurementLoad load_measurements(std::filesystem::path const& csv_path, std::filesystem::path const& survey_path)
{
    return load_measurements(csv_path, load_survey(survey_path));
}

void write_measurements(std::filesystem::path const& path, std::span<MeasurementRecord const> records)
{
    std::string out = std::string(kMeasurementHeader) + "\n";
    out.reserve(records.size() * 48);
    for (auto const& r : records) {
        out += shortest(r.time_s);
        out += ',';
        out += r.tx_id;
        out += ',';
        out += r.rx_id;
        out += ',';
        out += shortest(r.rss_db);
        out += ',';
        out += shortest(r.person.x);
        out += ',';
        out += shortest(r.person.y);
        out += '\n';
    }
    write_text_file(path, out);
}

void write_rejects(std::filesystem::path const& path, std::span<RejectedRow const> rejects)
{
    nlohmann::json j = nlohmann::json::array();
    for (auto const& r : rejects) {
        j.push_back({{"row", r.row}, {"reason", r.reason}, {"text", r.text}});
    }
    write_text_file(path, j.dump(2) + "\n");
}

double BinnedVariance::out_of_grid_fraction() const
{
    std::size_t const total = in_grid + out_of_grid;
    return total > 0 ? static_cast<double>(out_of_grid) / static_cast<double>(total) : 0.0;
}

SurfaceGrid BinnedVariance::as_surface() const
{
    SurfaceGrid s;
    s.spec = grid;
    s.values = variance;
    s.valid = valid;
    s.metadata = {{"quantity", "rss_variance_db2"},
                  {"min_count", min_count},
                  {"in_grid", in_grid},
                  {"out_of_grid", out_of_grid},
                  {"counts", counts}};
    return s;
}

BinnedVariance build_variance_surface(std::span<MeasurementRecord const> records, NodeSurvey const& survey,
                                      GridSpec const& grid, std::size_t min_count)
{
    grid.validate();
    if (min_count < 2) {
        throw Error(ErrorKind::invalid_argument, "min_count must be at least 2");
    }
    BinnedVariance out;
    out.grid = grid;
    out.min_count = min_count;
    std::vector<std::vector<double>> bins(grid.cell_count());
    std::map<std::pair<std::string, std::string>, SimilarityTransform> transforms;
    for (auto const& r : records) {
        auto key = std::pair{r.tx_id, r.rx_id};
        auto it = transforms.find(key);
        if (it == transforms.end()) {
            auto const tx = survey.find(r.tx_id);
            auto const rx = survey.find(r.rx_id);
            if (tx == survey.end() || rx == survey.end()) {
                throw Error(ErrorKind::unknown_node_id, "record references '" + r.tx_id + "' -> '" + r.rx_id +
                                                            "' which is not in the survey");
            }
            it = transforms.emplace(key, link_normalization(plan(tx->second), plan(rx->second))).first;
        }
        auto const cell = grid.locate(it->second.apply(r.person));
        if (cell) {
            bins[*cell].push_back(r.rss_db);
            ++out.in_grid;
        } else {
            ++out.out_of_grid;
        }
    }
    std::size_t const n = grid.cell_count();
    out.counts.resize(n);
    out.variance.assign(n, kNaN);
    out.valid.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& b = bins[i];
        out.counts[i] = b.size();
        if (b.size() >= min_count) {
            // sorting first makes the sum independent of record order
            std::sort(b.begin(), b.end());
            out.variance[i] = sample_variance(b);
            out.valid[i] = 1;
        }
    }
    return out;
}

void to_json(nlohmann::json& j, SurfaceComparison const& c)
{
    j = {{"joint_bins", c.joint_bins},
         {"spearman", c.spearman},
         {"empirical_peak", {c.empirical_peak.x, c.empirical_peak.y}},
         {"model_peak", {c.model_peak.x, c.model_peak.y}},
         {"peak_distance", c.peak_distance},
         {"top_decile_jaccard", c.top_decile_jaccard},
         {"near_node_bins", c.near_node_bins},
         {"empirical_near_node_rank", c.empirical_near_node_rank},
         {"model_near_node_rank", c.model_near_node_rank},
         {"centre_bins", c.centre_bins},
         {"empirical_near_node_contrast", c.empirical_near_node_contrast},
         {"model_near_node_contrast", c.model_near_node_contrast}};
}

SurfaceComparison compare_surfaces(SurfaceGrid const& empirical, SurfaceGrid const& model)
{
    if (!(empirical.spec == model.spec)) {
        throw Error(ErrorKind::invalid_argument, "surfaces must share one grid; evaluate the model on the empirical grid");
    }
    std::vector<std::size_t> cells;
    std::vector<double> e, m;
    for (std::size_t i = 0; i < empirical.values.size(); ++i) {
        if (empirical.valid[i] && model.valid[i] && std::isfinite(empirical.values[i]) &&
            std::isfinite(model.values[i])) {
            cells.push_back(i);
            e.push_back(empirical.values[i]);
            m.push_back(model.values[i]);
        }
    }
    if (cells.size() < 10) {
        throw Error(ErrorKind::no_overlap,
                    "only " + std::to_string(cells.size()) + " bins are valid in both surfaces (need 10)");
    }
    SurfaceComparison c;
    c.joint_bins = cells.size();
    c.spearman = spearman(e, m);

    auto argmax = [&cells](std::vector<double> const& v) {
        return cells[static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin())];
    };
    c.empirical_peak = empirical.spec.center(argmax(e));
    c.model_peak = model.spec.center(argmax(m));
    c.peak_distance = distance(c.empirical_peak, c.model_peak);

    auto const te = top_decile(e);
    auto const tm = top_decile(m);
    std::vector<std::size_t> both;
    std::set_intersection(te.begin(), te.end(), tm.begin(), tm.end(), std::back_inserter(both));
    c.top_decile_jaccard =
        static_cast<double>(both.size()) / static_cast<double>(te.size() + tm.size() - both.size());

    auto const re = percentile_ranks(e);
    auto const rm = percentile_ranks(m);
    double se = 0.0;
    double sm = 0.0;
    double ce = 0.0;
    double cm = 0.0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        Vec2 const p = empirical.spec.center(cells[k]);
        if (std::min(distance(p, Vec2{1.0, 0.0}), distance(p, Vec2{-1.0, 0.0})) <= kNearNodeRadius) {
            ++c.near_node_bins;
            se += re[k];
            sm += rm[k];
        }
        if (norm(p) <= kNearNodeRadius) {
            ++c.centre_bins;
            ce += re[k];
            cm += rm[k];
        }
    }
    if (c.near_node_bins > 0) {
        c.empirical_near_node_rank = se / static_cast<double>(c.near_node_bins);
        c.model_near_node_rank = sm / static_cast<double>(c.near_node_bins);
    }
    if (c.near_node_bins > 0 && c.centre_bins > 0) {
        double const n = static_cast<double>(c.centre_bins);
        c.empirical_near_node_contrast = c.empirical_near_node_rank - ce / n;
        c.model_near_node_contrast = c.model_near_node_rank - cm / n;
    }
    return c;
}

SurfaceComparison compare_surfaces(BinnedVariance const& empirical, SurfaceGrid const& model)
{
    return compare_surfaces(empirical.as_surface(), model);
}

NormalizedDeployment normalized_deployment(NodeSurvey const& survey)
{
    if (survey.size() < 2) {
        throw Error(ErrorKind::invalid_argument, "survey needs at least two nodes");
    }
    std::vector<double> seps;
    std::vector<double> heights;
    for (auto a = survey.begin(); a != survey.end(); ++a) {
        heights.push_back(a->second.z);
        for (auto b = std::next(a); b != survey.end(); ++b) {
            seps.push_back(distance(plan(a->second), plan(b->second)));
        }
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        std::size_t const n = v.size();
        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    NormalizedDeployment d;
    d.median_separation = median(seps);
    if (!(d.median_separation > 0.0)) {
        throw Error(ErrorKind::degenerate_geometry, "surveyed nodes coincide");
    }
    d.scale = 2.0 / d.median_separation;
    d.dz = median(heights) * d.scale;
    return d;
}

SurfaceGrid log_surface(SurfaceGrid const& linear)
{
    SurfaceGrid s = linear;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (s.valid[i] && s.values[i] > 0.0) {
            s.values[i] = 10.0 * std::log10(s.values[i]);
        } else {
            s.values[i] = kNaN;
            s.valid[i] = 0;
        }
    }
    s.metadata["quantity"] = "etap_db";
    return s;
}

SurfaceGrid pooled_log_etap_surface(std::span<MeasurementRecord const> records, NodeSurvey const& survey,
                                    GridSpec const& grid, Mechanism const& mechanism, PropagationParams const& params,
                                    double diameter, double eta, QuadratureSettings const& quad, unsigned workers)
{
    grid.validate();
    using Key = std::pair<std::string, std::string>;
    std::map<Key, std::vector<std::size_t>> counts;
    std::map<Key, SimilarityTransform> transforms;
    for (auto const& r : records) {
        Key key{r.tx_id, r.rx_id};
        auto it = counts.find(key);
        if (it == counts.end()) {
            auto const tx = survey.find(r.tx_id);
            auto const rx = survey.find(r.rx_id);
            if (tx == survey.end() || rx == survey.end()) {
                throw Error(ErrorKind::unknown_node_id, "record references a node missing from the survey");
            }
            transforms.emplace(key, link_normalization(plan(tx->second), plan(rx->second)));
            it = counts.emplace(key, std::vector<std::size_t>(grid.cell_count(), 0)).first;
        }
        if (auto const cell = grid.locate(transforms.at(key).apply(r.person))) {
            ++it->second[*cell];
        }
    }

    std::size_t const n = grid.cell_count();
    std::vector<double> weighted(n, 0.0);
    std::vector<double> total(n, 0.0);
    std::vector<std::uint8_t> broken(n, 0);
    for (auto const& [key, per_cell] : counts) {
        // each link in its own normalized frame: ETAP there is proportional to
        // the affected share of that link's total multipath power
        Vec3 const tx = survey.at(key.first);
        Vec3 const rx = survey.at(key.second);
        double const scale = transforms.at(key).scale;
        double const h = 0.5 * (tx.z + rx.z) * scale;
        Scenario const base{LinkGeometry::standard(h), Person(Vec2{0.0, 0.0}, diameter * scale), params, eta};
        std::vector<double> value(n, kNaN);
        parallel_for(n, workers, [&](std::size_t i) {
            if (per_cell[i] == 0) return;
            try {
                auto const e = etap(base.with_person_at(grid.center(i)), mechanism, quad);
                if (e.flags == 0 && e.value > 0.0) value[i] = 10.0 * std::log10(e.value);
            } catch (Error const&) {
            }
        });
        for (std::size_t i = 0; i < n; ++i) {
            if (per_cell[i] == 0) continue;
            if (std::isnan(value[i])) {
                broken[i] = 1;
                continue;
            }
            double const w = static_cast<double>(per_cell[i]);
            weighted[i] += w * value[i];
            total[i] += w;
        }
    }
    SurfaceGrid s = SurfaceGrid::filled(grid, kNaN, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (total[i] > 0.0 && !broken[i]) {
            s.values[i] = weighted[i] / total[i];
            s.valid[i] = 1;
        }
    }
    s.metadata = {{"quantity", "etap_db"},
                  {"pooling", "record_weighted_links"},
                  {"mechanism", mechanism.name()},
                  {"diameter", diameter},
                  {"eta", eta},
                  {"links", counts.size()}};
    return s;
}

VarianceMapping fit_variance_mapping(BinnedVariance const& empirical, SurfaceGrid const& log_etap)
{
    if (!(empirical.grid == log_etap.spec)) {
        throw Error(ErrorKind::invalid_argument, "surfaces must share one grid");
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < empirical.variance.size(); ++i) {
        if (empirical.valid[i] && log_etap.valid[i] && std::isfinite(log_etap.values[i])) {
            x.push_back(log_etap.values[i]);
            y.push_back(empirical.variance[i]);
        }
    }
    if (x.size() < 10) {
        throw Error(ErrorKind::no_overlap, "fewer than 10 bins to fit the variance mapping");
    }
    VarianceMapping m;
    m.fit = fit_line(x, y);
    m.a1 = m.fit.slope;
    m.a2 = m.fit.intercept;
    return m;
}

SurfaceGrid predicted_variance_surface(SurfaceGrid const& log_etap, double a1, double a2)
{
    SurfaceGrid s = log_etap;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (s.valid[i] && std::isfinite(s.values[i])) {
            s.values[i] = std::clamp(a2 + a1 * s.values[i], kVarianceFloor, kVarianceCeiling);
        } else {
            s.values[i] = kNaN;
            s.valid[i] = 0;
        }
    }
    s.metadata["quantity"] = "predicted_rss_variance_db2";
    s.metadata["a1"] = a1;
    s.metadata["a2"] = a2;
    return s;
}

}  // namespace rssvar
