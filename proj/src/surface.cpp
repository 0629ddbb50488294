#include "rssvar/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "rssvar/error.hpp"
#include "rssvar/parallel.hpp"

namespace rssvar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_double(std::string const& token, std::filesystem::path const& path, std::size_t line)
{
    char* end = nullptr;
    double const v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
        throw Error(ErrorKind::schema_mismatch,
                    path.string() + ":" + std::to_string(line) + ": not a number '" + token + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(std::string const& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

nlohmann::json number_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

Sweep normalize_sweep(Sweep sweep)
{
    double peak = 0.0;
    for (auto const& cut : sweep.cuts) {
        for (std::size_t i = 0; i < cut.value.size(); ++i) {
            if (!cut.hole[i] && cut.flags[i] == 0) {
                peak = std::max(peak, cut.value[i]);
            }
        }
    }
    if (!(peak > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "sweep has no valid positive sample to normalize by");
    }
    sweep.global_max = peak;
    for (auto& cut : sweep.cuts) {
        cut.db.resize(cut.value.size());
        for (std::size_t i = 0; i < cut.value.size(); ++i) {
            cut.db[i] = cut.hole[i] ? kNaN : 10.0 * std::log10(cut.value[i] / peak);
        }
    }
    return sweep;
}

Cut evaluate_cut(Scenario const& scn, std::vector<double> const& xs, double y, Mechanism const& mechanism,
                 QuadratureSettings const& quad, unsigned workers)
{
    Cut cut;
    cut.value.assign(xs.size(), kNaN);
    cut.flags.assign(xs.size(), 0);
    cut.hole.assign(xs.size(), 0);
    parallel_for(xs.size(), workers, [&](std::size_t i) {
        try {
            auto const r = etap(scn.with_person_at({xs[i], y}), mechanism, quad);
            cut.value[i] = r.value;
            cut.flags[i] = r.flags;
        } catch (Error const&) {
            cut.hole[i] = 1;
        }
    });
    return cut;
}

}  // namespace

std::string format_g6(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_text_file(std::filesystem::path const& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::io_error, "cannot open '" + path.string() + "' for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw Error(ErrorKind::io_error, "failed writing '" + path.string() + "'");
    }
}

std::string read_text_file(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io_error, "cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SurfaceGrid to_db(SurfaceGrid const& linear)
{
    std::size_t peak_index = linear.values.size();
    double peak = 0.0;
    for (std::size_t i = 0; i < linear.values.size(); ++i) {
        if (linear.valid[i] && linear.values[i] > peak) {
            peak = linear.values[i];
            peak_index = i;
        }
    }
    if (peak_index == linear.values.size()) {
        throw Error(ErrorKind::invalid_argument, "surface has no valid positive cell to normalize by");
    }
    SurfaceGrid out = linear;
    std::size_t ties = 0;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        double const v = linear.values[i];
        if (linear.valid[i] && v == peak) {
            ++ties;
        }
        out.values[i] = std::isnan(v) ? kNaN : (i == peak_index ? 0.0 : 10.0 * std::log10(v / peak));
    }
    Vec2 const at = linear.spec.center(peak_index);
    out.metadata["normalization"] = "db_relative_to_max";
    out.metadata["reference_value"] = peak;
    out.metadata["peak_index"] = peak_index;
    out.metadata["peak_x"] = at.x;
    out.metadata["peak_y"] = at.y;
    out.metadata["peak_ties"] = ties;
    return out;
}

std::vector<double> GridLine::xs() const
{
    if (!(step > 0.0) || !(x_max >= x_min)) {
        throw Error(ErrorKind::invalid_argument, "grid line needs step > 0 and x_min <= x_max");
    }
    auto const n = static_cast<std::size_t>(std::floor((x_max - x_min) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = x_min + static_cast<double>(i) * step;
    }
    return out;
}

Sweep sweep_np(Scenario const& base, GridLine const& line, std::span<double const> np_list,
               QuadratureSettings const& quad, unsigned workers)
{
    if (np_list.empty()) {
        throw Error(ErrorKind::invalid_argument, "n_p list is empty");
    }
    Sweep sweep;
    sweep.parameter = "np";
    sweep.mechanism = Mechanism::reflect();
    sweep.line = line;
    sweep.x = line.xs();
    for (double n_p : np_list) {
        Scenario scn = base;
        scn.params.n_p = n_p;
        Cut cut = evaluate_cut(scn, sweep.x, line.y, sweep.mechanism, quad, workers);
        cut.parameter = n_p;
        sweep.cuts.push_back(std::move(cut));
    }
    return normalize_sweep(std::move(sweep));
}

Sweep sweep_dz(Scenario const& base, GridLine const& line, std::span<double const> dz_list,
               Mechanism const& mechanism, QuadratureSettings const& quad, unsigned workers)
{
    if (dz_list.empty()) {
        throw Error(ErrorKind::invalid_argument, "dz list is empty");
    }
    Sweep sweep;
    sweep.parameter = "dz";
    sweep.mechanism = mechanism;
    sweep.line = line;
    sweep.x = line.xs();
    for (double dz : dz_list) {
        Vec3 tx = base.link.tx();
        Vec3 rx = base.link.rx();
        tx.z = dz;
        rx.z = dz;
        Scenario const scn{LinkGeometry(tx, rx), base.person, base.params, base.eta};
        Cut cut = evaluate_cut(scn, sweep.x, line.y, mechanism, quad, workers);
        cut.parameter = dz;
        sweep.cuts.push_back(std::move(cut));
    }
    return normalize_sweep(std::move(sweep));
}

SurfaceGrid cassini_surface(LinkGeometry const& link, GridSpec const& grid, double c_s)
{
    PropagationParams params;
    params.c_s = c_s;
    params.validate();
    SurfaceGrid s = SurfaceGrid::filled(grid, kNaN, false);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        try {
            s.values[i] = power_scatter(link, on_plane(grid.center(i)), params);
            s.valid[i] = 1;
        } catch (Error const&) {
        }
    }
    s.metadata = {{"quantity", "scatter_power"}, {"c_s", c_s}, {"normalization", "linear"}};
    return s;
}

void export_grid(SurfaceGrid const& surface, std::filesystem::path const& path, GridFormat format)
{
    if (format == GridFormat::json) {
        nlohmann::json j;
        j["grid"] = surface.spec;
        j["metadata"] = surface.metadata;
        auto& values = j["values"] = nlohmann::json::array();
        for (double v : surface.values) {
            values.push_back(number_or_null(v));
        }
        j["valid"] = surface.valid;
        write_text_file(path, j.dump(2) + "\n");
        return;
    }
    std::string out = "x,y,value,valid\n";
    for (std::size_t i = 0; i < surface.values.size(); ++i) {
        Vec2 const c = surface.spec.center(i);
        out += format_g6(c.x) + ',' + format_g6(c.y) + ',' + format_g6(surface.values[i]) + ',' +
               (surface.valid[i] ? '1' : '0') + '\n';
    }
    write_text_file(path, out);
}

SurfaceGrid import_grid(std::filesystem::path const& path, GridFormat format)
{
    std::string const text = read_text_file(path);
    if (format == GridFormat::json) {
        auto const j = nlohmann::json::parse(text);
        SurfaceGrid s;
        s.spec = j.at("grid").get<GridSpec>();
        s.metadata = j.value("metadata", nlohmann::json::object());
        for (auto const& v : j.at("values")) {
            s.values.push_back(v.is_null() ? kNaN : v.get<double>());
        }
        s.valid = j.at("valid").get<std::vector<std::uint8_t>>();
        if (s.values.size() != s.spec.cell_count() || s.valid.size() != s.values.size()) {
            throw Error(ErrorKind::schema_mismatch, path.string() + ": value count does not match grid");
        }
        return s;
    }

    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "x,y,value,valid") {
        throw Error(ErrorKind::schema_mismatch, path.string() + ": expected header 'x,y,value,valid'");
    }
    std::vector<double> xs, ys, values;
    std::vector<std::uint8_t> valid;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        auto const f = split_csv_line(line);
        if (f.size() != 4 || (f[3] != "0" && f[3] != "1")) {
            throw Error(ErrorKind::schema_mismatch, path.string() + ":" + std::to_string(line_no) + ": bad row");
        }
        xs.push_back(parse_double(f[0], path, line_no));
        ys.push_back(parse_double(f[1], path, line_no));
        values.push_back(parse_double(f[2], path, line_no));
        valid.push_back(f[3] == "1" ? 1 : 0);
    }
    std::set<double> ux(xs.begin(), xs.end());
    std::set<double> uy(ys.begin(), ys.end());
    if (ux.size() < 2 || uy.size() < 2 || ux.size() * uy.size() != values.size()) {
        throw Error(ErrorKind::schema_mismatch, path.string() + ": rows do not form a rectangular grid");
    }
    double const step = (*ux.rbegin() - *ux.begin()) / static_cast<double>(ux.size() - 1);
    SurfaceGrid s;
    s.spec.step = step;
    s.spec.x_min = *ux.begin() - 0.5 * step;
    s.spec.x_max = *ux.rbegin() + 0.5 * step;
    s.spec.y_min = *uy.begin() - 0.5 * step;
    s.spec.y_max = s.spec.y_min + static_cast<double>(uy.size()) * step;
    s.values = std::move(values);
    s.valid = std::move(valid);
    return s;
}

void export_cut(Sweep const& sweep, std::size_t cut, std::filesystem::path const& path)
{
    auto const& c = sweep.cuts.at(cut);
    std::string out = "x,value,db,valid\n";
    for (std::size_t i = 0; i < sweep.x.size(); ++i) {
        bool const ok = !c.hole[i] && c.flags[i] == 0;
        out += format_g6(sweep.x[i]) + ',' + format_g6(c.value[i]) + ',' + format_g6(c.db[i]) + ',' +
               (ok ? '1' : '0') + '\n';
    }
    write_text_file(path, out);
}

}  // namespace rssvar
