#include "rssvar/geometry.hpp"

#include <algorithm>
#include <limits>

#include "rssvar/error.hpp"

namespace rssvar {

bool is_finite(Vec3 v)
{
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

LinkGeometry::LinkGeometry(Vec3 tx, Vec3 rx) : tx_(tx), rx_(rx)
{
    if (!is_finite(tx) || !is_finite(rx)) {
        throw Error(ErrorKind::invalid_argument, "link node positions must be finite");
    }
    if (distance(tx, rx) <= kPositionTolerance) {
        throw Error(ErrorKind::degenerate_geometry, "TX and RX coincide");
    }
    if (std::abs(tx.z - rx.z) > kPositionTolerance) {
        throw Error(ErrorKind::invalid_argument, "TX and RX must be at the same height");
    }
}

LinkGeometry LinkGeometry::standard(double dz, double half_spacing)
{
    return {{-half_spacing, 0.0, dz}, {half_spacing, 0.0, dz}};
}

Person::Person(Vec2 center, double diameter) : Person(on_plane(center), diameter) {}

Person::Person(Vec3 center, double diameter) : center_(center), diameter_(diameter)
{
    if (!is_finite(center) || !(diameter > 0.0) || !std::isfinite(diameter)) {
        throw Error(ErrorKind::invalid_argument, "person needs a finite center and diameter > 0");
    }
    if (center.z != 0.0) {
        throw Error(ErrorKind::invalid_argument, "person center must lie in the scatterer plane");
    }
}

GeometryScalars geometry_scalars(LinkGeometry const& link, Person const& person)
{
    Vec3 const xo = person.center();
    Vec3 const to_rx = link.rx() - xo;
    Vec3 const from_tx = xo - link.tx();
    GeometryScalars g;
    g.a = norm(from_tx);
    g.b = norm(to_rx);
    if (g.a <= kPositionTolerance || g.b <= kPositionTolerance) {
        throw Error(ErrorKind::degenerate_geometry, "person coincides with a node");
    }
    g.cos_theta = std::clamp(dot(to_rx, from_tx) / (g.a * g.b), -1.0, 1.0);
    // atan2 of (|u x v|, u . v) is arccos(cos_theta) without the loss of
    // precision near 0 and pi.
    Vec3 const c{to_rx.y * from_tx.z - to_rx.z * from_tx.y, to_rx.z * from_tx.x - to_rx.x * from_tx.z,
                 to_rx.x * from_tx.y - to_rx.y * from_tx.x};
    g.sin_theta = norm(c) / (g.a * g.b);
    g.theta = std::atan2(norm(c), dot(to_rx, from_tx));
    g.d_plus = 1.0 / (1.0 / g.a + 1.0 / g.b);
    g.d_minus = g.a == g.b ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 / g.b - 1.0 / g.a);
    return g;
}

double shadow_width(Vec3 apex, Person const& person, double alpha)
{
    if (!(alpha >= 0.0)) {
        throw Error(ErrorKind::invalid_argument, "alpha must be non-negative");
    }
    double const height = distance(apex, person.center());
    if (height <= kPositionTolerance) {
        throw Error(ErrorKind::degenerate_geometry, "shadow apex coincides with the person");
    }
    return person.diameter() * (alpha + height) / height;
}

bool segment_shadowed(Vec3 endpoint, Vec3 scatterer, Person const& person)
{
    Vec2 const p0 = plan(endpoint);
    Vec2 const d = plan(scatterer) - p0;
    Vec2 const rel = person.center2d() - p0;
    double const len2 = dot(d, d);
    double const t = len2 > 0.0 ? std::clamp(dot(rel, d) / len2, 0.0, 1.0) : 0.0;
    Vec2 const miss = rel - t * d;
    double const r = 0.5 * person.diameter();
    // 1e-12 relative slack keeps exact tangency on the shadowed side after rounding.
    return dot(miss, miss) <= r * r * (1.0 + 1e-12);
}

Vec2 SimilarityTransform::apply(Vec2 p) const
{
    Vec2 const q = p - origin;
    return {scale * (cos_angle * q.x - sin_angle * q.y), scale * (sin_angle * q.x + cos_angle * q.y)};
}

Vec2 SimilarityTransform::invert(Vec2 q) const
{
    double const k = 1.0 / scale;
    return origin + Vec2{k * (cos_angle * q.x + sin_angle * q.y), k * (-sin_angle * q.x + cos_angle * q.y)};
}

SimilarityTransform link_normalization(Vec2 tx, Vec2 rx)
{
    Vec2 const axis = tx - rx;
    double const len = norm(axis);
    if (len <= kPositionTolerance) {
        throw Error(ErrorKind::degenerate_geometry, "TX and RX coincide in plan view");
    }
    SimilarityTransform t;
    t.origin = 0.5 * (tx + rx);
    // rotate by -atan2(axis) so that tx - rx points along +x
    t.cos_angle = axis.x / len;
    t.sin_angle = -axis.y / len;
    t.scale = 2.0 / len;
    return t;
}

std::pair<SimilarityTransform, std::vector<Vec2>> normalize_coordinates(
    Vec2 tx, Vec2 rx, std::span<Vec2 const> points)
{
    auto const t = link_normalization(tx, rx);
    std::vector<Vec2> out;
    out.reserve(points.size());
    for (auto const& p : points) {
        out.push_back(t.apply(p));
    }
    return {t, std::move(out)};
}

}  // namespace rssvar
