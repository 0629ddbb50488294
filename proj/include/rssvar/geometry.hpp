#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace rssvar {

/// Coincidence tolerance for node/person/scatterer positions [m].
inline constexpr double kPositionTolerance = 1e-9;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
    friend constexpr Vec3 operator*(Vec3 v, double s) { return s * v; }
    friend constexpr bool operator==(Vec3 const&, Vec3 const&) = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend constexpr bool operator==(Vec2 const&, Vec2 const&) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
constexpr Vec2 plan(Vec3 v) { return {v.x, v.y}; }
constexpr Vec3 on_plane(Vec2 v) { return {v.x, v.y, 0.0}; }
bool is_finite(Vec3 v);

/// TX/RX pair. Both nodes sit at the same height above the scatterer plane
/// (z = 0); that height is the link's dz.
class LinkGeometry {
public:
    LinkGeometry(Vec3 tx, Vec3 rx);

    Vec3 tx() const { return tx_; }
    Vec3 rx() const { return rx_; }
    double separation() const { return distance(tx_, rx_); }
    double height() const { return tx_.z; }
    Vec3 midpoint() const { return 0.5 * (tx_ + rx_); }
    LinkGeometry swapped() const { return {rx_, tx_}; }

    /// Nodes at (-half_spacing, 0, dz) and (+half_spacing, 0, dz).
    static LinkGeometry standard(double dz, double half_spacing = 1.0);

private:
    Vec3 tx_;
    Vec3 rx_;
};

/// Person modelled as an infinitely tall vertical cylinder standing on the
/// scatterer plane.
class Person {
public:
    Person(Vec2 center, double diameter);
    Person(Vec3 center, double diameter);

    Vec3 center() const { return center_; }
    Vec2 center2d() const { return plan(center_); }
    double diameter() const { return diameter_; }

private:
    Vec3 center_;
    double diameter_;
};

struct GeometryScalars {
    double a = 0.0;  // |x_t - x_o|
    double b = 0.0;  // |x_r - x_o|
    double cos_theta = 0.0;
    double sin_theta = 0.0;
    double theta = 0.0;
    double d_plus = 0.0;
    double d_minus = 0.0;  // +inf when a == b
};

/// theta is the angle between (x_r - x_o) and (x_o - x_t): 0 when the person
/// is on the segment between the nodes, pi on the far extensions of the line.
GeometryScalars geometry_scalars(LinkGeometry const& link, Person const& person);

/// Width of the node's shadow trapezoid at distance alpha behind the person.
double shadow_width(Vec3 apex, Person const& person, double alpha);

/// True when the plan-view segment endpoint -> scatterer passes within D/2 of
/// the person's axis. Touching the circle counts.
bool segment_shadowed(Vec3 endpoint, Vec3 scatterer, Person const& person);

/// Orientation-preserving similarity p -> scale * R(angle) * (p - origin).
struct SimilarityTransform {
    Vec2 origin;
    double cos_angle = 1.0;
    double sin_angle = 0.0;
    double scale = 1.0;

    Vec2 apply(Vec2 p) const;
    Vec2 invert(Vec2 q) const;
    double determinant() const { return scale * scale; }
};

/// Similarity that puts tx at (1, 0) and rx at (-1, 0).
SimilarityTransform link_normalization(Vec2 tx, Vec2 rx);

std::pair<SimilarityTransform, std::vector<Vec2>> normalize_coordinates(
    Vec2 tx, Vec2 rx, std::span<Vec2 const> points);

}  // namespace rssvar
