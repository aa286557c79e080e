#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uabs {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2&) const = default;

    double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Service area: the ground rectangle [0, width] x [0, height] in meters,
/// flown over at a fixed altitude.
struct AreaSpec {
    double width = 0.0;
    double height = 0.0;
    double uabs_altitude = 0.0;

    bool contains(Vec2 p) const {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }

    Vec2 clamp(Vec2 p) const {
        return {std::clamp(p.x, 0.0, width), std::clamp(p.y, 0.0, height)};
    }

    void validate() const {
        if (!(width > 0.0) || !(height > 0.0) || !(uabs_altitude > 0.0)) {
            throw std::invalid_argument("AreaSpec: width, height and altitude must be positive");
        }
    }
};

}  // namespace uabs
