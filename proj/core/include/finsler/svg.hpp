#pragma once

#include <string>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

// Minimal deterministic SVG writer: collects primitives in plane
// coordinates (y up), then emits with a viewport fitted to the bounding box
// plus a 10% margin. Output bytes depend only on the added primitives.
class SvgFigure {
public:
    void polyline(const std::vector<Point2>& pts, bool closed,
                  const std::string& stroke, double width);
    void dot(Point2 center, double radius, const std::string& fill);
    void write(const std::string& path, int pixel_width = 800) const;

private:
    struct Path {
        std::vector<Point2> pts;
        bool closed;
        std::string stroke;
        double width;
    };
    struct Dot {
        Point2 center;
        double radius;
        std::string fill;
    };
    std::vector<Path> paths_;
    std::vector<Dot> dots_;
};

}  // namespace finsler
