#include "finsler/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "finsler/errors.hpp"

namespace finsler {

void SvgFigure::polyline(const std::vector<Point2>& pts, bool closed,
                         const std::string& stroke, double width) {
    if (pts.size() < 2) return;
    paths_.push_back({pts, closed, stroke, width});
}

void SvgFigure::dot(Point2 center, double radius, const std::string& fill) {
    dots_.push_back({center, radius, fill});
}

void SvgFigure::write(const std::string& path, int pixel_width) const {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    auto grow = [&](Point2 p) {
        xlo = std::min(xlo, p.x);
        xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y);
        yhi = std::max(yhi, p.y);
    };
    for (const auto& pl : paths_)
        for (const auto& p : pl.pts) grow(p);
    for (const auto& d : dots_) grow(d.center);
    if (!(xhi > xlo) || !(yhi > ylo)) {
        xlo = ylo = -1.0;
        xhi = yhi = 1.0;
    }
    double margin = 0.1 * std::max(xhi - xlo, yhi - ylo);
    xlo -= margin;
    xhi += margin;
    ylo -= margin;
    yhi += margin;
    double scale = pixel_width / (xhi - xlo);
    int pixel_height = static_cast<int>((yhi - ylo) * scale + 0.5);
    auto X = [&](double x) { return (x - xlo) * scale; };
    auto Y = [&](double y) { return (yhi - y) * scale; };  // y up -> y down

    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ConfigError("cannot open '" + path + "' for writing");
    std::fprintf(fp,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                 "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                 pixel_width, pixel_height, pixel_width, pixel_height);
    std::fprintf(fp, "<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n",
                 pixel_width, pixel_height);
    for (const auto& pl : paths_) {
        std::fprintf(fp, "<path d=\"");
        for (std::size_t i = 0; i < pl.pts.size(); ++i)
            std::fprintf(fp, "%c%.3f %.3f", i == 0 ? 'M' : 'L', X(pl.pts[i].x),
                         Y(pl.pts[i].y));
        if (pl.closed) std::fprintf(fp, "Z");
        std::fprintf(fp,
                     "\" fill=\"none\" stroke=\"%s\" stroke-width=\"%.2f\"/>\n",
                     pl.stroke.c_str(), pl.width);
    }
    for (const auto& d : dots_)
        std::fprintf(fp, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.2f\" fill=\"%s\"/>\n",
                     X(d.center.x), Y(d.center.y), d.radius, d.fill.c_str());
    std::fputs("</svg>\n", fp);
    std::fclose(fp);
}

}  // namespace finsler
