#include "yoloea/geometry.hpp"

#include <algorithm>

namespace yoloea {

bool is_valid(const Box& b) noexcept
{
    return std::isfinite(b.x_min) && std::isfinite(b.y_min) && std::isfinite(b.x_max) &&
           std::isfinite(b.y_max) && b.x_min <= b.x_max && b.y_min <= b.y_max;
}

double area(const Box& b) noexcept
{
    return b.width() * b.height();
}

double intersection_area(const Box& a, const Box& b) noexcept
{
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0)
        return 0.0;
    return iw * ih;
}

double union_area(const Box& a, const Box& b) noexcept
{
    return area(a) + area(b) - intersection_area(a, b);
}

double iou(const Box& a, const Box& b) noexcept
{
    const double inter = intersection_area(a, b);
    const double uni = area(a) + area(b) - inter;
    if (uni <= 0.0)
        return 0.0;
    return inter / uni;
}

Box enclosing(const Box& a, const Box& b) noexcept
{
    return {std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min), std::max(a.x_max, b.x_max),
            std::max(a.y_max, b.y_max)};
}

bool contains(const Box& outer, const Box& inner) noexcept
{
    return outer.x_min <= inner.x_min && outer.y_min <= inner.y_min && inner.x_max <= outer.x_max &&
           inner.y_max <= outer.y_max;
}

bool strictly_contains(const Box& outer, const Box& inner) noexcept
{
    return outer.x_min < inner.x_min && outer.y_min < inner.y_min && inner.x_max < outer.x_max &&
           inner.y_max < outer.y_max;
}

BoxCWH to_cwh(const Box& b) noexcept
{
    return {(b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0, b.width(), b.height()};
}

Box to_corners(const BoxCWH& c) noexcept
{
    return {c.cx - c.w / 2.0, c.cy - c.h / 2.0, c.cx + c.w / 2.0, c.cy + c.h / 2.0};
}

} // namespace yoloea
