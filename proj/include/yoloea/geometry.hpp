#pragma once

#include <cmath>

namespace yoloea {

/// Axis-aligned box in corner form, continuous pixel coordinates.
/// A valid box has finite fields with x_min <= x_max and y_min <= y_max.
/// Width is x_max - x_min (no "+1" inclusive pixel convention).
struct Box
{
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const noexcept { return x_max - x_min; }
    double height() const noexcept { return y_max - y_min; }

    friend bool operator==(const Box&, const Box&) = default;
};

/// Center/size form of a box.
struct BoxCWH
{
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    friend bool operator==(const BoxCWH&, const BoxCWH&) = default;
};

bool is_valid(const Box& b) noexcept;

double area(const Box& b) noexcept;

/// Area of a ∩ b, zero when the boxes do not overlap.
double intersection_area(const Box& a, const Box& b) noexcept;

double union_area(const Box& a, const Box& b) noexcept;

/// Intersection over union; 0 when the union is empty.
double iou(const Box& a, const Box& b) noexcept;

/// Smallest axis-aligned box containing both a and b.
Box enclosing(const Box& a, const Box& b) noexcept;

/// True when `inner` lies inside `outer` (edges may touch).
bool contains(const Box& outer, const Box& inner) noexcept;

/// True when every edge of `inner` is strictly inside `outer`.
bool strictly_contains(const Box& outer, const Box& inner) noexcept;

BoxCWH to_cwh(const Box& b) noexcept;
Box to_corners(const BoxCWH& c) noexcept;

} // namespace yoloea
