#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "yoloea/geometry.hpp"

namespace yoloea {

enum class LossKind { IOU, GIOU, EIOU };

std::string_view to_string(LossKind kind) noexcept;

/// Parses "iou", "giou" or "eiou" (case-insensitive). Throws std::invalid_argument.
LossKind parse_loss_kind(std::string_view name);

/// Guard used for every loss denominator.
inline constexpr double kLossEpsilon = 1e-9;

/// Gradient with respect to the predicted box in center/size form.
struct BoxGrad
{
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    double max_abs() const noexcept;
};

/// Gradient with respect to the predicted box corners.
struct CornerGrad
{
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;
};

/// Chain rule from (cx, cy, w, h) to corner coordinates.
CornerGrad to_corner_grad(const BoxGrad& g) noexcept;

/// Chain rule from corner coordinates to (cx, cy, w, h).
BoxGrad to_cwh_grad(const CornerGrad& g) noexcept;

struct LossEval
{
    double value = 0.0;
    BoxGrad grad;
};

/// GIoU metric: IoU - (A_c - U) / A_c, in (-1, 1].
/// Throws DegenerateEnclosureError when the enclosing area is <= kLossEpsilon.
double giou_value(const Box& pred, const Box& gt);

/// 1 - giou_value, the quantity minimised during regression.
double giou_loss(const Box& pred, const Box& gt);

double iou_loss(const Box& pred, const Box& gt) noexcept;

/// 1 - IoU + center, width and height penalties, each normalised by the
/// enclosing box (squared diagonal, squared width, squared height).
double eiou_loss(const Box& pred, const Box& gt) noexcept;

double loss_value(LossKind kind, const Box& pred, const Box& gt);

/// Loss value and its analytic gradient with respect to the predicted box.
///
/// At configurations where an edge of `pred` coincides with an edge of `gt`
/// the loss is not differentiable. The corner partials are then the one-sided
/// derivatives for an increasing corner coordinate, mapped to (cx, cy, w, h)
/// by the usual chain rule. Throws DegenerateBoxError when `pred` has no area.
LossEval loss_with_grad(LossKind kind, const Box& pred, const Box& gt);

struct FitStep
{
    std::size_t step = 0;
    /// Optimisation variables; `box` is derived from them.
    BoxCWH params;
    Box box;
    double loss = 0.0;
};

enum class FitTermination {
    /// Gradient infinity-norm dropped below the tolerance.
    Converged,
    /// Reached the requested number of accepted steps.
    MaxSteps,
    /// No step size along the negative gradient reduced the loss.
    Stalled,
};

std::string_view to_string(FitTermination t) noexcept;

struct FitTrace
{
    FitStep initial;
    /// Accepted steps only, numbered from 1.
    std::vector<FitStep> steps;
    FitTermination termination = FitTermination::Converged;
    /// Distance between the final predicted center and the ground-truth center.
    double terminal_center_offset = 0.0;

    std::size_t accepted_steps() const noexcept { return steps.size(); }
    const FitStep& last() const noexcept { return steps.empty() ? initial : steps.back(); }
};

struct FitOptions
{
    double step_size = 1.0;
    std::size_t max_steps = 1000;
    double grad_tolerance = 1e-9;
    /// Step halvings tried per iteration before declaring a stall.
    int max_halvings = 60;
};

/// Gradient descent on (cx, cy, w, h) of the predicted box with backtracking:
/// each iteration starts from `step_size` and halves it until the loss strictly
/// decreases and the candidate keeps a positive area. Only improving steps are
/// recorded, so the traced losses are strictly decreasing.
FitTrace fit_box(const Box& init, const Box& gt, LossKind kind, const FitOptions& options);

} // namespace yoloea
