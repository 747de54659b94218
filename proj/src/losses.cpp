#include "yoloea/losses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "yoloea/errors.hpp"

namespace yoloea {

namespace {

double sqr(double v) noexcept
{
    return v * v;
}

/// One axis of a pred/gt pair: overlap and enclosure extents together with
/// their right-sided partials with respect to the predicted low/high edge.
struct AxisTerms
{
    double inter = 0.0;
    double d_inter_lo = 0.0;
    double d_inter_hi = 0.0;
    double encl = 0.0;
    double d_encl_lo = 0.0;
    double d_encl_hi = 0.0;
};

AxisTerms axis_terms(double p_lo, double p_hi, double g_lo, double g_hi) noexcept
{
    AxisTerms t;
    const double i_lo = std::max(p_lo, g_lo);
    const double i_hi = std::min(p_hi, g_hi);
    const double di_lo = p_lo >= g_lo ? 1.0 : 0.0;
    const double di_hi = p_hi < g_hi ? 1.0 : 0.0;
    const double span = i_hi - i_lo;
    if (span > 0.0 || (span == 0.0 && di_hi - di_lo > 0.0)) {
        t.inter = std::max(span, 0.0);
        t.d_inter_lo = -di_lo;
        t.d_inter_hi = di_hi;
    }

    t.encl = std::max(p_hi, g_hi) - std::min(p_lo, g_lo);
    t.d_encl_lo = p_lo < g_lo ? -1.0 : 0.0;
    t.d_encl_hi = p_hi >= g_hi ? 1.0 : 0.0;
    return t;
}

/// Partials of a scalar with respect to the four predicted corners.
struct Partials
{
    double x_lo = 0.0;
    double y_lo = 0.0;
    double x_hi = 0.0;
    double y_hi = 0.0;

    Partials operator*(double s) const noexcept { return {x_lo * s, y_lo * s, x_hi * s, y_hi * s}; }
    Partials operator+(const Partials& o) const noexcept
    {
        return {x_lo + o.x_lo, y_lo + o.y_lo, x_hi + o.x_hi, y_hi + o.y_hi};
    }
    Partials operator-(const Partials& o) const noexcept
    {
        return {x_lo - o.x_lo, y_lo - o.y_lo, x_hi - o.x_hi, y_hi - o.y_hi};
    }
};

/// Every quantity the three losses are built from, with corner partials.
struct PairTerms
{
    double inter = 0.0, uni = 0.0, iou = 0.0, encl_area = 0.0;
    double encl_w = 0.0, encl_h = 0.0;
    Partials d_inter, d_uni, d_iou, d_encl_area, d_encl_w, d_encl_h;
};

PairTerms pair_terms(const Box& p, const Box& g) noexcept
{
    const AxisTerms ax = axis_terms(p.x_min, p.x_max, g.x_min, g.x_max);
    const AxisTerms ay = axis_terms(p.y_min, p.y_max, g.y_min, g.y_max);
    const double pw = p.width();
    const double ph = p.height();

    PairTerms t;
    t.inter = ax.inter * ay.inter;
    t.d_inter = {ax.d_inter_lo * ay.inter, ay.d_inter_lo * ax.inter, ax.d_inter_hi * ay.inter,
                 ay.d_inter_hi * ax.inter};

    const Partials d_pred_area{-ph, -pw, ph, pw};
    t.uni = area(p) + area(g) - t.inter;
    t.d_uni = d_pred_area - t.d_inter;

    t.iou = t.uni > 0.0 ? t.inter / t.uni : 0.0;
    if (t.uni > 0.0)
        t.d_iou = (t.d_inter * t.uni - t.d_uni * t.inter) * (1.0 / sqr(t.uni));

    t.encl_w = ax.encl;
    t.encl_h = ay.encl;
    t.d_encl_w = {ax.d_encl_lo, 0.0, ax.d_encl_hi, 0.0};
    t.d_encl_h = {0.0, ay.d_encl_lo, 0.0, ay.d_encl_hi};
    t.encl_area = ax.encl * ay.encl;
    t.d_encl_area = t.d_encl_w * ay.encl + t.d_encl_h * ax.encl;
    return t;
}

BoxGrad corners_to_cwh(const Partials& d) noexcept
{
    return to_cwh_grad({d.x_lo, d.y_lo, d.x_hi, d.y_hi});
}

Partials iou_loss_partials(const PairTerms& t) noexcept
{
    return t.d_iou * -1.0;
}

Partials giou_loss_partials(const PairTerms& t) noexcept
{
    // loss = 1 - iou + 1 - U / A_c
    const Partials d_ratio = (t.d_uni * t.encl_area - t.d_encl_area * t.uni) * (1.0 / sqr(t.encl_area));
    return (t.d_iou + d_ratio) * -1.0;
}

/// max(v, eps) and its derivative factor (0 once the guard is active).
struct Guarded
{
    double value;
    double active;
};

Guarded guard(double v) noexcept
{
    return v > kLossEpsilon ? Guarded{v, 1.0} : Guarded{kLossEpsilon, 0.0};
}

Partials eiou_loss_partials(const Box& p, const Box& g, const PairTerms& t) noexcept
{
    const BoxCWH pc = to_cwh(p);
    const BoxCWH gc = to_cwh(g);

    const double dcx = pc.cx - gc.cx;
    const double dcy = pc.cy - gc.cy;
    const double dw = pc.w - gc.w;
    const double dh = pc.h - gc.h;

    const Guarded diag = guard(sqr(t.encl_w) + sqr(t.encl_h));
    const Guarded cw2 = guard(sqr(t.encl_w));
    const Guarded ch2 = guard(sqr(t.encl_h));

    const double rho2 = sqr(dcx) + sqr(dcy);
    // d(rho^2)/d corner: each center moves by half the corner displacement.
    const Partials d_rho2{dcx, dcy, dcx, dcy};
    const Partials d_w2{-2.0 * dw, 0.0, 2.0 * dw, 0.0};
    const Partials d_h2{0.0, -2.0 * dh, 0.0, 2.0 * dh};

    const Partials d_diag = (t.d_encl_w * (2.0 * t.encl_w) + t.d_encl_h * (2.0 * t.encl_h)) * diag.active;
    const Partials d_cw2 = t.d_encl_w * (2.0 * t.encl_w * cw2.active);
    const Partials d_ch2 = t.d_encl_h * (2.0 * t.encl_h * ch2.active);

    const Partials center = (d_rho2 * diag.value - d_diag * rho2) * (1.0 / sqr(diag.value));
    const Partials width = (d_w2 * cw2.value - d_cw2 * sqr(dw)) * (1.0 / sqr(cw2.value));
    const Partials height = (d_h2 * ch2.value - d_ch2 * sqr(dh)) * (1.0 / sqr(ch2.value));

    return iou_loss_partials(t) + center + width + height;
}

void require_positive_area(const Box& pred)
{
    if (!(pred.width() > 0.0 && pred.height() > 0.0))
        throw DegenerateBoxError("predicted box must have positive area");
}

} // namespace

std::string_view to_string(LossKind kind) noexcept
{
    switch (kind) {
    case LossKind::IOU: return "iou";
    case LossKind::GIOU: return "giou";
    case LossKind::EIOU: return "eiou";
    }
    return "unknown";
}

LossKind parse_loss_kind(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "iou")
        return LossKind::IOU;
    if (lower == "giou")
        return LossKind::GIOU;
    if (lower == "eiou")
        return LossKind::EIOU;
    throw std::invalid_argument("unknown loss kind '" + std::string(name) + "'");
}

double BoxGrad::max_abs() const noexcept
{
    return std::max({std::abs(cx), std::abs(cy), std::abs(w), std::abs(h)});
}

CornerGrad to_corner_grad(const BoxGrad& g) noexcept
{
    // x_min = cx - w/2, x_max = cx + w/2  =>  cx = (x_min + x_max)/2, w = x_max - x_min
    return {0.5 * g.cx - g.w, 0.5 * g.cy - g.h, 0.5 * g.cx + g.w, 0.5 * g.cy + g.h};
}

BoxGrad to_cwh_grad(const CornerGrad& g) noexcept
{
    return {g.x_min + g.x_max, g.y_min + g.y_max, 0.5 * (g.x_max - g.x_min), 0.5 * (g.y_max - g.y_min)};
}

double giou_value(const Box& pred, const Box& gt)
{
    const double encl = area(enclosing(pred, gt));
    if (encl <= kLossEpsilon)
        throw DegenerateEnclosureError("enclosing box has zero area");
    const double inter = intersection_area(pred, gt);
    const double uni = area(pred) + area(gt) - inter;
    const double iou_v = uni > 0.0 ? inter / uni : 0.0;
    return iou_v - (encl - uni) / encl;
}

double giou_loss(const Box& pred, const Box& gt)
{
    return 1.0 - giou_value(pred, gt);
}

double iou_loss(const Box& pred, const Box& gt) noexcept
{
    return 1.0 - iou(pred, gt);
}

double eiou_loss(const Box& pred, const Box& gt) noexcept
{
    const Box e = enclosing(pred, gt);
    const BoxCWH pc = to_cwh(pred);
    const BoxCWH gc = to_cwh(gt);
    const double cw2 = guard(sqr(e.width())).value;
    const double ch2 = guard(sqr(e.height())).value;
    const double diag = guard(sqr(e.width()) + sqr(e.height())).value;

    const double rho2 = sqr(pc.cx - gc.cx) + sqr(pc.cy - gc.cy);
    return 1.0 - iou(pred, gt) + rho2 / diag + sqr(pc.w - gc.w) / cw2 + sqr(pc.h - gc.h) / ch2;
}

double loss_value(LossKind kind, const Box& pred, const Box& gt)
{
    switch (kind) {
    case LossKind::IOU: return iou_loss(pred, gt);
    case LossKind::GIOU: return giou_loss(pred, gt);
    case LossKind::EIOU: return eiou_loss(pred, gt);
    }
    throw std::invalid_argument("unknown loss kind");
}

LossEval loss_with_grad(LossKind kind, const Box& pred, const Box& gt)
{
    require_positive_area(pred);
    LossEval out;
    out.value = loss_value(kind, pred, gt);

    const PairTerms t = pair_terms(pred, gt);
    switch (kind) {
    case LossKind::IOU: out.grad = corners_to_cwh(iou_loss_partials(t)); break;
    case LossKind::GIOU: out.grad = corners_to_cwh(giou_loss_partials(t)); break;
    case LossKind::EIOU: out.grad = corners_to_cwh(eiou_loss_partials(pred, gt, t)); break;
    }
    return out;
}

std::string_view to_string(FitTermination t) noexcept
{
    switch (t) {
    case FitTermination::Converged: return "converged";
    case FitTermination::MaxSteps: return "max_steps";
    case FitTermination::Stalled: return "stalled";
    }
    return "unknown";
}

FitTrace fit_box(const Box& init, const Box& gt, LossKind kind, const FitOptions& options)
{
    if (!(options.step_size > 0.0))
        throw std::invalid_argument("step size must be positive");
    if (options.max_steps == 0)
        throw std::invalid_argument("max_steps must be positive");
    require_positive_area(init);

    FitTrace trace;
    BoxCWH state = to_cwh(init);
    const Box start = to_corners(state);
    trace.initial = {0, state, start, loss_value(kind, start, gt)};

    trace.termination = FitTermination::MaxSteps;
    while (trace.steps.size() < options.max_steps) {
        const Box current = to_corners(state);
        const LossEval eval = loss_with_grad(kind, current, gt);
        // Every supported loss is bounded below by zero.
        if (eval.value <= 0.0 || eval.grad.max_abs() < options.grad_tolerance) {
            trace.termination = FitTermination::Converged;
            break;
        }

        bool accepted = false;
        double lr = options.step_size;
        for (int halving = 0; halving <= options.max_halvings; ++halving, lr *= 0.5) {
            const BoxCWH candidate{state.cx - lr * eval.grad.cx, state.cy - lr * eval.grad.cy,
                                   state.w - lr * eval.grad.w, state.h - lr * eval.grad.h};
            if (!(candidate.w > 0.0 && candidate.h > 0.0))
                continue;
            const Box box = to_corners(candidate);
            if (!is_valid(box) || !(box.width() > 0.0 && box.height() > 0.0))
                continue;
            const double value = loss_value(kind, box, gt);
            if (value < eval.value) {
                state = candidate;
                trace.steps.push_back({trace.steps.size() + 1, candidate, box, value});
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            trace.termination = FitTermination::Stalled;
            break;
        }
    }

    const BoxCWH& final_c = trace.last().params;
    const BoxCWH gt_c = to_cwh(gt);
    trace.terminal_center_offset = std::hypot(final_c.cx - gt_c.cx, final_c.cy - gt_c.cy);
    return trace;
}

} // namespace yoloea
