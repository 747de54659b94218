#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "yoloea/geometry.hpp"
#include "yoloea/postprocess.hpp"

namespace yoloea {

struct GroundTruthBox
{
    int class_id = 0;
    Box box;

    friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

struct ImageSample
{
    std::string image_id;
    std::vector<Detection> detections;
    std::vector<GroundTruthBox> ground_truths;
};

inline constexpr std::size_t kNumIouThresholds = 10;

/// 0.50, 0.55, ..., 0.95 (each the correctly rounded double of k/100).
const std::array<double, kNumIouThresholds>& iou_thresholds() noexcept;

struct MatchResult
{
    /// Indexed like the input detections.
    std::vector<bool> detection_tp;
    /// Indexed like the input ground truths.
    std::vector<bool> gt_matched;
};

/// Greedy matching: detections in descending confidence (ties to the lower
/// index) each claim the unmatched same-class GT of highest IoU (ties to the
/// lower GT index) when that IoU is >= iou_threshold.
MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                             double iou_threshold);

/// 101-point interpolated AP of a ranked TP/FP sequence.
/// Throws std::invalid_argument when total_gt is zero.
double average_precision(const std::vector<bool>& tp_ranked, std::size_t total_gt);

struct PrPoint
{
    double confidence = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct ClassReport
{
    int class_id = 0;
    std::size_t num_gt = 0;
    std::size_t num_detections = 0;
    std::array<double, kNumIouThresholds> ap{};
    double ap50_95 = 0.0;
    /// At the dataset-wide operating confidence.
    double precision = 0.0;
    double recall = 0.0;
    /// Cumulative precision/recall at the operating-point IoU, one point per ranked detection.
    std::vector<PrPoint> pr_curve;

    double ap50() const noexcept { return ap[0]; }
};

struct EvalReport
{
    std::size_t num_images = 0;
    std::vector<ClassReport> classes;
    /// Class-mean AP at each IoU threshold.
    std::array<double, kNumIouThresholds> map_per_threshold{};
    double map50 = 0.0;
    double map50_95 = 0.0;
    /// Class-mean precision/recall at the confidence maximising class-mean F1.
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double operating_confidence = 0.0;
    double operating_iou = 0.5;
};

struct EvalOptions
{
    /// IoU threshold used for the precision/recall operating point.
    double operating_iou = 0.5;
};

/// COCO-style evaluation pooled over all images.
///
/// Classes with neither ground truth nor detections do not appear; a class
/// with detections but no ground truth contributes AP 0. Throws
/// EmptyDatasetError when no sample holds any ground truth, and Error on
/// duplicate image ids.
EvalReport evaluate(const std::vector<ImageSample>& samples, const EvalOptions& options = {});

/// Evaluated samples per second of wall-clock time over `repetitions` runs.
/// Throws std::invalid_argument on an empty workload or zero repetitions.
double measure_throughput(const std::vector<ImageSample>& workload, std::size_t repetitions);

} // namespace yoloea
