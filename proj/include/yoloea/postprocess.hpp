#pragma once

#include <vector>

#include "yoloea/geometry.hpp"

namespace yoloea {

struct Detection
{
    int class_id = 0;
    double confidence = 0.0;
    Box box;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// Detections with confidence >= threshold, in their original order.
std::vector<Detection> confidence_filter(const std::vector<Detection>& dets, double threshold);

/// Class-wise greedy hard NMS.
///
/// Within each class, candidates are visited by descending confidence (ties go
/// to the lower input index) and kept iff their IoU with every detection
/// already kept for that class is strictly below `iou_threshold`. The result
/// is ordered by descending confidence, ties by input index.
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold);

} // namespace yoloea
