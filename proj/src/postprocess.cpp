#include "yoloea/postprocess.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace yoloea {

std::vector<Detection> confidence_filter(const std::vector<Detection>& dets, double threshold)
{
    std::vector<Detection> out;
    std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
                 [threshold](const Detection& d) { return d.confidence >= threshold; });
    return out;
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold)
{
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&dets](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });

    std::map<int, std::vector<std::size_t>> kept_by_class;
    std::vector<std::size_t> kept;
    for (std::size_t idx : order) {
        const Detection& cand = dets[idx];
        auto& same_class = kept_by_class[cand.class_id];
        const bool suppressed = std::any_of(same_class.begin(), same_class.end(), [&](std::size_t k) {
            return iou(dets[k].box, cand.box) >= iou_threshold;
        });
        if (suppressed)
            continue;
        same_class.push_back(idx);
        kept.push_back(idx);
    }

    // `order` is already (confidence desc, index asc), so `kept` is too.
    std::vector<Detection> out;
    out.reserve(kept.size());
    for (std::size_t idx : kept)
        out.push_back(dets[idx]);
    return out;
}

} // namespace yoloea
