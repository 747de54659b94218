#include "yoloea/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "yoloea/errors.hpp"

namespace yoloea {

namespace {

constexpr std::size_t kRecallPoints = 101;

std::vector<std::size_t> confidence_order(const std::vector<Detection>& dets)
{
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&dets](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });
    return order;
}

/// A detection pooled across images, in global rank order.
struct Ranked
{
    int class_id;
    double confidence;
    bool tp;
};

/// All detections of the dataset ranked by confidence (ties: image order,
/// then detection index) with their TP flag at `iou_threshold`.
std::vector<Ranked> rank_pooled(const std::vector<ImageSample>& samples, double iou_threshold)
{
    std::vector<Ranked> pooled;
    for (const ImageSample& s : samples) {
        const MatchResult m = match_detections(s.detections, s.ground_truths, iou_threshold);
        for (std::size_t i = 0; i < s.detections.size(); ++i)
            pooled.push_back({s.detections[i].class_id, s.detections[i].confidence, m.detection_tp[i]});
    }
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const Ranked& a, const Ranked& b) { return a.confidence > b.confidence; });
    return pooled;
}

std::vector<bool> class_sequence(const std::vector<Ranked>& pooled, int class_id)
{
    std::vector<bool> seq;
    for (const Ranked& r : pooled)
        if (r.class_id == class_id)
            seq.push_back(r.tp);
    return seq;
}

double mean(const double* first, std::size_t count)
{
    if (count == 0)
        return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i)
        sum += first[i];
    return sum / static_cast<double>(count);
}

struct ClassCounts
{
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

ClassCounts pr_from_counts(std::size_t tp, std::size_t det, std::size_t gt)
{
    ClassCounts c;
    c.precision = det > 0 ? static_cast<double>(tp) / static_cast<double>(det) : 0.0;
    c.recall = gt > 0 ? static_cast<double>(tp) / static_cast<double>(gt) : 0.0;
    const double denom = c.precision + c.recall;
    c.f1 = denom > 0.0 ? 2.0 * c.precision * c.recall / denom : 0.0;
    return c;
}

void set_operating_point(EvalReport& report, const std::vector<Ranked>& pooled)
{
    const std::size_t nc = report.classes.size();
    std::map<int, std::size_t> slot;
    for (std::size_t c = 0; c < nc; ++c)
        slot[report.classes[c].class_id] = c;

    std::vector<std::size_t> tp(nc, 0), det(nc, 0);
    double best_f1 = -1.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        // Admit every detection at this confidence level at once.
        const double conf = pooled[i].confidence;
        for (; i < pooled.size() && pooled[i].confidence == conf; ++i) {
            const std::size_t c = slot.at(pooled[i].class_id);
            ++det[c];
            if (pooled[i].tp)
                ++tp[c];
        }
        std::vector<ClassCounts> per_class(nc);
        double f1_sum = 0.0, p_sum = 0.0, r_sum = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            per_class[c] = pr_from_counts(tp[c], det[c], report.classes[c].num_gt);
            f1_sum += per_class[c].f1;
            p_sum += per_class[c].precision;
            r_sum += per_class[c].recall;
        }
        const double f1 = f1_sum / static_cast<double>(nc);
        if (f1 > best_f1) {
            best_f1 = f1;
            report.f1 = f1;
            report.precision = p_sum / static_cast<double>(nc);
            report.recall = r_sum / static_cast<double>(nc);
            report.operating_confidence = conf;
            for (std::size_t c = 0; c < nc; ++c) {
                report.classes[c].precision = per_class[c].precision;
                report.classes[c].recall = per_class[c].recall;
            }
        }
    }
}

} // namespace

const std::array<double, kNumIouThresholds>& iou_thresholds() noexcept
{
    static const std::array<double, kNumIouThresholds> thresholds = [] {
        std::array<double, kNumIouThresholds> t{};
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = static_cast<double>(50 + 5 * i) / 100.0;
        return t;
    }();
    return thresholds;
}

MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                             double iou_threshold)
{
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw std::invalid_argument("IoU threshold must lie in (0, 1]");
    MatchResult result{std::vector<bool>(dets.size(), false), std::vector<bool>(gts.size(), false)};
    for (std::size_t d : confidence_order(dets)) {
        double best_iou = -1.0;
        std::size_t best_gt = gts.size();
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (result.gt_matched[g] || gts[g].class_id != dets[d].class_id)
                continue;
            const double v = iou(dets[d].box, gts[g].box);
            if (v > best_iou) {
                best_iou = v;
                best_gt = g;
            }
        }
        if (best_gt < gts.size() && best_iou >= iou_threshold) {
            result.detection_tp[d] = true;
            result.gt_matched[best_gt] = true;
        }
    }
    return result;
}

double average_precision(const std::vector<bool>& tp_ranked, std::size_t total_gt)
{
    if (total_gt == 0)
        throw std::invalid_argument("average_precision requires at least one ground truth");

    const std::size_t n = tp_ranked.size();
    std::vector<double> precision(n), recall(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (tp_ranked[i])
            ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(total_gt);
    }
    // Monotone envelope from the right.
    for (std::size_t i = n; i-- > 1;)
        precision[i - 1] = std::max(precision[i - 1], precision[i]);

    double sum = 0.0;
    for (std::size_t k = 0; k < kRecallPoints; ++k) {
        const double r = static_cast<double>(k) / 100.0;
        const auto it = std::lower_bound(recall.begin(), recall.end(), r);
        if (it != recall.end())
            sum += precision[static_cast<std::size_t>(it - recall.begin())];
    }
    return sum / static_cast<double>(kRecallPoints);
}

EvalReport evaluate(const std::vector<ImageSample>& samples, const EvalOptions& options)
{
    std::set<std::string> ids;
    std::map<int, ClassReport> by_class;
    std::size_t total_gt = 0;
    for (const ImageSample& s : samples) {
        if (!ids.insert(s.image_id).second)
            throw Error("duplicate image id '" + s.image_id + "'");
        for (const GroundTruthBox& g : s.ground_truths) {
            ++by_class[g.class_id].num_gt;
            ++total_gt;
        }
        for (const Detection& d : s.detections)
            ++by_class[d.class_id].num_detections;
    }
    if (total_gt == 0)
        throw EmptyDatasetError("dataset contains no ground-truth boxes");

    EvalReport report;
    report.num_images = samples.size();
    report.operating_iou = options.operating_iou;
    for (auto& [id, cls] : by_class) {
        cls.class_id = id;
        report.classes.push_back(cls);
    }
    const std::size_t nc = report.classes.size();

    const auto& thresholds = iou_thresholds();
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        const std::vector<Ranked> pooled = rank_pooled(samples, thresholds[t]);
        std::vector<double> aps(nc);
        for (std::size_t c = 0; c < nc; ++c) {
            ClassReport& cls = report.classes[c];
            cls.ap[t] = cls.num_gt > 0 ? average_precision(class_sequence(pooled, cls.class_id), cls.num_gt) : 0.0;
            aps[c] = cls.ap[t];
        }
        report.map_per_threshold[t] = mean(aps.data(), nc);
    }
    for (ClassReport& cls : report.classes)
        cls.ap50_95 = mean(cls.ap.data(), cls.ap.size());
    report.map50 = report.map_per_threshold[0];
    report.map50_95 = mean(report.map_per_threshold.data(), report.map_per_threshold.size());

    const std::vector<Ranked> pooled = rank_pooled(samples, options.operating_iou);
    for (ClassReport& cls : report.classes) {
        std::size_t tp = 0, k = 0;
        for (const Ranked& r : pooled) {
            if (r.class_id != cls.class_id)
                continue;
            ++k;
            if (r.tp)
                ++tp;
            const ClassCounts pr = pr_from_counts(tp, k, cls.num_gt);
            cls.pr_curve.push_back({r.confidence, pr.precision, pr.recall});
        }
    }
    set_operating_point(report, pooled);
    return report;
}

double measure_throughput(const std::vector<ImageSample>& workload, std::size_t repetitions)
{
    if (workload.empty())
        throw std::invalid_argument("throughput workload is empty");
    if (repetitions == 0)
        throw std::invalid_argument("repetitions must be positive");

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    double sink = 0.0;
    for (std::size_t r = 0; r < repetitions; ++r)
        sink += evaluate(workload).map50_95;
    const std::chrono::duration<double> elapsed = clock::now() - start;
    // Keeps the loop observable.
    if (sink < 0.0)
        return 0.0;
    const double seconds = std::max(elapsed.count(), 1e-9);
    return static_cast<double>(workload.size() * repetitions) / seconds;
}

} // namespace yoloea
